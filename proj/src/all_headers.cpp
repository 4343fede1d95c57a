// Compiles every public header in one translation unit so a missing include shows up at build time.
#include "thermoc/config.hpp"
#include "thermoc/dataset.hpp"
#include "thermoc/detector.hpp"
#include "thermoc/error.hpp"
#include "thermoc/fixed_point.hpp"
#include "thermoc/mesh.hpp"
#include "thermoc/metrics.hpp"
#include "thermoc/response.hpp"
#include "thermoc/scenario.hpp"
#include "thermoc/thermal.hpp"
#include "thermoc/traffic.hpp"
#include "thermoc/trojan.hpp"
#include "thermoc/world.hpp"
