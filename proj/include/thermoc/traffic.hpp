#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "thermoc/error.hpp"
#include "thermoc/mesh.hpp"

namespace thermoc {

enum class TrafficMode { Uniform, Trace, Mixed };

struct TraceEntry {
  RouterId src = 0;
  RouterId dst = 0;
  double pir = 0.0;
  Cycle t_start = 0;
  Cycle t_stop = 0;

  bool active_at(Cycle c) const { return c >= t_start && c <= t_stop; }
};

struct TrafficConfig {
  double pir = 0.05;
  TrafficMode mode = TrafficMode::Uniform;
  std::string trace_path;

  void validate() const {
    if (!(pir >= 0.0 && pir <= 1.0)) throw ValidationError("pir must lie in [0,1]");
    const bool wants_trace = mode != TrafficMode::Uniform;
    if (wants_trace == trace_path.empty())
      throw ValidationError("trace_path is required exactly for trace and mixed modes");
  }
};

struct Injection {
  RouterId src = 0;
  RouterId dst = 0;
  friend bool operator==(const Injection&, const Injection&) = default;
};

// Parses "src dst pir t_start t_stop" lines; '#' starts a comment line, blank lines are skipped.
inline std::vector<TraceEntry> parse_trace(std::istream& in, int routers) {
  std::vector<TraceEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    long long src = 0, dst = 0, t0 = 0, t1 = 0;
    double pir = 0.0;
    if (!(fields >> src >> dst >> pir >> t0 >> t1)) throw ParseError(lineno, "expected 'src dst pir t_start t_stop'");
    std::string extra;
    if (fields >> extra) throw ParseError(lineno, "unexpected trailing field '" + extra + "'");
    const auto where = " (line " + std::to_string(lineno) + ")";
    if (src < 0 || dst < 0 || src >= routers || dst >= routers)
      throw ValidationError("router id out of range for a " + std::to_string(routers) + "-router mesh" + where);
    if (src == dst) throw ValidationError("source equals destination" + where);
    if (!(pir >= 0.0 && pir <= 1.0)) throw ValidationError("pir outside [0,1]" + where);
    if (t0 < 0 || t1 < t0) throw ValidationError("need 0 <= t_start <= t_stop" + where);
    out.push_back(TraceEntry{static_cast<RouterId>(src), static_cast<RouterId>(dst), pir,
                             static_cast<Cycle>(t0), static_cast<Cycle>(t1)});
  }
  return out;
}

inline std::vector<TraceEntry> load_trace(const std::string& path, int routers) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file '" + path + "'");
  return parse_trace(in, routers);
}

// Every node fires independently with probability pir; the destination is uniform over the
// other nodes.
template <class Rng>
std::vector<Injection> uniform_injections(int routers, double pir, Rng& rng) {
  std::vector<Injection> out;
  if (routers < 2) return out;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int n = 0; n < routers; ++n) {
    const bool fire = coin(rng) < pir;
    if (!fire) continue;
    std::uniform_int_distribution<int> pick(0, routers - 2);
    int d = pick(rng);
    if (d >= n) ++d;
    out.push_back(Injection{static_cast<RouterId>(n), static_cast<RouterId>(d)});
  }
  return out;
}

// Per-cycle packet generator. The injection stream depends only on (config, trace, seed, cycle):
// network state never feeds back into it.
class TrafficSource {
 public:
  TrafficSource(TrafficConfig cfg, std::vector<TraceEntry> trace, int routers, std::uint64_t seed)
      : cfg_(std::move(cfg)), trace_(std::move(trace)), routers_(routers), rng_(seed) {}

  // Must be called once per cycle, in cycle order.
  std::vector<Injection> next(Cycle cycle) {
    std::vector<Injection> out;
    std::vector<bool> fired(static_cast<std::size_t>(routers_), false);
    if (cfg_.mode != TrafficMode::Uniform) {
      std::uniform_real_distribution<double> coin(0.0, 1.0);
      for (const auto& e : trace_) {
        if (!e.active_at(cycle)) continue;
        const bool fire = coin(rng_) < e.pir;
        if (fire && !fired[e.src]) {
          fired[e.src] = true;
          out.push_back(Injection{e.src, e.dst});
        }
      }
    }
    if (cfg_.mode != TrafficMode::Trace) {
      for (const auto& inj : uniform_injections(routers_, cfg_.pir, rng_)) {
        if (!fired[inj.src]) {
          fired[inj.src] = true;
          out.push_back(inj);
        }
      }
    }
    return out;
  }

 private:
  TrafficConfig cfg_;
  std::vector<TraceEntry> trace_;
  int routers_;
  std::mt19937_64 rng_;
};

}  // namespace thermoc
