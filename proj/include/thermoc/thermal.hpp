#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "thermoc/error.hpp"
#include "thermoc/fixed_point.hpp"
#include "thermoc/mesh.hpp"

namespace thermoc {

// Lumped-RC proxy: one explicit update per tile every step_cycles cycles.
struct ThermalConfig {
  double t_ambient = 45.0;
  double t_initial = 57.0;
  double alpha = 2.0;   // degC per watt per step
  double beta = 0.05;   // leakage toward ambient per step
  double gamma = 0.01;  // lateral exchange per neighbor per step
  double p_idle = 0.3;
  double p_per_flit = 0.001;
  int step_cycles = 10;
  double core_gain = 0.25;  // core-over-router offset, degC per locally injected flit per step
  double idle_spread = 0.1;  // per-tile idle power drawn once from p_idle * (1 +/- idle_spread)

  void validate(const MeshDims& dims) const {
    if (alpha < 0 || beta < 0 || gamma < 0 || p_idle < 0 || p_per_flit < 0 || core_gain < 0)
      throw ValidationError("thermal coefficients must be non-negative");
    if (idle_spread < 0.0 || idle_spread >= 1.0) throw ValidationError("thermal idle_spread must be in [0,1)");
    if (beta >= 1.0) throw ValidationError("thermal beta must be below 1");
    if (step_cycles < 1) throw ValidationError("thermal step_cycles must be positive");
    const int max_nbrs = (dims.x > 1 ? 2 : 0) + (dims.y > 1 ? 2 : 0) + (dims.z > 1 ? 2 : 0);
    if (beta + gamma * max_nbrs >= 1.0) throw ValidationError("unstable thermal update: beta + gamma * neighbors >= 1");
  }
};

// Optional thermal-management loop driven by the reported (sensor) temperature: a tile is
// throttled at or above t_high and released at or below t_low. Throttling scales the tile's
// power and halves the core clock in the dataset.
struct DtmConfig {
  bool enabled = false;
  double t_high = 59.0;
  double t_low = 58.5;
  double power_scale = 0.5;
  int nominal_mhz = 3600;
  int throttled_mhz = 1800;

  void validate() const {
    if (!(t_low <= t_high)) throw ValidationError("dtm t_low must not exceed t_high");
    if (power_scale < 0.0 || power_scale > 1.0) throw ValidationError("dtm power_scale must be in [0,1]");
    if (throttled_mhz < 0 || nominal_mhz < throttled_mhz || nominal_mhz > 3600)
      throw ValidationError("dtm frequencies must satisfy 0 <= throttled <= nominal <= 3600");
  }
};

// Hysteresis step; returns the new throttle state.
inline bool dtm_update(const DtmConfig& cfg, bool throttled, Q88 reported) {
  if (!cfg.enabled) return false;
  const double t = reported.to_double();
  if (t >= cfg.t_high) return true;
  if (t <= cfg.t_low) return false;
  return throttled;
}

inline constexpr double kMaxTilePower = 3.0;
inline constexpr double kMaxTileTemp = 99.0;

inline double tile_power(double p_idle, double p_per_flit, std::uint32_t flits_switched) {
  return std::clamp(p_idle + p_per_flit * static_cast<double>(flits_switched), 0.0, kMaxTilePower);
}

inline double tile_power(const ThermalConfig& cfg, std::uint32_t flits_switched) {
  return tile_power(cfg.p_idle, cfg.p_per_flit, flits_switched);
}

// Static per-tile idle power, modelling tiles that run different workloads.
template <class Rng>
std::vector<double> tile_idle_powers(const ThermalConfig& cfg, int tiles, Rng& rng) {
  std::vector<double> out(static_cast<std::size_t>(tiles), cfg.p_idle);
  if (cfg.idle_spread <= 0.0) return out;
  std::uniform_real_distribution<double> u(-cfg.idle_spread, cfg.idle_spread);
  for (auto& p : out) p *= 1.0 + u(rng);
  return out;
}

struct ThermalGrid {
  std::vector<Q88> temps;
  std::vector<double> powers;

  ThermalGrid() = default;
  ThermalGrid(int tiles, Q88 initial) : temps(static_cast<std::size_t>(tiles), initial), powers(static_cast<std::size_t>(tiles), 0.0) {}
};

namespace detail {
inline std::int64_t floor_raw(double v) { return static_cast<std::int64_t>(std::floor(v + 1e-9)); }
}  // namespace detail

// T' = T + alpha*P - beta*(T - ambient) + gamma * sum_nbr (T_j - T_i), clamped to [0, 99] degC.
//
// Works on raw Q8.8 integers. Leakage and every pairwise exchange are truncated toward zero
// magnitude, so with zero power the largest deviation from ambient never grows, and each
// pairwise exchange moves the same amount out of one tile and into the other.
inline ThermalGrid step_thermal(const ThermalGrid& grid, const ThermalConfig& cfg, const MeshDims& dims) {
  const std::size_t n = grid.temps.size();
  ThermalGrid next = grid;
  std::vector<std::int64_t> raw(n);
  const auto ambient = static_cast<std::int64_t>(Q88::from_double(cfg.t_ambient).raw());
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t t = grid.temps[i].raw();
    const std::int64_t dev = t - ambient;
    const std::int64_t leak = detail::floor_raw(cfg.beta * static_cast<double>(dev < 0 ? -dev : dev));
    const std::int64_t heat = static_cast<std::int64_t>(std::floor(cfg.alpha * grid.powers[i] * Q88::kOne + 0.5));
    raw[i] = t + heat - (dev < 0 ? -leak : leak);
  }
  if (cfg.gamma > 0.0) {
    constexpr Port kForward[] = {Port::East, Port::North, Port::Up};
    for (std::size_t i = 0; i < n; ++i) {
      for (Port p : kForward) {
        const auto j = dims.neighbor(static_cast<RouterId>(i), p);
        if (!j) continue;
        const std::int64_t diff = std::int64_t{grid.temps[*j].raw()} - grid.temps[i].raw();
        const std::int64_t mag = detail::floor_raw(cfg.gamma * static_cast<double>(diff < 0 ? -diff : diff));
        const std::int64_t flux = diff < 0 ? -mag : mag;  // into i
        raw[i] += flux;
        raw[*j] -= flux;
      }
    }
  }
  const auto hi = static_cast<std::int64_t>(Q88::from_double(kMaxTileTemp).raw());
  for (std::size_t i = 0; i < n; ++i) next.temps[i] = Q88::from_raw(std::clamp<std::int64_t>(raw[i], 0, hi));
  return next;
}

}  // namespace thermoc
