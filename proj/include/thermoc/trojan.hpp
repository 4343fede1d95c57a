#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "thermoc/error.hpp"
#include "thermoc/fixed_point.hpp"
#include "thermoc/mesh.hpp"

namespace thermoc {

enum class Behavior : std::uint8_t { B1 = 1, B2 = 2 };  // value doubles as the F19 label
enum class Phase : std::uint8_t { Dormant, Credit, Exploit, Done };
enum class BehaviorMix { Alternate, OnlyB1, OnlyB2 };

// Sensor readings saturate at the top of the F16 range.
inline constexpr double kMaxReportedTemp = 90.0;

inline Q88 sensor_clamp(Q88 v) { return clamp_celsius(v, 0.0, kMaxReportedTemp); }

// One thermal Trojan. Credits and the budget are raw Q8.8 units summed over cycles.
//
// Behavior-1 under-reports while banking credit, then over-reports until the bank is empty;
// Behavior-2 does the opposite. The reporting offset is clipped to what is left in the
// current phase and to the sensor range, and only the offset actually applied moves the
// bank, so the sum of (reported - real) over a completed attack is exactly zero.
struct TrojanInstance {
  Behavior behavior = Behavior::B1;
  RouterId router = 0;
  Q88 delta = Q88::from_int(2);
  std::int64_t credit_budget = 400 * Q88::kOne;
  std::int64_t credit = 0;
  Phase phase = Phase::Dormant;
  Cycle start_cycle = 0;
  std::optional<Cycle> active_from;  // first manipulated cycle
  std::optional<Cycle> done_at;      // first cycle after the last manipulation

  bool active() const { return phase == Phase::Credit || phase == Phase::Exploit; }
};

// Manipulates one clean sensor reading and advances the instance's phase.
inline Q88 manipulate(TrojanInstance& t, Q88 real, Cycle cycle) {
  if (!t.active()) throw ContractViolation("manipulate called on a dormant or finished trojan");
  real = sensor_clamp(real);
  const std::int64_t r = real.raw();
  const std::int64_t lo = 0;
  const std::int64_t hi = Q88::from_double(kMaxReportedTemp).raw();
  if (t.phase == Phase::Credit) {
    const std::int64_t offset = std::min<std::int64_t>(t.delta.raw(), t.credit_budget - t.credit);
    const std::int64_t sign = t.behavior == Behavior::B1 ? -1 : 1;
    const std::int64_t reported = std::clamp(r + sign * offset, lo, hi);
    t.credit += sign * (reported - r);
    if (t.credit >= t.credit_budget) t.phase = Phase::Exploit;
    return Q88::from_raw(reported);
  }
  const std::int64_t offset = std::min<std::int64_t>(t.delta.raw(), t.credit);
  const std::int64_t sign = t.behavior == Behavior::B1 ? 1 : -1;
  const std::int64_t reported = std::clamp(r + sign * offset, lo, hi);
  t.credit -= sign * (reported - r);
  if (t.credit <= 0) {
    t.phase = Phase::Done;
    t.done_at = cycle + 1;
  }
  return Q88::from_raw(reported);
}

struct TrojanConfig {
  int count = 0;
  BehaviorMix mix = BehaviorMix::Alternate;
  double delta = 2.0;
  double credit_budget = 400.0;  // degC * cycles

  void validate() const {
    if (count < 0) throw ValidationError("trojan count must be non-negative");
    if (!(delta > 0.0)) throw ValidationError("trojan delta must be positive");
    if (!(credit_budget > 0.0)) throw ValidationError("trojan credit_budget must be positive");
  }
};

// The attack plan for one run plus the live bookkeeping for which instance owns which router.
// A router hosts at most one active instance; a later instance waits until the router is free.
class AttackSchedule {
 public:
  AttackSchedule() = default;
  AttackSchedule(std::vector<TrojanInstance> instances, int routers)
      : instances_(std::move(instances)), active_(static_cast<std::size_t>(routers), -1) {}

  const std::vector<TrojanInstance>& instances() const { return instances_; }
  bool empty() const { return instances_.empty(); }

  // Wakes due instances. Call once at the start of each cycle.
  void begin_cycle(Cycle cycle) {
    for (std::size_t i = 0; i < instances_.size(); ++i) {
      auto& t = instances_[i];
      if (t.phase != Phase::Dormant || t.start_cycle > cycle) continue;
      if (active_[t.router] >= 0) continue;
      t.phase = Phase::Credit;
      t.active_from = cycle;
      active_[t.router] = static_cast<int>(i);
    }
  }

  // Reported value for this router this cycle; the clean reading when no instance is active.
  Q88 report(RouterId router, Q88 clean, Cycle cycle) {
    const int idx = active_[router];
    if (idx < 0) return sensor_clamp(clean);
    auto& t = instances_[static_cast<std::size_t>(idx)];
    const Q88 out = manipulate(t, clean, cycle);
    if (t.phase == Phase::Done) active_[router] = -1;
    return out;
  }

  // Label for the router during the current cycle (0 when untouched).
  int live_label(RouterId router) const {
    const int idx = active_[router];
    return idx < 0 ? 0 : static_cast<int>(instances_[static_cast<std::size_t>(idx)].behavior);
  }

  // Label for any past or current (router, cycle) from the recorded activity intervals.
  int label_of(RouterId router, Cycle cycle) const {
    for (const auto& t : instances_) {
      if (t.router != router || !t.active_from || cycle < *t.active_from) continue;
      if (t.done_at && cycle >= *t.done_at) continue;
      return static_cast<int>(t.behavior);
    }
    return 0;
  }

 private:
  std::vector<TrojanInstance> instances_;
  std::vector<int> active_;
};

// Start cycles ~ Normal(sim_cycles/2, sim_cycles/6) clamped to [0, 0.8 sim_cycles];
// routers uniform without replacement while enough routers exist.
template <class Rng>
AttackSchedule schedule_attacks(const TrojanConfig& cfg, Cycle sim_cycles, const MeshDims& dims, Rng& rng) {
  const int routers = dims.routers();
  std::vector<TrojanInstance> out;
  if (cfg.count <= 0) return AttackSchedule(std::move(out), routers);

  std::vector<RouterId> places;
  if (cfg.count <= routers) {
    std::vector<RouterId> all(static_cast<std::size_t>(routers));
    std::iota(all.begin(), all.end(), RouterId{0});
    std::shuffle(all.begin(), all.end(), rng);
    places.assign(all.begin(), all.begin() + cfg.count);
  } else {
    std::uniform_int_distribution<int> pick(0, routers - 1);
    for (int i = 0; i < cfg.count; ++i) places.push_back(static_cast<RouterId>(pick(rng)));
  }

  const double mean = static_cast<double>(sim_cycles) / 2.0;
  const double sd = static_cast<double>(sim_cycles) / 6.0;
  std::normal_distribution<double> when(mean, sd);
  const double latest = 0.8 * static_cast<double>(sim_cycles);
  for (int i = 0; i < cfg.count; ++i) {
    TrojanInstance t;
    switch (cfg.mix) {
      case BehaviorMix::Alternate: t.behavior = i % 2 == 0 ? Behavior::B1 : Behavior::B2; break;
      case BehaviorMix::OnlyB1: t.behavior = Behavior::B1; break;
      case BehaviorMix::OnlyB2: t.behavior = Behavior::B2; break;
    }
    t.router = places[static_cast<std::size_t>(i)];
    t.delta = Q88::from_double(cfg.delta);
    t.credit_budget = static_cast<std::int64_t>(std::llround(cfg.credit_budget * Q88::kOne));
    t.start_cycle = static_cast<Cycle>(std::llround(std::clamp(when(rng), 0.0, latest)));
    out.push_back(t);
  }
  return AttackSchedule(std::move(out), routers);
}

}  // namespace thermoc
