#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thermoc/error.hpp"
#include "thermoc/fixed_point.hpp"
#include "thermoc/mesh.hpp"

namespace thermoc {

// Table 1 feature numbers. F19 is the label and never monitored.
enum class FeatureId : std::uint8_t {
  F1 = 1, F2, F3, F4, F5, F6, F7, F8, F9, F10, F11, F12, F13, F14, F15, F16, F17, F18
};

inline std::string feature_name(FeatureId f) { return "F" + std::to_string(static_cast<int>(f)); }

inline bool is_temperature_feature(FeatureId f) {
  return f == FeatureId::F16 || f == FeatureId::F17 || f == FeatureId::F18;
}

enum class FeatureSet : std::uint8_t { Set1 = 1, Set2, Set3, Set4, Set5 };

inline FeatureSet feature_set_from_int(int i) {
  if (i < 1 || i > 5) throw ContractViolation("feature set must be 1..5, got " + std::to_string(i));
  return static_cast<FeatureSet>(i);
}

// Thermal-Congestion, Multi-scale Thermal, Temporal-Thermal, Network Traffic, Thermal-Routing.
constexpr std::array<FeatureId, 3> members(FeatureSet s) {
  using F = FeatureId;
  switch (s) {
    case FeatureSet::Set1: return {F::F15, F::F17, F::F16};
    case FeatureSet::Set2: return {F::F17, F::F16, F::F18};
    case FeatureSet::Set3: return {F::F17, F::F18, F::F1};
    case FeatureSet::Set4: return {F::F18, F::F7, F::F10};
    case FeatureSet::Set5: return {F::F16, F::F8, F::F6};
  }
  return {F::F16, F::F17, F::F18};
}

// Slot of the temperature feature that decides the attack direction: the raw router
// temperature when the set has it, else the fastest derived one.
constexpr std::size_t temperature_slot(FeatureSet s) {
  switch (s) {
    case FeatureSet::Set1: return 2;  // F16
    case FeatureSet::Set2: return 1;  // F16
    case FeatureSet::Set3: return 0;  // F17
    case FeatureSet::Set4: return 0;  // F18
    case FeatureSet::Set5: return 0;  // F16
  }
  return 0;
}

// Largest Table 1 value per feature; features above the Q8.8 range are scaled down to fit.
inline double feature_range_max(FeatureId f) {
  switch (f) {
    case FeatureId::F1: return 5'000'000.0;
    case FeatureId::F2: return 3.0;
    case FeatureId::F3: return 99.0;
    case FeatureId::F4: return 100.0;
    case FeatureId::F5: return 3600.0;
    case FeatureId::F6:
    case FeatureId::F7:
    case FeatureId::F8: return 255.0;
    case FeatureId::F9: return 2.0;
    case FeatureId::F10: return 14.0;
    case FeatureId::F11: return 8.0;
    case FeatureId::F12: return 255.0;
    case FeatureId::F13:
    case FeatureId::F14: return 6.0;
    case FeatureId::F15: return 100.0;
    default: return 90.0;
  }
}

// Encodes a feature value into the detector's Q8.8 pipeline.
inline Q88 encode_feature(FeatureId f, double value) {
  const double max = feature_range_max(f);
  const double scale = max > 255.0 ? 255.0 / max : 1.0;
  return Q88::from_double(value * scale);
}

// ---- Weighted moving average -------------------------------------------------------------

struct WmaState {
  Q88 wma;
  Q88 t1 = Q88::from_int(60);
  Q88 t2 = Q88::from_int(75);
};

// 1 below T1, 3 from T1 upward (T2 does not change the weight).
constexpr int wma_weight(Q88 v, Q88 t1) { return v < t1 ? 1 : 3; }

// WMA' = (w1*x + w0*WMA) / (w1 + w0), rounded to nearest with ties up.
constexpr WmaState wma_update(WmaState s, Q88 x) {
  const std::int64_t w1 = wma_weight(x, s.t1);
  const std::int64_t w0 = wma_weight(s.wma, s.t1);
  const std::int64_t num = w1 * x.raw() + w0 * s.wma.raw();
  const std::int64_t den = w1 + w0;
  s.wma = Q88::from_raw((2 * num + den) / (2 * den));
  return s;
}

// ---- Thresholds ----------------------------------------------------------------------------

inline constexpr int kMinSigma = 1;
inline constexpr int kMaxSigma = 7;

inline void check_sigma(int n) {
  if (n < kMinSigma || n > kMaxSigma) throw ContractViolation("sigma index must be 1..7, got " + std::to_string(n));
}

// mean / 2^n as a logical right shift of the raw register.
inline Q88 sigma_shift(Q88 mean, int n) {
  check_sigma(n);
  return Q88::from_raw(mean.raw() >> n);
}

struct Thresholds {
  Q88 lower;
  Q88 upper;
  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

inline Thresholds thresholds_approx(Q88 mean, int n) {
  const Q88 s = sigma_shift(mean, n);
  return Thresholds{sat_sub(mean, s), sat_add(mean, s)};
}

struct ExactThresholds {
  double lower = 0.0;
  double upper = 0.0;
};

// mean -/+ k * population std. Reference path only.
inline ExactThresholds thresholds_exact(std::span<const double> samples, double k) {
  if (samples.empty()) throw ContractViolation("thresholds_exact needs at least one sample");
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (double v : samples) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(samples.size()));
  return ExactThresholds{mean - k * sd, mean + k * sd};
}

// Percentage of samples inside [lower, upper].
template <class T, class Bound>
double coverage(std::span<const T> samples, Bound lower, Bound upper) {
  if (samples.empty()) throw ContractViolation("coverage needs at least one sample");
  std::size_t inside = 0;
  for (const T& s : samples) inside += (lower <= s && s <= upper) ? 1 : 0;
  return 100.0 * static_cast<double>(inside) / static_cast<double>(samples.size());
}

inline double coverage(std::span<const Q88> samples, const Thresholds& t) { return coverage(samples, t.lower, t.upper); }

// ---- Classification ------------------------------------------------------------------------

enum class Status : std::uint8_t { N, U, L };

struct AnomalyLevelRegister {
  int level = 0;
  std::array<Status, 3> statuses{Status::N, Status::N, Status::N};
};

inline Status status_of(Q88 value, const Thresholds& t) {
  if (value > t.upper) return Status::U;
  if (value < t.lower) return Status::L;
  return Status::N;
}

inline AnomalyLevelRegister classify(const std::array<Q88, 3>& values, const std::array<Thresholds, 3>& regs) {
  AnomalyLevelRegister out;
  for (std::size_t i = 0; i < 3; ++i) {
    out.statuses[i] = status_of(values[i], regs[i]);
    out.level += out.statuses[i] == Status::N ? 0 : 1;
  }
  return out;
}

// 0 = normal, 1 = under-reporting (Behavior-1 direction), 2 = over-reporting.
// With the temperature feature inside its band but another feature out, the direction of
// the most recent temperature excursion is reused; without one the event is not attributed.
inline int multiclass_predict(int level, Status temp_status, std::optional<Status> last_temp_excursion) {
  if (level == 0) return 0;
  if (temp_status == Status::L) return 1;
  if (temp_status == Status::U) return 2;
  if (!last_temp_excursion) return 0;
  return *last_temp_excursion == Status::L ? 1 : 2;
}

// ---- Features log --------------------------------------------------------------------------

// Fixed-capacity ring of the most recent samples of one feature.
class FeaturesLog {
 public:
  explicit FeaturesLog(std::size_t capacity = 2) : buf_(capacity) {
    if (capacity < 2) throw ContractViolation("features log needs capacity >= 2");
  }

  void push(Q88 v) {
    buf_[head_] = v;
    head_ = (head_ + 1) % buf_.size();
    size_ = std::min(size_ + 1, buf_.size());
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return buf_.size(); }

  // back(0) is the newest sample.
  Q88 back(std::size_t age) const {
    if (age >= size_) throw ContractViolation("features log holds fewer samples than requested");
    return buf_[(head_ + buf_.size() - 1 - age) % buf_.size()];
  }

 private:
  std::vector<Q88> buf_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

// Derived features come from the temperature log and WMA; everything else passes through
// from its own log. nullopt means the log is still warming up.
inline std::optional<Q88> derive_feature(FeatureId f, const FeaturesLog& log, const WmaState& temp_wma) {
  switch (f) {
    case FeatureId::F17: {
      if (log.size() < 2) return std::nullopt;
      return Q88::from_raw((std::int64_t{log.back(0).raw()} + log.back(1).raw()) >> 1);
    }
    case FeatureId::F18:
      if (log.size() < 1) return std::nullopt;
      return temp_wma.wma;
    default:
      if (log.size() < 1) return std::nullopt;
      return log.back(0);
  }
}

// ---- Per-router module ---------------------------------------------------------------------

struct DetectorConfig {
  FeatureSet set = FeatureSet::Set2;
  int sigma = 5;
  double t1 = 60.0;
  double t2 = 75.0;
  std::size_t window = 16;      // features log capacity
  std::size_t warmup = 1000;    // samples before the first classification
  std::size_t wma_period = 128; // samples folded into one WMA observation (power of two)
  std::size_t sticky_hold = 0;  // samples a temperature excursion direction is remembered; 0 = forever

  void validate() const {
    check_sigma(sigma);
    if (!(t1 < t2)) throw ValidationError("detector t1 must be below t2");
    if (window < 2) throw ValidationError("detector window must be at least 2");
    if (wma_period == 0 || !std::has_single_bit(wma_period) || wma_period > 4096)
      throw ValidationError("detector wma_period must be a power of two in 1..4096");
  }
};

// Averages a fixed power-of-two block of samples with a shift, then feeds the block mean to
// the WMA. The first sample seeds the WMA directly.
class WmaUnit {
 public:
  WmaUnit(Q88 t1, Q88 t2, std::size_t period)
      : state_{Q88{}, t1, t2}, period_(period), shift_(std::countr_zero(period)) {}

  void observe(Q88 x) {
    if (!seeded_) {
      state_.wma = x;
      seeded_ = true;
      return;
    }
    acc_ += x.raw();
    if (++count_ < period_) return;
    const auto mean = Q88::from_raw((acc_ + (std::int64_t{1} << shift_ >> 1)) >> shift_);
    state_ = wma_update(state_, mean);
    acc_ = 0;
    count_ = 0;
  }

  const WmaState& state() const { return state_; }
  bool seeded() const { return seeded_; }

 private:
  WmaState state_;
  std::size_t period_;
  int shift_;
  std::int64_t acc_ = 0;
  std::size_t count_ = 0;
  bool seeded_ = false;
};

// Raw per-cycle inputs a router's detector sees. Network fields hold the most recent
// flit event at the router.
struct FeatureSample {
  Cycle cycle = 0;
  Q88 reported_temp;
  double congestion = 0.0;
  int packet_source = 0;
  int packet_dest = 0;
  int current_router = 0;
  int hop_count = 0;
};

inline double raw_feature_value(FeatureId f, const FeatureSample& s) {
  switch (f) {
    case FeatureId::F1: return static_cast<double>(s.cycle);
    case FeatureId::F6: return s.packet_source;
    case FeatureId::F7: return s.packet_dest;
    case FeatureId::F8: return s.current_router;
    case FeatureId::F10: return s.hop_count;
    case FeatureId::F15: return s.congestion;
    default: return s.reported_temp.to_double();
  }
}

struct Evaluation {
  AnomalyLevelRegister reg;
  int predicted_class = 0;
  bool warm = false;
};

// Features log -> WMA -> sigma shift -> threshold registers -> anomaly level register.
//
// Extra sigma tiers share the log and WMA registers and only duplicate the threshold and
// level registers, so one instance can score several tiers on the same stream. Tier 0 is
// the configured sigma.
class RouterDetector {
 public:
  explicit RouterDetector(const DetectorConfig& cfg, std::vector<int> extra_sigmas = {})
      : cfg_(cfg),
        feats_(members(cfg.set)),
        temp_log_(cfg.window),
        temp_wma_(Q88::from_double(cfg.t1), Q88::from_double(cfg.t2), cfg.wma_period) {
    cfg_.validate();
    for (std::size_t i = 0; i < 3; ++i) {
      logs_.emplace_back(cfg.window);
      wmas_.emplace_back(Q88::from_double(cfg.t1), Q88::from_double(cfg.t2), cfg.wma_period);
    }
    tiers_.push_back(make_tier(cfg.sigma));
    for (int s : extra_sigmas) {
      check_sigma(s);
      tiers_.push_back(make_tier(s));
    }
  }

  const Evaluation& evaluate(const FeatureSample& s) {
    temp_log_.push(s.reported_temp);
    temp_wma_.observe(s.reported_temp);
    ++samples_;

    std::array<Q88, 3> values{};
    bool ready = true;
    for (std::size_t i = 0; i < 3; ++i) {
      const FeatureId f = feats_[i];
      std::optional<Q88> v;
      if (is_temperature_feature(f)) {
        v = derive_feature(f, temp_log_, temp_wma_.state());
      } else {
        logs_[i].push(encode_feature(f, raw_feature_value(f, s)));
        v = derive_feature(f, logs_[i], temp_wma_.state());
      }
      if (!v) {
        ready = false;
        continue;
      }
      wmas_[i].observe(*v);
      values[i] = *v;
    }

    const bool warm = ready && samples_ > cfg_.warmup;
    const std::size_t slot = temperature_slot(cfg_.set);
    for (auto& t : tiers_) {
      for (std::size_t i = 0; i < 3; ++i) t.regs[i] = thresholds_approx(wmas_[i].state().wma, t.sigma);
      t.eval = Evaluation{};
      t.eval.warm = warm;
      if (!warm) continue;
      t.eval.reg = classify(values, t.regs);
      const Status temp = t.eval.reg.statuses[slot];
      if (t.last_excursion && cfg_.sticky_hold > 0 && samples_ - t.excursion_at > cfg_.sticky_hold)
        t.last_excursion.reset();
      t.eval.predicted_class = multiclass_predict(t.eval.reg.level, temp, t.last_excursion);
      if (temp != Status::N) {
        t.last_excursion = temp;
        t.excursion_at = samples_;
      }
    }
    return tiers_.front().eval;
  }

  std::size_t tiers() const { return tiers_.size(); }
  int sigma(std::size_t tier = 0) const { return tiers_.at(tier).sigma; }
  const Evaluation& evaluation(std::size_t tier = 0) const { return tiers_.at(tier).eval; }
  const std::array<Thresholds, 3>& threshold_registers(std::size_t tier = 0) const { return tiers_.at(tier).regs; }
  const AnomalyLevelRegister& anomaly_level_register(std::size_t tier = 0) const { return tiers_.at(tier).eval.reg; }
  const WmaState& temperature_wma() const { return temp_wma_.state(); }
  Q88 running_average() const { return temp_wma_.state().wma; }
  const FeaturesLog& temperature_log() const { return temp_log_; }
  const DetectorConfig& config() const { return cfg_; }

 private:
  struct Tier {
    int sigma = 5;
    std::array<Thresholds, 3> regs{};
    Evaluation eval;
    std::optional<Status> last_excursion;
    std::size_t excursion_at = 0;
  };

  static Tier make_tier(int sigma) {
    Tier t;
    t.sigma = sigma;
    return t;
  }

  DetectorConfig cfg_;
  std::array<FeatureId, 3> feats_;
  FeaturesLog temp_log_;
  WmaUnit temp_wma_;
  std::vector<FeaturesLog> logs_;
  std::vector<WmaUnit> wmas_;
  std::vector<Tier> tiers_;
  std::size_t samples_ = 0;
};

}  // namespace thermoc
