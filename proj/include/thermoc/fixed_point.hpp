#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>

namespace thermoc {

// Unsigned Q8.8: 16-bit register, 8 fraction bits, resolution 1/256.
// Every temperature in the simulator and every detector register uses it.
class Q88 {
 public:
  using raw_type = std::uint16_t;
  static constexpr int kFracBits = 8;
  static constexpr std::int64_t kOne = std::int64_t{1} << kFracBits;
  static constexpr std::int64_t kMaxRaw = 0xFFFF;

  constexpr Q88() = default;

  // Saturates to [0, 0xFFFF].
  static constexpr Q88 from_raw(std::int64_t raw) {
    Q88 q;
    q.raw_ = static_cast<raw_type>(std::clamp<std::int64_t>(raw, 0, kMaxRaw));
    return q;
  }

  // Round to nearest, ties up, then saturate.
  static Q88 from_double(double v) {
    return from_raw(static_cast<std::int64_t>(std::floor(v * static_cast<double>(kOne) + 0.5)));
  }

  static constexpr Q88 from_int(std::int64_t whole) { return from_raw(whole * kOne); }

  constexpr raw_type raw() const { return raw_; }
  constexpr double to_double() const { return static_cast<double>(raw_) / static_cast<double>(kOne); }

  friend constexpr bool operator==(Q88, Q88) = default;
  friend constexpr auto operator<=>(Q88, Q88) = default;

 private:
  raw_type raw_ = 0;
};

constexpr Q88 sat_add(Q88 a, Q88 b) { return Q88::from_raw(std::int64_t{a.raw()} + b.raw()); }
constexpr Q88 sat_sub(Q88 a, Q88 b) { return Q88::from_raw(std::int64_t{a.raw()} - b.raw()); }

inline Q88 clamp_celsius(Q88 v, double lo, double hi) {
  return std::clamp(v, Q88::from_double(lo), Q88::from_double(hi));
}

// Three fraction digits: enough to recover the raw value by round-to-nearest (1/256 > 2 * 0.0005).
inline std::string to_decimal3(Q88 v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v.to_double());
  return buf;
}

}  // namespace thermoc
