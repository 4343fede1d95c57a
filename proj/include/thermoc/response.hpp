#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "thermoc/error.hpp"
#include "thermoc/mesh.hpp"

namespace thermoc {

enum class Mode : std::uint8_t { Normal = 0, L1 = 1, L2 = 2, L3 = 3 };

inline constexpr Cycle kNeverReopen = std::numeric_limits<Cycle>::max();

struct ResponseConfig {
  bool enabled = true;
  Cycle hysteresis = 128;  // calm cycles before reopening; kNeverReopen disables reopening
  int force_level = 0;     // 1..3: every detection takes this level's action; 0 = detected level

  void validate() const {
    if (force_level < 0 || force_level > 3) throw ValidationError("response force_level must be 0..3");
    if (hysteresis == 0) throw ValidationError("response hysteresis must be positive");
  }
};

// Ports closed per level on an interior router: 4 of 6 leaves 33.33% capacity, 5 leaves 16.67%.
constexpr int ports_to_close(int level) {
  switch (level) {
    case 1: return 4;
    case 2: return 5;
    case 3: return 6;
    default: return 0;
  }
}

// A uniformly random subset of the present directional ports, capped by what is present.
// Bit i set means directional port i is closed; the local port is never included.
template <class Rng>
std::uint8_t decide(int level, std::uint8_t present_ports, Rng& rng) {
  present_ports &= 0x3F;
  const int want = std::min(ports_to_close(level), std::popcount(present_ports));
  if (want == 0) return 0;
  std::array<int, kDirectionalPorts> pool{};
  int n = 0;
  for (int p = 0; p < kDirectionalPorts; ++p) {
    if (present_ports & (1u << p)) pool[static_cast<std::size_t>(n++)] = p;
  }
  // Partial Fisher-Yates: the first `want` entries are a uniform k-subset.
  for (int i = 0; i < want; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  std::uint8_t mask = 0;
  for (int i = 0; i < want; ++i) mask |= static_cast<std::uint8_t>(1u << pool[static_cast<std::size_t>(i)]);
  return mask;
}

struct ResponseState {
  Mode mode = Mode::Normal;
  std::uint8_t closed_ports = 0;
  Cycle calm_counter = 0;
};

// Escalates immediately, de-escalates between nonzero levels immediately, and reopens
// everything after `hysteresis` consecutive level-0 cycles.
template <class Rng>
ResponseState step_response(ResponseState s, int level, std::uint8_t present_ports, Cycle hysteresis, Rng& rng) {
  const int current = static_cast<int>(s.mode);
  if (level == 0) {
    if (s.mode == Mode::Normal) return s;
    if (++s.calm_counter >= hysteresis) s = ResponseState{};
    return s;
  }
  s.calm_counter = 0;
  if (level != current) {
    s.mode = static_cast<Mode>(level);
    s.closed_ports = decide(level, present_ports, rng);
  }
  return s;
}

}  // namespace thermoc
