#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "thermoc/error.hpp"
#include "thermoc/mesh.hpp"
#include "thermoc/response.hpp"

namespace thermoc {

// Mean peak-to-trough excursion over consecutive epochs of `epoch` samples. A trailing
// partial epoch counts only when no full epoch exists.
inline double temp_fluctuation(std::span<const double> temps, std::size_t epoch) {
  if (temps.empty()) throw ContractViolation("temp_fluctuation needs a non-empty window");
  if (epoch == 0) throw ContractViolation("fluctuation epoch must be positive");
  const std::size_t full = temps.size() / epoch;
  const std::size_t count = full == 0 ? 1 : full;
  double sum = 0.0;
  for (std::size_t e = 0; e < count; ++e) {
    const auto first = temps.begin() + static_cast<std::ptrdiff_t>(e * epoch);
    const auto last = full == 0 ? temps.end() : first + static_cast<std::ptrdiff_t>(epoch);
    const auto [lo, hi] = std::minmax_element(first, last);
    sum += *hi - *lo;
  }
  return sum / static_cast<double>(count);
}

// One entry whenever a router's (anomaly level, response mode) pair changes.
struct ResponseEvent {
  Cycle cycle = 0;
  RouterId router = 0;
  int level = 0;
  Mode mode = Mode::Normal;
  friend bool operator==(const ResponseEvent&, const ResponseEvent&) = default;
};

// Per router, an episode opens on the first nonzero level seen in Normal mode and closes on
// the cycle whose update returns the router to Normal; its length counts both ends.
// Episodes still open at the end of the log are ignored. nullopt when no episode closed.
inline std::vector<Cycle> recovery_episodes(std::span<const ResponseEvent> events) {
  std::map<RouterId, std::pair<Mode, std::optional<Cycle>>> state;
  std::vector<Cycle> out;
  for (const auto& e : events) {
    auto& [mode, start] = state[e.router];
    if (!start && mode == Mode::Normal && e.level > 0) start = e.cycle;
    if (start && e.mode == Mode::Normal && mode != Mode::Normal) {
      out.push_back(e.cycle + 1 - *start);
      start.reset();
    }
    mode = e.mode;
  }
  return out;
}

inline std::optional<double> recovery_time(std::span<const ResponseEvent> events) {
  const auto eps = recovery_episodes(events);
  if (eps.empty()) return std::nullopt;
  double sum = 0.0;
  for (Cycle c : eps) sum += static_cast<double>(c);
  return sum / static_cast<double>(eps.size());
}

inline std::optional<double> drop_rate(std::uint64_t dropped_packets, std::uint64_t injected_packets) {
  if (injected_packets == 0) return std::nullopt;
  return 100.0 * static_cast<double>(dropped_packets) / static_cast<double>(injected_packets);
}

enum class Task { Binary, Multiclass };

// Rows are truths, columns predictions, classes {0,1,2}.
struct Confusion {
  std::array<std::array<std::uint64_t, 3>, 3> m{};

  void add(int truth, int predicted) {
    if (truth < 0 || truth > 2 || predicted < 0 || predicted > 2) throw ContractViolation("class labels must be 0..2");
    ++m[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
  }
  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& row : m)
      for (auto v : row) t += v;
    return t;
  }
  Confusion& operator+=(const Confusion& o) {
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) m[i][j] += o.m[i][j];
    return *this;
  }
};

struct Scores {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  double accuracy = 0.0;
};

namespace detail {
struct Prf {
  double p, r, f;
};
inline Prf prf(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  const double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double f = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  return {p, r, f};
}
}  // namespace detail

// Binary collapses classes 1 and 2 into "attack". Multiclass macro-averages P/R/F1 over the
// classes that occur in truths or predictions.
inline Scores detection_scores(const Confusion& c, Task task) {
  const std::uint64_t total = c.total();
  if (total == 0) throw ContractViolation("detection_scores needs non-empty streams");
  Scores s;
  if (task == Task::Binary) {
    const std::uint64_t tn = c.m[0][0];
    const std::uint64_t fp = c.m[0][1] + c.m[0][2];
    const std::uint64_t fn = c.m[1][0] + c.m[2][0];
    const std::uint64_t tp = total - tn - fp - fn;
    s.accuracy = static_cast<double>(tp + tn) / static_cast<double>(total);
    if (tp + fp + fn == 0) return s;
    const auto r = detail::prf(tp, fp, fn);
    s.precision = r.p;
    s.recall = r.r;
    s.f1 = r.f;
    return s;
  }
  std::uint64_t correct = 0;
  double p = 0.0, r = 0.0, f = 0.0;
  int classes = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    correct += c.m[k][k];
    std::uint64_t fp = 0, fn = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      if (j == k) continue;
      fp += c.m[j][k];
      fn += c.m[k][j];
    }
    const std::uint64_t tp = c.m[k][k];
    if (tp + fp + fn == 0) continue;
    const auto v = detail::prf(tp, fp, fn);
    p += v.p;
    r += v.r;
    f += v.f;
    ++classes;
  }
  s.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  if (classes > 0) {
    s.precision = p / classes;
    s.recall = r / classes;
    s.f1 = f / classes;
  }
  return s;
}

inline Scores detection_scores(std::span<const int> predictions, std::span<const int> truths, Task task) {
  if (predictions.size() != truths.size()) throw ContractViolation("prediction and truth streams differ in length");
  if (predictions.empty()) throw ContractViolation("detection_scores needs non-empty streams");
  Confusion c;
  for (std::size_t i = 0; i < predictions.size(); ++i) c.add(truths[i], predictions[i]);
  return detection_scores(c, task);
}

}  // namespace thermoc
