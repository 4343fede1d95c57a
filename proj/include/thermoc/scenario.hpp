#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermoc/error.hpp"
#include "thermoc/metrics.hpp"
#include "thermoc/world.hpp"

namespace thermoc {

enum class ScenarioMode { Baseline, Attack, Mitigated };

inline const char* to_string(ScenarioMode m) {
  switch (m) {
    case ScenarioMode::Baseline: return "baseline";
    case ScenarioMode::Attack: return "attack";
    case ScenarioMode::Mitigated: return "mitigated";
  }
  return "?";
}

inline ScenarioMode parse_mode(const std::string& s) {
  if (s == "baseline") return ScenarioMode::Baseline;
  if (s == "attack") return ScenarioMode::Attack;
  if (s == "mitigated") return ScenarioMode::Mitigated;
  throw ValidationError("unknown mode '" + s + "' (expected baseline, attack or mitigated)");
}

inline const char* to_string(Task t) { return t == Task::Binary ? "binary" : "multiclass"; }

// Defaults for scenario runs: the DTM loop is closed so a forged reading moves the real
// temperature, and a handful of trojans are planted.
inline WorldConfig scenario_defaults() {
  WorldConfig c;
  c.dtm.enabled = true;
  c.trojan.count = 16;
  return c;
}

// The three modes differ only in trojan firing and response enablement.
inline WorldConfig apply_mode(WorldConfig c, ScenarioMode m) {
  c.trojans_active = m != ScenarioMode::Baseline;
  c.response.enabled = m == ScenarioMode::Mitigated;
  return c;
}

// Cycles an instance would manipulate if it started on time: credit phase plus an equal
// exploit phase.
inline Cycle nominal_attack_length(const TrojanConfig& t) {
  return 2 * static_cast<Cycle>(std::ceil(t.credit_budget / t.delta));
}

// Mean epoch fluctuation over the (router, epoch) cells touched by a scheduled attack
// window. The schedule exists in every mode, so baseline runs measure the same cells.
inline std::optional<double> attack_window_fluctuation(const World& w, const std::vector<std::vector<float>>& per_router) {
  const auto& cfg = w.config();
  const Cycle len = nominal_attack_length(cfg.trojan);
  const auto E = static_cast<Cycle>(cfg.fluct_epoch);
  std::map<std::pair<RouterId, std::size_t>, double> cells;
  for (const auto& t : w.schedule().instances()) {
    const auto& epochs = per_router.at(t.router);
    const Cycle last = t.start_cycle + len - 1;
    for (Cycle e = t.start_cycle / E; e <= last / E && e < epochs.size(); ++e)
      cells[{t.router, static_cast<std::size_t>(e)}] = epochs[e];
  }
  if (cells.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [k, v] : cells) sum += v;
  return sum / static_cast<double>(cells.size());
}

inline std::optional<double> network_fluctuation(const std::vector<std::vector<float>>& per_router) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : per_router)
    for (float v : r) {
      sum += v;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

struct DetectionRow {
  FeatureSet set = FeatureSet::Set2;
  int sigma = 5;
  Task task = Task::Binary;
  Scores scores;
};

struct RunReport {
  ScenarioMode mode = ScenarioMode::Baseline;
  std::uint64_t seed = 0;
  FeatureSet set = FeatureSet::Set2;
  int sigma = 5;
  int force_level = 0;
  Cycle cycles = 0;
  int trojans = 0;
  std::optional<double> temp_fluct;           // true temperature, attack-window cells
  std::optional<double> temp_fluct_reported;  // reported temperature, attack-window cells
  std::optional<double> temp_fluct_network;   // true temperature, every router and epoch
  std::optional<double> recovery_time;
  std::optional<double> drop_rate;
  std::size_t episodes = 0;
  std::uint64_t attacked_samples = 0;  // (router, cycle) samples labelled 1 or 2
  FlitCounters counters;
  std::vector<DetectionRow> detection;
};

inline void add_scores(std::vector<DetectionRow>& out, FeatureSet set, int sigma, const Confusion& c) {
  if (c.total() == 0) return;
  for (Task t : {Task::Binary, Task::Multiclass}) out.push_back({set, sigma, t, detection_scores(c, t)});
}

inline RunReport summarize(const World& w, ScenarioMode mode) {
  const auto& cfg = w.config();
  RunReport r;
  r.mode = mode;
  r.seed = cfg.seed;
  r.set = cfg.detector.set;
  r.sigma = cfg.detector.sigma;
  r.force_level = cfg.response.force_level;
  r.cycles = w.cycle();
  r.trojans = cfg.trojan.count;
  r.temp_fluct = attack_window_fluctuation(w, w.epoch_fluct_true());
  r.temp_fluct_reported = attack_window_fluctuation(w, w.epoch_fluct_reported());
  r.temp_fluct_network = network_fluctuation(w.epoch_fluct_true());
  r.recovery_time = recovery_time(w.response_events());
  r.drop_rate = drop_rate(w.counters().dropped_packets, w.counters().injected_packets);
  r.episodes = recovery_episodes(w.response_events()).size();
  r.counters = w.counters();
  const auto& c = w.confusion();
  for (int t = 1; t < 3; ++t)
    for (int p = 0; p < 3; ++p) r.attacked_samples += c.m[t][p];
  add_scores(r.detection, cfg.detector.set, cfg.detector.sigma, c);
  for (const auto& o : w.observer_scores())
    for (std::size_t i = 0; i < o.sigmas.size(); ++i) add_scores(r.detection, o.set, o.sigmas[i], o.confusion[i]);
  return r;
}

struct RunOptions {
  bool score_all_sets = false;  // passive observers for Sets 1-5 at every sigma
  bool log_dataset = false;
};

inline RunReport run_scenario(const WorldConfig& base, ScenarioMode mode, const RunOptions& opt = {},
                              std::vector<FeatureVector>* dataset = nullptr) {
  WorldConfig c = apply_mode(base, mode);
  if (opt.score_all_sets)
    for (int s = 1; s <= 5; ++s) c.observers.push_back({feature_set_from_int(s), {1, 2, 3, 4, 5, 6, 7}});
  c.log_dataset = opt.log_dataset || dataset != nullptr;
  World w(std::move(c));
  w.run();
  RunReport r = summarize(w, mode);
  if (dataset) *dataset = w.dataset();
  return r;
}

// ---- JSON / CSV ----------------------------------------------------------------------------

namespace detail {
template <class T>
nlohmann::json opt_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::string opt_csv(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << *v;
  return os.str();
}
}  // namespace detail

inline nlohmann::json to_json(const Scores& s) {
  return {{"precision", detail::opt_json(s.precision)},
          {"recall", detail::opt_json(s.recall)},
          {"f1", detail::opt_json(s.f1)},
          {"accuracy", s.accuracy}};
}

inline nlohmann::json to_json(const FlitCounters& k) {
  return {{"injected_flits", k.injected_flits},     {"delivered_flits", k.delivered_flits},
          {"dropped_flits", k.dropped_flits},       {"injected_packets", k.injected_packets},
          {"delivered_packets", k.delivered_packets}, {"dropped_packets", k.dropped_packets},
          {"refused_packets", k.refused_packets},   {"routing_events", k.routing_events}};
}

inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json det = nlohmann::json::array();
  for (const auto& d : r.detection)
    det.push_back({{"set", static_cast<int>(d.set)}, {"sigma", d.sigma}, {"task", to_string(d.task)},
                   {"scores", to_json(d.scores)}});
  return {{"mode", to_string(r.mode)},
          {"seed", r.seed},
          {"set", static_cast<int>(r.set)},
          {"sigma", r.sigma},
          {"force_level", r.force_level},
          {"cycles", r.cycles},
          {"trojans", r.trojans},
          {"temp_fluct", detail::opt_json(r.temp_fluct)},
          {"temp_fluct_reported", detail::opt_json(r.temp_fluct_reported)},
          {"temp_fluct_network", detail::opt_json(r.temp_fluct_network)},
          {"recovery_time", detail::opt_json(r.recovery_time)},
          {"drop_rate", detail::opt_json(r.drop_rate)},
          {"episodes", r.episodes},
          {"attacked_samples", r.attacked_samples},
          {"counters", to_json(r.counters)},
          {"detection", det}};
}

// The three-mode comparison for one configuration.
struct ScenarioMetrics {
  std::optional<double> temp_fluct_before;
  std::optional<double> temp_fluct_attack;
  std::optional<double> temp_fluct_mitigated;
  std::optional<double> recovery_time;
  std::optional<double> drop_rate;
  std::vector<DetectionRow> detection;  // from the attack run
  RunReport baseline, attack, mitigated;
};

inline ScenarioMetrics evaluate_scenarios(const WorldConfig& base, bool score_all_sets = true) {
  ScenarioMetrics m;
  m.baseline = run_scenario(base, ScenarioMode::Baseline);
  m.attack = run_scenario(base, ScenarioMode::Attack, {score_all_sets, false});
  m.mitigated = run_scenario(base, ScenarioMode::Mitigated);
  m.temp_fluct_before = m.baseline.temp_fluct;
  m.temp_fluct_attack = m.attack.temp_fluct;
  m.temp_fluct_mitigated = m.mitigated.temp_fluct;
  m.recovery_time = m.mitigated.recovery_time;
  m.drop_rate = m.mitigated.drop_rate;
  m.detection = m.attack.detection;
  return m;
}

inline nlohmann::json to_json(const ScenarioMetrics& m) {
  nlohmann::json j = {{"temp_fluct_before", detail::opt_json(m.temp_fluct_before)},
                      {"temp_fluct_attack", detail::opt_json(m.temp_fluct_attack)},
                      {"temp_fluct_mitigated", detail::opt_json(m.temp_fluct_mitigated)},
                      {"recovery_time", detail::opt_json(m.recovery_time)},
                      {"drop_rate", detail::opt_json(m.drop_rate)}};
  j["runs"] = {to_json(m.baseline), to_json(m.attack), to_json(m.mitigated)};
  return j;
}

inline const char* metrics_csv_header() {
  return "scenario,set,sigma,task,precision,recall,f1,accuracy,temp_fluct,recovery_time,drop_rate";
}

// One row per scenario x set x sigma x task.
inline void write_metrics_csv(std::ostream& out, const std::vector<RunReport>& runs) {
  out << metrics_csv_header() << '\n';
  for (const auto& r : runs) {
    for (const auto& d : r.detection) {
      out << to_string(r.mode) << ',' << static_cast<int>(d.set) << ',' << d.sigma << ',' << to_string(d.task) << ','
          << detail::opt_csv(d.scores.precision) << ',' << detail::opt_csv(d.scores.recall) << ','
          << detail::opt_csv(d.scores.f1) << ',' << detail::opt_csv(d.scores.accuracy) << ','
          << detail::opt_csv(r.temp_fluct) << ',' << detail::opt_csv(r.recovery_time) << ','
          << detail::opt_csv(r.drop_rate) << '\n';
    }
  }
}

// ---- Sweep ---------------------------------------------------------------------------------

struct SweepGrid {
  std::vector<int> sets{1, 2, 3, 4, 5};
  std::vector<int> sigmas{5, 6, 7};
  std::vector<ScenarioMode> modes{ScenarioMode::Baseline, ScenarioMode::Attack, ScenarioMode::Mitigated};
  std::vector<std::uint64_t> seeds{1};

  void validate() const {
    if (sets.empty() || sigmas.empty() || modes.empty() || seeds.empty())
      throw ValidationError("sweep grid needs at least one set, sigma, mode and seed");
    for (int s : sets)
      if (s < 1 || s > 5) throw ValidationError("sweep set must be 1..5, got " + std::to_string(s));
    for (int s : sigmas)
      if (s < kMinSigma || s > kMaxSigma) throw ValidationError("sweep sigma must be 1..7, got " + std::to_string(s));
  }
};

struct SweepCell {
  ScenarioMode mode;
  int set;
  int sigma;
  std::uint64_t seed;

  // Zero-padded so lexical order groups by mode, then set, sigma and seed.
  std::string key() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s_set%d_sigma%d_seed%020llu", to_string(mode), set, sigma,
                  static_cast<unsigned long long>(seed));
    return buf;
  }
};

inline std::vector<SweepCell> expand(const SweepGrid& g) {
  g.validate();
  std::vector<SweepCell> cells;
  for (auto m : g.modes)
    for (int s : g.sets)
      for (int n : g.sigmas)
        for (auto seed : g.seeds) cells.push_back({m, s, n, seed});
  return cells;
}

inline const char* sweep_csv_header() {
  return "mode,set,sigma,seed,status,temp_fluct,temp_fluct_reported,recovery_time,drop_rate,"
         "bin_precision,bin_recall,bin_f1,bin_accuracy,mc_precision,mc_recall,mc_f1,mc_accuracy";
}

inline std::string sweep_csv_row(const SweepCell& c, const RunReport* r) {
  using detail::opt_csv;
  std::ostringstream os;
  os << to_string(c.mode) << ',' << c.set << ',' << c.sigma << ',' << c.seed << ',' << (r ? "ok" : "failed");
  if (!r) {
    os << std::string(12, ',');
    return os.str();
  }
  os << ',' << opt_csv(r->temp_fluct) << ',' << opt_csv(r->temp_fluct_reported) << ',' << opt_csv(r->recovery_time)
     << ',' << opt_csv(r->drop_rate);
  for (Task t : {Task::Binary, Task::Multiclass}) {
    const DetectionRow* d = nullptr;
    for (const auto& x : r->detection)
      if (x.task == t && static_cast<int>(x.set) == c.set && x.sigma == c.sigma) d = &x;
    if (!d) {
      os << ",,,,";
      continue;
    }
    os << ',' << opt_csv(d->scores.precision) << ',' << opt_csv(d->scores.recall) << ',' << opt_csv(d->scores.f1)
       << ',' << opt_csv(d->scores.accuracy);
  }
  return os.str();
}

struct SweepSummary {
  std::size_t computed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  std::size_t rows = 0;
};

// Runs every cell not yet listed in <dir>/index.txt. Each cell leaves <dir>/cells/<key>.csv
// (one data row) and an index line; a failing cell records its error and the sweep moves
// on. The combined file <dir>/sweep.csv is rebuilt from the cell files in key order.
inline SweepSummary run_sweep(const WorldConfig& base, const SweepGrid& grid, const std::filesystem::path& dir,
                              const std::function<void(const SweepCell&, const std::string&)>& progress = {}) {
  namespace fs = std::filesystem;
  const auto cells = expand(grid);
  fs::create_directories(dir / "cells");

  std::map<std::string, std::string> done;  // key -> status
  const fs::path index = dir / "index.txt";
  if (std::ifstream in{index}) {
    std::string line;
    while (std::getline(in, line)) {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) continue;
      done[line.substr(0, tab)] = line.substr(tab + 1);
    }
  }

  SweepSummary sum;
  std::ofstream idx(index, std::ios::app);
  if (!idx) throw IoError("cannot write sweep index '" + index.string() + "'");
  for (const auto& c : cells) {
    const std::string key = c.key();
    const auto it = done.find(key);
    if (it != done.end() && it->second == "ok" && fs::exists(dir / "cells" / (key + ".csv"))) {
      ++sum.skipped;
      continue;
    }
    std::string row, status = "ok";
    try {
      WorldConfig cfg = base;
      cfg.seed = c.seed;
      cfg.detector.set = feature_set_from_int(c.set);
      cfg.detector.sigma = c.sigma;
      const RunReport r = run_scenario(cfg, c.mode);
      row = sweep_csv_row(c, &r);
      ++sum.computed;
    } catch (const std::exception& e) {
      row = sweep_csv_row(c, nullptr);
      status = std::string("failed: ") + e.what();
      for (char& ch : status)
        if (ch == '\n' || ch == '\t') ch = ' ';
      ++sum.failed;
    }
    {
      std::ofstream out(dir / "cells" / (key + ".csv"), std::ios::trunc);
      if (!out) throw IoError("cannot write sweep cell '" + key + "'");
      out << row << '\n';
    }
    idx << key << '\t' << status << '\n' << std::flush;
    if (progress) progress(c, status);
  }

  std::map<std::string, std::string> rows;
  for (const auto& c : cells) {
    std::ifstream in(dir / "cells" / (c.key() + ".csv"));
    std::string line;
    if (in && std::getline(in, line)) rows[c.key()] = line;
  }
  std::ofstream out(dir / "sweep.csv", std::ios::trunc);
  if (!out) throw IoError("cannot write '" + (dir / "sweep.csv").string() + "'");
  out << sweep_csv_header() << '\n';
  for (const auto& [k, line] : rows) out << line << '\n';
  sum.rows = rows.size();
  return sum;
}

}  // namespace thermoc
