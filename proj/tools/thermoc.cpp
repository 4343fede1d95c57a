#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thermoc/config.hpp"
#include "thermoc/dataset.hpp"
#include "thermoc/scenario.hpp"

namespace fs = std::filesystem;
using namespace thermoc;

namespace {

struct Common {
  std::string config;
  std::optional<int> set;
  std::optional<int> sigma;
  std::optional<std::uint64_t> seed;
  std::optional<Cycle> cycles;
  std::optional<int> level;
  std::optional<int> trojans;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--set", c.set, "detector feature set")->check(CLI::Range(1, 5));
  app->add_option("--sigma", c.sigma, "sigma index")->check(CLI::Range(1, 7));
  app->add_option("--seed", c.seed, "RNG seed");
  app->add_option("--cycles", c.cycles, "simulated cycles")->check(CLI::PositiveNumber);
  app->add_option("--level", c.level, "force every detection to this response level (0 = detected level)")
      ->check(CLI::Range(0, 3));
  app->add_option("--trojans", c.trojans, "number of trojan instances")->check(CLI::NonNegativeNumber);
}

WorldConfig build_config(const Common& c) {
  WorldConfig cfg = scenario_defaults();
  if (!c.config.empty()) cfg = load_config(c.config, cfg);
  if (c.set) cfg.detector.set = feature_set_from_int(*c.set);
  if (c.sigma) cfg.detector.sigma = *c.sigma;
  if (c.seed) cfg.seed = *c.seed;
  if (c.cycles) cfg.sim_cycles = *c.cycles;
  if (c.level) cfg.response.force_level = *c.level;
  if (c.trojans) cfg.trojan.count = *c.trojans;
  resolve_trace(cfg);
  validate_config(cfg);
  return cfg;
}

fs::path out_root() {
  const char* env = std::getenv("THERMOC_OUT_DIR");
  return env && *env ? fs::path(env) : fs::path("out");
}

fs::path resolve_out(const std::string& flag, const std::string& fallback) {
  return flag.empty() ? out_root() / fallback : fs::path(flag);
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  out << j.dump(2) << '\n';
}

template <class T>
std::vector<T> dedupe(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermoc: 3D mesh NoC simulator with thermal trojans and an in-router anomaly detector"};
  app.require_subcommand(1);

  Common run_opts;
  std::string run_mode = "attack";
  std::string run_dataset;
  bool run_all_sets = false;
  auto* run = app.add_subcommand("run", "run one scenario and write its JSON report");
  add_common(run, run_opts);
  run->add_option("--mode", run_mode, "baseline, attack or mitigated")
      ->check(CLI::IsMember({"baseline", "attack", "mitigated"}));
  run->add_option("--out", run_opts.out, "report path (default $THERMOC_OUT_DIR/report.json)");
  run->add_option("--dataset", run_dataset, "also export the feature CSV here");
  run->add_flag("--all-sets", run_all_sets, "score Sets 1-5 at every sigma with passive observers");

  Common sweep_opts;
  std::vector<int> sweep_sets{1, 2, 3, 4, 5}, sweep_sigmas{5, 6, 7};
  std::vector<std::string> sweep_modes{"baseline", "attack", "mitigated"};
  std::vector<std::uint64_t> sweep_seeds{1};
  auto* sweep = app.add_subcommand("sweep", "run a sets x sigmas x modes x seeds grid (resumable)");
  add_common(sweep, sweep_opts);
  sweep->add_option("--sets", sweep_sets, "feature sets")->check(CLI::Range(1, 5));
  sweep->add_option("--sigmas", sweep_sigmas, "sigma indices")->check(CLI::Range(1, 7));
  sweep->add_option("--modes", sweep_modes, "scenario modes")
      ->check(CLI::IsMember({"baseline", "attack", "mitigated"}));
  sweep->add_option("--seeds", sweep_seeds, "seeds")->expected(1, -1);
  sweep->add_option("--out", sweep_opts.out, "output directory (default $THERMOC_OUT_DIR/sweep)");

  Common export_opts;
  std::string export_mode = "attack";
  auto* exp = app.add_subcommand("export-dataset", "run one scenario and export the labelled feature CSV");
  add_common(exp, export_opts);
  exp->add_option("--mode", export_mode, "baseline, attack or mitigated")
      ->check(CLI::IsMember({"baseline", "attack", "mitigated"}));
  exp->add_option("--out", export_opts.out, "CSV path (default $THERMOC_OUT_DIR/dataset.csv)");

  Common report_opts;
  auto* rep = app.add_subcommand("report", "run baseline, attack and mitigated; write JSON and CSV metrics");
  add_common(rep, report_opts);
  rep->add_option("--out", report_opts.out, "output directory (default $THERMOC_OUT_DIR/report)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const WorldConfig cfg = build_config(run_opts);
      std::vector<FeatureVector> rows;
      const bool want_rows = !run_dataset.empty();
      const RunReport r =
          run_scenario(cfg, parse_mode(run_mode), {run_all_sets, want_rows}, want_rows ? &rows : nullptr);
      const fs::path out = resolve_out(run_opts.out, "report.json");
      write_json(out, to_json(r));
      if (want_rows) export_csv(rows, run_dataset);
      std::cout << out.string() << '\n';
    } else if (*sweep) {
      const WorldConfig cfg = build_config(sweep_opts);
      SweepGrid grid;
      grid.sets = dedupe(sweep_sets);
      grid.sigmas = dedupe(sweep_sigmas);
      grid.modes.clear();
      for (const auto& m : dedupe(sweep_modes)) grid.modes.push_back(parse_mode(m));
      grid.seeds = dedupe(sweep_seeds);
      const fs::path dir = resolve_out(sweep_opts.out, "sweep");
      const auto s = run_sweep(cfg, grid, dir, [](const SweepCell& c, const std::string& status) {
        std::cerr << c.key() << ": " << status << '\n';
      });
      std::cout << (dir / "sweep.csv").string() << ": " << s.rows << " rows (" << s.computed << " computed, "
                << s.skipped << " reused, " << s.failed << " failed)\n";
      return s.failed ? 1 : 0;
    } else if (*exp) {
      const WorldConfig cfg = build_config(export_opts);
      std::vector<FeatureVector> rows;
      run_scenario(cfg, parse_mode(export_mode), {}, &rows);
      const fs::path out = resolve_out(export_opts.out, "dataset.csv");
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      const auto n = export_csv(rows, out.string());
      std::cout << out.string() << ": " << n << " rows\n";
    } else if (*rep) {
      const WorldConfig cfg = build_config(report_opts);
      const ScenarioMetrics m = evaluate_scenarios(cfg);
      const fs::path dir = resolve_out(report_opts.out, "report");
      write_json(dir / "metrics.json", to_json(m));
      std::ofstream csv(dir / "metrics.csv");
      if (!csv) throw IoError("cannot write '" + (dir / "metrics.csv").string() + "'");
      write_metrics_csv(csv, {m.baseline, m.attack, m.mitigated});
      std::cout << (dir / "metrics.json").string() << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
