#pragma once

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "thermoc/error.hpp"
#include "thermoc/world.hpp"

namespace thermoc {

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& prefix, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) throw ConfigError(prefix + k, "unknown key");
  }
}

template <class T>
void read(const json& obj, const std::string& prefix, const char* key, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception&) {
    throw ConfigError(prefix + key, "wrong type");
  }
}

inline const json& section(const json& root, const char* key) {
  static const json empty = json::object();
  const auto it = root.find(key);
  if (it == root.end()) return empty;
  if (!it->is_object()) throw ConfigError(key, "must be an object");
  return *it;
}

inline TrafficMode traffic_mode(const std::string& s) {
  if (s == "uniform") return TrafficMode::Uniform;
  if (s == "trace") return TrafficMode::Trace;
  if (s == "mixed") return TrafficMode::Mixed;
  throw ConfigError("traffic.mode", "expected uniform, trace or mixed");
}

inline BehaviorMix behavior_mix(const std::string& s) {
  if (s == "alternate") return BehaviorMix::Alternate;
  if (s == "b1") return BehaviorMix::OnlyB1;
  if (s == "b2") return BehaviorMix::OnlyB2;
  throw ConfigError("trojan.mix", "expected alternate, b1 or b2");
}

}  // namespace detail

// Applies a JSON document on top of `cfg`. Every key is optional; unknown keys are errors.
inline void apply_json(WorldConfig& cfg, const nlohmann::json& root) {
  using detail::read;
  if (!root.is_object()) throw ConfigError("<root>", "must be an object");
  detail::reject_unknown(root, "",
                         {"dims", "buffer_depth", "flits_per_packet", "source_queue_packets", "pir", "sim_cycles", "seed",
                          "fluct_epoch", "traffic", "thermal", "dtm", "trojan", "detector", "response"});

  if (const auto it = root.find("dims"); it != root.end()) {
    if (!it->is_array() || it->size() != 3) throw ConfigError("dims", "expected [x, y, z]");
    try {
      cfg.dims = MeshDims{(*it)[0].get<int>(), (*it)[1].get<int>(), (*it)[2].get<int>()};
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("dims", "expected three integers");
    }
  }
  read(root, "", "buffer_depth", cfg.buffer_depth);
  read(root, "", "flits_per_packet", cfg.flits_per_packet);
  read(root, "", "source_queue_packets", cfg.source_queue_packets);
  read(root, "", "pir", cfg.traffic.pir);
  read(root, "", "sim_cycles", cfg.sim_cycles);
  read(root, "", "seed", cfg.seed);
  read(root, "", "fluct_epoch", cfg.fluct_epoch);

  const auto& tr = detail::section(root, "traffic");
  detail::reject_unknown(tr, "traffic.", {"mode", "pir", "trace_path"});
  if (tr.contains("mode")) {
    std::string m;
    read(tr, "traffic.", "mode", m);
    cfg.traffic.mode = detail::traffic_mode(m);
  }
  read(tr, "traffic.", "pir", cfg.traffic.pir);
  read(tr, "traffic.", "trace_path", cfg.traffic.trace_path);

  const auto& th = detail::section(root, "thermal");
  detail::reject_unknown(th, "thermal.", {"t_ambient", "t_initial", "alpha", "beta", "gamma", "p_idle", "p_per_flit",
                                          "step_cycles", "core_gain", "idle_spread"});
  read(th, "thermal.", "t_ambient", cfg.thermal.t_ambient);
  read(th, "thermal.", "t_initial", cfg.thermal.t_initial);
  read(th, "thermal.", "alpha", cfg.thermal.alpha);
  read(th, "thermal.", "beta", cfg.thermal.beta);
  read(th, "thermal.", "gamma", cfg.thermal.gamma);
  read(th, "thermal.", "p_idle", cfg.thermal.p_idle);
  read(th, "thermal.", "p_per_flit", cfg.thermal.p_per_flit);
  read(th, "thermal.", "step_cycles", cfg.thermal.step_cycles);
  read(th, "thermal.", "core_gain", cfg.thermal.core_gain);
  read(th, "thermal.", "idle_spread", cfg.thermal.idle_spread);

  const auto& dt = detail::section(root, "dtm");
  detail::reject_unknown(dt, "dtm.", {"enabled", "t_high", "t_low", "power_scale", "nominal_mhz", "throttled_mhz"});
  read(dt, "dtm.", "enabled", cfg.dtm.enabled);
  read(dt, "dtm.", "t_high", cfg.dtm.t_high);
  read(dt, "dtm.", "t_low", cfg.dtm.t_low);
  read(dt, "dtm.", "power_scale", cfg.dtm.power_scale);
  read(dt, "dtm.", "nominal_mhz", cfg.dtm.nominal_mhz);
  read(dt, "dtm.", "throttled_mhz", cfg.dtm.throttled_mhz);

  const auto& tj = detail::section(root, "trojan");
  detail::reject_unknown(tj, "trojan.", {"count", "mix", "delta", "credit_budget", "seed"});
  read(tj, "trojan.", "count", cfg.trojan.count);
  if (tj.contains("mix")) {
    std::string m;
    read(tj, "trojan.", "mix", m);
    cfg.trojan.mix = detail::behavior_mix(m);
  }
  read(tj, "trojan.", "delta", cfg.trojan.delta);
  read(tj, "trojan.", "credit_budget", cfg.trojan.credit_budget);
  if (tj.contains("seed")) {
    std::uint64_t s = 0;
    read(tj, "trojan.", "seed", s);
    cfg.trojan_seed = s;
  }

  const auto& de = detail::section(root, "detector");
  detail::reject_unknown(de, "detector.", {"feature_set", "sigma_index", "t1", "t2", "window", "warmup", "wma_period",
                                           "sticky_hold"});
  if (de.contains("feature_set")) {
    int s = 0;
    read(de, "detector.", "feature_set", s);
    if (s < 1 || s > 5) throw ConfigError("detector.feature_set", "must be 1..5");
    cfg.detector.set = static_cast<FeatureSet>(s);
  }
  read(de, "detector.", "sigma_index", cfg.detector.sigma);
  read(de, "detector.", "t1", cfg.detector.t1);
  read(de, "detector.", "t2", cfg.detector.t2);
  read(de, "detector.", "window", cfg.detector.window);
  read(de, "detector.", "warmup", cfg.detector.warmup);
  read(de, "detector.", "wma_period", cfg.detector.wma_period);
  read(de, "detector.", "sticky_hold", cfg.detector.sticky_hold);

  const auto& re = detail::section(root, "response");
  detail::reject_unknown(re, "response.", {"enabled", "hysteresis", "force_level"});
  read(re, "response.", "enabled", cfg.response.enabled);
  read(re, "response.", "hysteresis", cfg.response.hysteresis);
  read(re, "response.", "force_level", cfg.response.force_level);
}

// Runs the semantic checks and maps each failure to the key that caused it.
inline void validate_config(const WorldConfig& cfg) {
  auto check = [](const char* key, auto&& fn) {
    try {
      fn();
    } catch (const ValidationError& e) {
      throw ConfigError(key, e.what());
    } catch (const ContractViolation& e) {
      throw ConfigError(key, e.what());
    }
  };
  check("dims", [&] { cfg.dims.validate(); });
  check("buffer_depth", [&] {
    if (cfg.buffer_depth < 1) throw ValidationError("must be at least 1");
  });
  check("flits_per_packet", [&] {
    if (cfg.flits_per_packet < 1 || cfg.flits_per_packet > 255) throw ValidationError("must be 1..255");
  });
  check("source_queue_packets", [&] {
    if (cfg.source_queue_packets < 1) throw ValidationError("must be at least 1");
  });
  check("sim_cycles", [&] {
    if (cfg.sim_cycles < 1) throw ValidationError("must be positive");
  });
  check("fluct_epoch", [&] {
    if (cfg.fluct_epoch < 1) throw ValidationError("must be positive");
  });
  check("pir", [&] {
    if (!(cfg.traffic.pir >= 0.0 && cfg.traffic.pir <= 1.0)) throw ValidationError("must lie in [0,1]");
  });
  check("traffic", [&] { cfg.traffic.validate(); });
  check("thermal", [&] { cfg.thermal.validate(cfg.dims); });
  check("dtm", [&] { cfg.dtm.validate(); });
  check("trojan", [&] { cfg.trojan.validate(); });
  check("detector", [&] { cfg.detector.validate(); });
  check("response", [&] { cfg.response.validate(); });
  check("observers", [&] { cfg.validate(); });
}

inline WorldConfig load_config(const std::string& path, WorldConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  apply_json(base, doc);
  return base;
}

// Loads the trace named by the traffic section, if the mode needs one.
inline void resolve_trace(WorldConfig& cfg) {
  if (cfg.traffic.mode == TrafficMode::Uniform) return;
  if (cfg.traffic.trace_path.empty()) throw ConfigError("traffic.trace_path", "required for trace and mixed modes");
  try {
    cfg.trace = load_trace(cfg.traffic.trace_path, cfg.dims.routers());
  } catch (const ParseError& e) {
    throw ConfigError("traffic.trace_path", e.what());
  } catch (const ValidationError& e) {
    throw ConfigError("traffic.trace_path", e.what());
  } catch (const IoError& e) {
    throw ConfigError("traffic.trace_path", e.what());
  }
}

}  // namespace thermoc
