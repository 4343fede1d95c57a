#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "thermoc/dataset.hpp"
#include "thermoc/detector.hpp"
#include "thermoc/error.hpp"
#include "thermoc/fixed_point.hpp"
#include "thermoc/mesh.hpp"
#include "thermoc/metrics.hpp"
#include "thermoc/response.hpp"
#include "thermoc/thermal.hpp"
#include "thermoc/traffic.hpp"
#include "thermoc/trojan.hpp"

namespace thermoc {

enum class FlitKind : std::uint8_t { Header = 0, Body = 1, Tail = 2 };

struct Flit {
  std::uint64_t packet_seq = 0;
  Cycle inject_cycle = 0;
  RouterId source = 0;
  RouterId destination = 0;
  std::uint8_t flit_seq = 0;
  std::uint8_t hop_count = 0;
  FlitKind kind = FlitKind::Header;
  bool tail = false;  // also set on a single-flit packet's header
};

// Shadow detector: same pipeline settings as the live one, different set and tiers. It only
// scores; it never drives the response.
struct ObserverConfig {
  FeatureSet set = FeatureSet::Set2;
  std::vector<int> sigmas{5};
};

struct WorldConfig {
  MeshDims dims;
  int buffer_depth = 4;
  int flits_per_packet = 8;
  int source_queue_packets = 8;
  std::uint64_t seed = 1;
  Cycle sim_cycles = 200'000;
  TrafficConfig traffic;
  std::vector<TraceEntry> trace;
  ThermalConfig thermal;
  DtmConfig dtm;
  TrojanConfig trojan;
  std::optional<std::uint64_t> trojan_seed;  // overrides `seed` for the attack schedule only
  bool trojans_active = true;  // false keeps the schedule for bookkeeping but never fires it
  DetectorConfig detector;
  ResponseConfig response;
  std::vector<ObserverConfig> observers;
  std::size_t fluct_epoch = 1000;
  Cycle stats_from = 0;  // first cycle counted in the reported-temperature histogram
  bool log_dataset = false;
  bool record_deliveries = false;

  void validate() const {
    dims.validate();
    if (buffer_depth < 1) throw ValidationError("buffer_depth must be at least 1");
    if (flits_per_packet < 1 || flits_per_packet > 255) throw ValidationError("flits_per_packet must be 1..255");
    if (source_queue_packets < 1) throw ValidationError("source_queue_packets must be at least 1");
    if (sim_cycles < 1) throw ValidationError("sim_cycles must be positive");
    if (fluct_epoch < 1) throw ValidationError("fluct_epoch must be positive");
    traffic.validate();
    thermal.validate(dims);
    dtm.validate();
    trojan.validate();
    detector.validate();
    response.validate();
    for (const auto& o : observers)
      for (int s : o.sigmas) check_sigma(s);
  }
};

struct FlitCounters {
  std::uint64_t injected_flits = 0;
  std::uint64_t delivered_flits = 0;
  std::uint64_t dropped_flits = 0;
  std::uint64_t injected_packets = 0;
  std::uint64_t delivered_packets = 0;
  std::uint64_t dropped_packets = 0;
  std::uint64_t refused_packets = 0;  // source queue full
  std::uint64_t routing_events = 0;
  std::uint64_t hop_mismatches = 0;
};

struct Delivery {
  std::uint64_t packet_seq = 0;
  RouterId source = 0;
  RouterId destination = 0;
  int hops = 0;
  Cycle inject_cycle = 0;
  Cycle deliver_cycle = 0;
};

struct SourcePacket {
  std::uint64_t packet_seq = 0;
  RouterId destination = 0;
  Cycle inject_cycle = 0;
  int next_flit = 0;
};

struct Router {
  RouterId id = 0;
  std::uint8_t present = 0;
  std::array<std::deque<Flit>, kPortCount> in;
  std::array<std::int8_t, kPortCount> out_owner{};  // input holding each output, -1 free
  std::array<std::int8_t, kPortCount> in_route{};   // output reserved by each input, -1 none
  std::array<std::uint64_t, kPortCount> in_route_pkt{};
  std::array<std::uint8_t, kPortCount> rr{};
  std::deque<SourcePacket> source_queue;
  ResponseState response;
  bool throttled = false;
  Q88 reported;
  int label = 0;
  int last_source = 0;
  int last_dest = 0;
  int last_hops = 0;
  std::uint32_t activity = 0;         // flits switched in the current thermal step
  std::uint32_t local_injected = 0;   // flits the core pushed in the current thermal step
  std::uint32_t last_local_injected = 0;
  double last_power = 0.0;
};

// Confusion matrices for one shadow detector, one per tier.
struct ObserverScores {
  FeatureSet set = FeatureSet::Set2;
  std::vector<int> sigmas;
  std::vector<Confusion> confusion;
};

class World {
 public:
  explicit World(WorldConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    for (const auto& e : cfg_.trace) {
      if (e.src >= cfg_.dims.routers() || e.dst >= cfg_.dims.routers())
        throw ValidationError("trace entry outside the mesh");
    }
    const int n = cfg_.dims.routers();
    routers_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      Router& r = routers_[static_cast<std::size_t>(i)];
      r.id = static_cast<RouterId>(i);
      r.present = cfg_.dims.present_ports(r.id);
      r.out_owner.fill(-1);
      r.in_route.fill(-1);
    }
    grid_ = ThermalGrid(n, Q88::from_double(cfg_.thermal.t_initial));
    for (auto& r : routers_) {
      r.reported = sensor_clamp(grid_.temps[r.id]);
    }

    traffic_.emplace(cfg_.traffic, cfg_.trace, n, stream_seed(1));
    std::mt19937_64 sched_rng(stream_seed(2, cfg_.trojan_seed.value_or(cfg_.seed)));
    schedule_ = schedule_attacks(cfg_.trojan, cfg_.sim_cycles, cfg_.dims, sched_rng);
    response_rng_.seed(stream_seed(3));
    std::mt19937_64 tile_rng(stream_seed(4));
    idle_power_ = tile_idle_powers(cfg_.thermal, n, tile_rng);
    for (auto& r : routers_) r.last_power = idle_power_[r.id];

    for (int i = 0; i < n; ++i) detectors_.emplace_back(cfg_.detector);
    for (const auto& o : cfg_.observers) {
      DetectorConfig dc = cfg_.detector;
      dc.set = o.set;
      dc.sigma = o.sigmas.empty() ? cfg_.detector.sigma : o.sigmas.front();
      std::vector<int> extra;
      if (o.sigmas.size() > 1) extra.assign(o.sigmas.begin() + 1, o.sigmas.end());
      std::vector<RouterDetector> bank;
      for (int i = 0; i < n; ++i) bank.emplace_back(dc, extra);
      observer_banks_.push_back(std::move(bank));
      ObserverScores sc;
      sc.set = o.set;
      sc.sigmas.push_back(dc.sigma);
      sc.sigmas.insert(sc.sigmas.end(), extra.begin(), extra.end());
      sc.confusion.resize(sc.sigmas.size());
      observer_scores_.push_back(std::move(sc));
    }

    epoch_min_rep_.assign(static_cast<std::size_t>(n), std::numeric_limits<std::uint16_t>::max());
    epoch_max_rep_.assign(static_cast<std::size_t>(n), 0);
    epoch_min_true_ = epoch_min_rep_;
    epoch_max_true_ = epoch_max_rep_;
    fluct_reported_.resize(static_cast<std::size_t>(n));
    fluct_true_.resize(static_cast<std::size_t>(n));
    last_level_.assign(static_cast<std::size_t>(n), 0);
    last_mode_.assign(static_cast<std::size_t>(n), Mode::Normal);
    congestion_.assign(static_cast<std::size_t>(n), 0.0);
    reported_hist_.assign(std::size_t{1} << 16, 0);
  }

  const WorldConfig& config() const { return cfg_; }
  Cycle cycle() const { return cycle_; }
  bool finished() const { return cycle_ >= cfg_.sim_cycles; }

  void run() {
    while (!finished()) step();
  }

  void run_until(Cycle c) {
    while (cycle_ < c && !finished()) step();
  }

  // Advances one cycle: traffic, switching, thermal, sensors, detectors, response, logging.
  void step() {
    const Cycle c = cycle_;
    generate_traffic(c);
    switch_flits(c);
    inject_from_sources();
    if ((c + 1) % static_cast<Cycle>(cfg_.thermal.step_cycles) == 0) thermal_step();
    read_sensors(c);
    detect_and_respond(c);
    log_cycle(c);
    ++cycle_;
  }

  // Queues a packet at its source, as the traffic generator would. False if the queue is full.
  bool inject_packet(RouterId src, RouterId dst) {
    if (src >= routers_.size() || dst >= routers_.size() || src == dst)
      throw ContractViolation("inject_packet needs two distinct routers in the mesh");
    Router& r = routers_[src];
    if (r.source_queue.size() >= static_cast<std::size_t>(cfg_.source_queue_packets)) {
      ++counters_.refused_packets;
      return false;
    }
    r.source_queue.push_back(SourcePacket{next_packet_++, dst, cycle_, 0});
    ++counters_.injected_packets;
    counters_.injected_flits += static_cast<std::uint64_t>(cfg_.flits_per_packet);
    return true;
  }

  // Forces a router's closed-port set, with the same drop semantics as a response action.
  void set_closed_ports(RouterId id, std::uint8_t mask) {
    Router& r = routers_.at(id);
    const std::uint8_t next = mask & r.present;
    const std::uint8_t newly = next & static_cast<std::uint8_t>(~r.response.closed_ports);
    r.response.closed_ports = next;
    close_ports(r, newly);
  }

  // Occupied share of the directional input buffers; the core's local buffer is not counted.
  double congestion_of(RouterId id) const {
    const Router& r = routers_.at(id);
    std::size_t used = 0;
    for (int p = 0; p < kDirectionalPorts; ++p) used += r.in[static_cast<std::size_t>(p)].size();
    return congestion_percent(used, std::popcount(r.present), cfg_.buffer_depth);
  }

  static double congestion_percent(std::size_t used, int ports, int depth) {
    const auto slots = static_cast<std::size_t>(ports) * static_cast<std::size_t>(depth);
    if (slots == 0) return 0.0;
    return std::clamp(100.0 * static_cast<double>(used) / static_cast<double>(slots), 0.0, 100.0);
  }

  std::uint64_t flits_in_flight() const {
    std::uint64_t n = 0;
    for (const auto& r : routers_) {
      for (const auto& q : r.in) n += q.size();
      for (const auto& p : r.source_queue) n += static_cast<std::uint64_t>(cfg_.flits_per_packet - p.next_flit);
    }
    return n;
  }

  bool conserved() const {
    return counters_.injected_flits == counters_.delivered_flits + counters_.dropped_flits + flits_in_flight();
  }

  const FlitCounters& counters() const { return counters_; }
  const std::vector<Router>& routers() const { return routers_; }
  const Router& router(RouterId id) const { return routers_.at(id); }
  const ThermalGrid& grid() const { return grid_; }
  const AttackSchedule& schedule() const { return schedule_; }
  const RouterDetector& detector(RouterId id) const { return detectors_.at(id); }
  const Confusion& confusion() const { return confusion_; }
  const std::vector<ObserverScores>& observer_scores() const { return observer_scores_; }
  const std::vector<ResponseEvent>& response_events() const { return events_; }
  const std::vector<Delivery>& deliveries() const { return deliveries_; }
  const std::vector<FeatureVector>& dataset() const { return rows_; }
  // Per router, peak-to-trough of each completed epoch.
  const std::vector<std::vector<float>>& epoch_fluct_reported() const { return fluct_reported_; }
  const std::vector<std::vector<float>>& epoch_fluct_true() const { return fluct_true_; }
  // Count of (router, cycle) reported readings per raw Q8.8 value, from stats_from on.
  const std::vector<std::uint64_t>& reported_histogram() const { return reported_hist_; }

  // Independent RNG streams: 1 traffic, 2 attack schedule, 3 response, 4 tile idle power.
  static std::uint64_t stream_seed(std::uint64_t stream, std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (std::uint64_t{out[0]} << 32) | out[1];
  }

 private:
  std::uint64_t stream_seed(std::uint64_t stream) const { return stream_seed(stream, cfg_.seed); }

  bool link_usable(const Router& r, int port) const {
    if (!(r.present & (1u << port)) || (r.response.closed_ports & (1u << port))) return false;
    const auto n = cfg_.dims.neighbor(r.id, port_from_index(port));
    const int back = port_index(opposite(port_from_index(port)));
    return !(routers_[*n].response.closed_ports & (1u << back));
  }

  // Dimension-order port when usable, else the first usable minimal port; nullopt means drop.
  std::optional<int> choose_output(const Router& r, const Flit& f) const {
    if (f.destination == r.id) return port_index(Port::Local);
    for (Port p : minimal_ports(cfg_.dims.coord_of(r.id), cfg_.dims.coord_of(f.destination))) {
      if (link_usable(r, port_index(p))) return port_index(p);
    }
    return std::nullopt;
  }

  void generate_traffic(Cycle c) {
    for (const auto& inj : traffic_->next(c)) inject_packet(inj.src, inj.dst);
  }

  struct Move {
    RouterId router;
    std::int8_t in;
    std::int8_t out;
  };

  // Decisions read start-of-cycle occupancy only, so a flit moves at most one hop per cycle
  // and a slot freed this cycle is not reused until the next.
  void switch_flits(Cycle c) {
    moves_.clear();
    drops_.clear();
    const auto local = static_cast<std::size_t>(port_index(Port::Local));
    const auto depth = static_cast<std::size_t>(cfg_.buffer_depth);
    for (auto& r : routers_) {
      congestion_[r.id] = congestion_of(r.id);
      std::array<std::int8_t, kPortCount> want;
      want.fill(-1);
      for (std::size_t i = 0; i < kPortCount; ++i) {
        if (r.in[i].empty()) continue;
        if (r.in_route[i] >= 0) {
          want[i] = r.in_route[i];
          continue;
        }
        const Flit& head = r.in[i].front();
        const auto o = choose_output(r, head);
        if (!o) {
          drops_.push_back(head.packet_seq);
          continue;
        }
        want[i] = static_cast<std::int8_t>(*o);
      }
      for (std::size_t o = 0; o < kPortCount; ++o) {
        int sel = -1;
        const int owner = r.out_owner[o];
        if (owner >= 0) {
          if (want[static_cast<std::size_t>(owner)] == static_cast<int>(o)) sel = owner;
        } else {
          for (std::size_t k = 0; k < kPortCount; ++k) {
            const std::size_t i = (r.rr[o] + k) % kPortCount;
            if (want[i] == static_cast<int>(o) && r.in_route[i] < 0) {
              sel = static_cast<int>(i);
              break;
            }
          }
          if (sel >= 0) {
            const auto s = static_cast<std::size_t>(sel);
            r.out_owner[o] = static_cast<std::int8_t>(sel);
            r.in_route[s] = static_cast<std::int8_t>(o);
            r.in_route_pkt[s] = r.in[s].front().packet_seq;
            r.rr[o] = static_cast<std::uint8_t>((s + 1) % kPortCount);
          }
        }
        if (sel < 0) continue;
        if (o != local) {
          const auto n = cfg_.dims.neighbor(r.id, port_from_index(static_cast<int>(o)));
          const auto back = static_cast<std::size_t>(port_index(opposite(port_from_index(static_cast<int>(o)))));
          if (routers_[*n].in[back].size() >= depth) continue;
        }
        moves_.push_back(Move{r.id, static_cast<std::int8_t>(sel), static_cast<std::int8_t>(o)});
      }
    }

    for (const Move& m : moves_) {
      Router& r = routers_[m.router];
      const auto i = static_cast<std::size_t>(m.in);
      const auto o = static_cast<std::size_t>(m.out);
      Flit f = r.in[i].front();
      r.in[i].pop_front();
      ++r.activity;
      ++counters_.routing_events;
      r.last_source = f.source;
      r.last_dest = f.destination;
      r.last_hops = f.hop_count;
      if (cfg_.log_dataset) record_event(r, f, static_cast<int>(i), static_cast<int>(o), c);
      if (f.tail) {
        r.out_owner[o] = -1;
        r.in_route[i] = -1;
      }
      if (o == local) {
        deliver(f, c);
        continue;
      }
      ++f.hop_count;
      const auto n = cfg_.dims.neighbor(r.id, port_from_index(static_cast<int>(o)));
      routers_[*n].in[static_cast<std::size_t>(port_index(opposite(port_from_index(static_cast<int>(o)))))].push_back(f);
    }

    std::sort(drops_.begin(), drops_.end());
    drops_.erase(std::unique(drops_.begin(), drops_.end()), drops_.end());
    for (auto p : drops_) purge(p);
  }

  void deliver(const Flit& f, Cycle c) {
    ++counters_.delivered_flits;
    const int expect = manhattan(cfg_.dims.coord_of(f.source), cfg_.dims.coord_of(f.destination));
    if (f.hop_count != expect) ++counters_.hop_mismatches;
    if (!f.tail) return;
    ++counters_.delivered_packets;
    if (cfg_.record_deliveries)
      deliveries_.push_back(Delivery{f.packet_seq, f.source, f.destination, f.hop_count, f.inject_cycle, c});
  }

  // Removes every remaining flit of a packet and releases the outputs it holds.
  void purge(std::uint64_t packet) {
    std::uint64_t removed = 0;
    bool held = false;
    for (auto& r : routers_) {
      for (std::size_t i = 0; i < kPortCount; ++i) {
        auto& q = r.in[i];
        const auto before = q.size();
        q.erase(std::remove_if(q.begin(), q.end(), [&](const Flit& f) { return f.packet_seq == packet; }), q.end());
        removed += before - q.size();
        if (r.in_route[i] >= 0 && r.in_route_pkt[i] == packet) {
          r.out_owner[static_cast<std::size_t>(r.in_route[i])] = -1;
          r.in_route[i] = -1;
          held = true;
        }
      }
      auto& sq = r.source_queue;
      for (auto it = sq.begin(); it != sq.end();) {
        if (it->packet_seq == packet) {
          removed += static_cast<std::uint64_t>(cfg_.flits_per_packet - it->next_flit);
          it = sq.erase(it);
        } else {
          ++it;
        }
      }
    }
    if (removed == 0 && !held) return;
    counters_.dropped_flits += removed;
    ++counters_.dropped_packets;
  }

  // Power-gates ports: anything buffered behind them or holding the links they serve is lost.
  void close_ports(Router& r, std::uint8_t newly_closed) {
    std::vector<std::uint64_t> victims;
    for (int p = 0; p < kDirectionalPorts; ++p) {
      if (!(newly_closed & (1u << p))) continue;
      const auto pi = static_cast<std::size_t>(p);
      for (const auto& f : r.in[pi]) victims.push_back(f.packet_seq);
      if (const int owner = r.out_owner[pi]; owner >= 0) victims.push_back(r.in_route_pkt[static_cast<std::size_t>(owner)]);
      const auto n = cfg_.dims.neighbor(r.id, port_from_index(p));
      if (!n) continue;
      const Router& nr = routers_[*n];
      const auto back = static_cast<std::size_t>(port_index(opposite(port_from_index(p))));
      if (const int owner = nr.out_owner[back]; owner >= 0) victims.push_back(nr.in_route_pkt[static_cast<std::size_t>(owner)]);
    }
    std::sort(victims.begin(), victims.end());
    victims.erase(std::unique(victims.begin(), victims.end()), victims.end());
    for (auto v : victims) purge(v);
  }

  void inject_from_sources() {
    const auto local = static_cast<std::size_t>(port_index(Port::Local));
    for (auto& r : routers_) {
      if (r.source_queue.empty() || r.in[local].size() >= static_cast<std::size_t>(cfg_.buffer_depth)) continue;
      SourcePacket& p = r.source_queue.front();
      Flit f;
      f.packet_seq = p.packet_seq;
      f.inject_cycle = p.inject_cycle;
      f.source = r.id;
      f.destination = p.destination;
      f.flit_seq = static_cast<std::uint8_t>(p.next_flit);
      f.tail = p.next_flit == cfg_.flits_per_packet - 1;
      f.kind = p.next_flit == 0 ? FlitKind::Header : (f.tail ? FlitKind::Tail : FlitKind::Body);
      r.in[local].push_back(f);
      ++r.local_injected;
      if (++p.next_flit == cfg_.flits_per_packet) r.source_queue.pop_front();
    }
  }

  void thermal_step() {
    for (auto& r : routers_) {
      r.throttled = dtm_update(cfg_.dtm, r.throttled, r.reported);
      const double scale = r.throttled ? cfg_.dtm.power_scale : 1.0;
      r.last_power = tile_power(idle_power_[r.id], cfg_.thermal.p_per_flit, r.activity) * scale;
      grid_.powers[r.id] = r.last_power;
      r.last_local_injected = r.local_injected;
      r.activity = 0;
      r.local_injected = 0;
    }
    grid_ = step_thermal(grid_, cfg_.thermal, cfg_.dims);
  }

  void read_sensors(Cycle c) {
    if (cfg_.trojans_active) schedule_.begin_cycle(c);
    const bool count = c >= cfg_.stats_from;
    const bool epoch_end = (c + 1) % cfg_.fluct_epoch == 0;
    for (auto& r : routers_) {
      const Q88 real = grid_.temps[r.id];
      if (cfg_.trojans_active) {
        r.label = schedule_.live_label(r.id);
        r.reported = schedule_.report(r.id, real, c);
      } else {
        r.label = 0;
        r.reported = sensor_clamp(real);
      }
      if (count) ++reported_hist_[r.reported.raw()];
      const auto i = static_cast<std::size_t>(r.id);
      epoch_min_rep_[i] = std::min(epoch_min_rep_[i], r.reported.raw());
      epoch_max_rep_[i] = std::max(epoch_max_rep_[i], r.reported.raw());
      epoch_min_true_[i] = std::min(epoch_min_true_[i], real.raw());
      epoch_max_true_[i] = std::max(epoch_max_true_[i], real.raw());
      if (epoch_end) {
        fluct_reported_[i].push_back(static_cast<float>(epoch_max_rep_[i] - epoch_min_rep_[i]) / Q88::kOne);
        fluct_true_[i].push_back(static_cast<float>(epoch_max_true_[i] - epoch_min_true_[i]) / Q88::kOne);
        epoch_min_rep_[i] = epoch_min_true_[i] = std::numeric_limits<std::uint16_t>::max();
        epoch_max_rep_[i] = epoch_max_true_[i] = 0;
      }
    }
  }

  void detect_and_respond(Cycle c) {
    for (auto& r : routers_) {
      FeatureSample s;
      s.cycle = c;
      s.reported_temp = r.reported;
      s.congestion = congestion_[r.id];
      s.packet_source = r.last_source;
      s.packet_dest = r.last_dest;
      s.current_router = r.id;
      s.hop_count = r.last_hops;

      const Evaluation& e = detectors_[r.id].evaluate(s);
      if (e.warm) confusion_.add(r.label, e.predicted_class);
      for (std::size_t b = 0; b < observer_banks_.size(); ++b) {
        RouterDetector& d = observer_banks_[b][r.id];
        d.evaluate(s);
        for (std::size_t t = 0; t < d.tiers(); ++t) {
          const Evaluation& te = d.evaluation(t);
          if (te.warm) observer_scores_[b].confusion[t].add(r.label, te.predicted_class);
        }
      }

      if (!cfg_.response.enabled) continue;
      int level = e.warm ? e.reg.level : 0;
      if (level > 0 && cfg_.response.force_level > 0) level = cfg_.response.force_level;
      const std::uint8_t before = r.response.closed_ports;
      r.response = step_response(r.response, level, r.present, cfg_.response.hysteresis, response_rng_);
      const std::uint8_t newly = r.response.closed_ports & static_cast<std::uint8_t>(~before);
      if (newly) close_ports(r, newly);
      const auto i = static_cast<std::size_t>(r.id);
      if (level != last_level_[i] || r.response.mode != last_mode_[i]) {
        events_.push_back(ResponseEvent{c, r.id, level, r.response.mode});
        last_level_[i] = level;
        last_mode_[i] = r.response.mode;
      }
    }
  }

  void record_event(const Router& r, const Flit& f, int in, int out, Cycle c) {
    FeatureVector v;
    v.event_cycle = c;
    v.packet_source = f.source;
    v.packet_dest = f.destination;
    v.current_router = r.id;
    v.flit_type = static_cast<int>(f.kind);
    v.hop_count = f.hop_count;
    v.flit_seq = f.flit_seq;
    v.packet_seq = f.packet_seq;
    v.recv_port = in;
    v.depart_port = out;
    v.congestion = Q88::from_double(congestion_[r.id]);
    pending_.push_back(v);
  }

  // Sensor, detector and label columns are only known once the cycle's readings are taken.
  void log_cycle(Cycle) {
    if (pending_.empty()) return;
    for (auto& v : pending_) {
      const Router& r = routers_[static_cast<std::size_t>(v.current_router)];
      const RouterDetector& d = detectors_[r.id];
      v.core_power = Q88::from_double(r.last_power);
      const double core = grid_.temps[r.id].to_double() + cfg_.thermal.core_gain * r.last_local_injected;
      v.core_temp = Q88::from_double(std::min(core, kMaxTileTemp));
      v.core_util = Q88::from_double(100.0 * static_cast<double>(r.source_queue.size()) / cfg_.source_queue_packets);
      v.core_freq = r.throttled ? cfg_.dtm.throttled_mhz : cfg_.dtm.nominal_mhz;
      v.router_temp = r.reported;
      v.temp_2cycle_avg = derive_feature(FeatureId::F17, d.temperature_log(), d.temperature_wma()).value_or(r.reported);
      v.temp_running_avg = d.running_average();
      v.label = r.label;
    }
    std::sort(pending_.begin(), pending_.end(), row_order);
    rows_.insert(rows_.end(), pending_.begin(), pending_.end());
    pending_.clear();
  }

  WorldConfig cfg_;
  Cycle cycle_ = 0;
  std::uint64_t next_packet_ = 0;
  std::vector<Router> routers_;
  ThermalGrid grid_;
  std::optional<TrafficSource> traffic_;
  AttackSchedule schedule_;
  std::mt19937_64 response_rng_;
  std::vector<double> idle_power_;
  std::vector<RouterDetector> detectors_;
  std::vector<std::vector<RouterDetector>> observer_banks_;
  std::vector<ObserverScores> observer_scores_;
  Confusion confusion_;
  FlitCounters counters_;
  std::vector<Move> moves_;
  std::vector<std::uint64_t> drops_;
  std::vector<double> congestion_;
  std::vector<Delivery> deliveries_;
  std::vector<FeatureVector> pending_;
  std::vector<FeatureVector> rows_;
  std::vector<ResponseEvent> events_;
  std::vector<int> last_level_;
  std::vector<Mode> last_mode_;
  std::vector<std::uint16_t> epoch_min_rep_, epoch_max_rep_, epoch_min_true_, epoch_max_true_;
  std::vector<std::vector<float>> fluct_reported_, fluct_true_;
  std::vector<std::uint64_t> reported_hist_;
};

}  // namespace thermoc
