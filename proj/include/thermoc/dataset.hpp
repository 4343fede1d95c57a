#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "thermoc/error.hpp"
#include "thermoc/fixed_point.hpp"
#include "thermoc/mesh.hpp"

namespace thermoc {

// One Table 1 row, logged per flit-routing event. Real-valued columns are stored in Q8.8
// so the CSV's three fraction digits reproduce them exactly.
struct FeatureVector {
  Cycle event_cycle = 0;        // F1
  Q88 core_power;               // F2, W
  Q88 core_temp;                // F3, degC
  Q88 core_util;                // F4, %
  int core_freq = 3600;         // F5, MHz
  int packet_source = 0;        // F6
  int packet_dest = 0;          // F7
  int current_router = 0;       // F8
  int flit_type = 0;            // F9: 0 header, 1 body, 2 tail
  int hop_count = 0;            // F10
  int flit_seq = 0;             // F11
  std::uint64_t packet_seq = 0; // F12
  int recv_port = 0;            // F13
  int depart_port = 0;          // F14
  Q88 congestion;               // F15, %
  Q88 router_temp;              // F16, reported
  Q88 temp_2cycle_avg;          // F17
  Q88 temp_running_avg;         // F18
  int label = 0;                // F19

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline constexpr int kFeatureColumns = 19;

inline const std::string& csv_header() {
  static const std::string h = "F1,F2,F3,F4,F5,F6,F7,F8,F9,F10,F11,F12,F13,F14,F15,F16,F17,F18,F19";
  return h;
}

// Export order: cycle, router, packet, flit.
inline bool row_order(const FeatureVector& a, const FeatureVector& b) {
  return std::tie(a.event_cycle, a.current_router, a.packet_seq, a.flit_seq) <
         std::tie(b.event_cycle, b.current_router, b.packet_seq, b.flit_seq);
}

// Names the first column outside its Table 1 range, if any.
inline std::optional<std::string> range_violation(const FeatureVector& r) {
  auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  if (r.event_cycle > 5'000'000) return "F1";
  if (!in(r.core_power.to_double(), 0, 3)) return "F2";
  if (!in(r.core_temp.to_double(), 0, 99)) return "F3";
  if (!in(r.core_util.to_double(), 0, 100)) return "F4";
  if (!in(r.core_freq, 0, 3600)) return "F5";
  if (!in(r.packet_source, 0, 256)) return "F6";
  if (!in(r.packet_dest, 0, 256)) return "F7";
  if (!in(r.current_router, 0, 256)) return "F8";
  if (!in(r.flit_type, 0, 2)) return "F9";
  if (!in(r.hop_count, 0, 14)) return "F10";
  if (!in(r.flit_seq, 0, 8)) return "F11";
  if (!in(r.recv_port, 0, 6)) return "F13";
  if (!in(r.depart_port, 0, 6)) return "F14";
  if (!in(r.congestion.to_double(), 0, 100)) return "F15";
  if (!in(r.router_temp.to_double(), 0, 90)) return "F16";
  if (!in(r.temp_2cycle_avg.to_double(), 0, 90)) return "F17";
  if (!in(r.temp_running_avg.to_double(), 0, 90)) return "F18";
  if (!in(r.label, 0, 2)) return "F19";
  return std::nullopt;
}

inline void write_csv(std::ostream& out, std::span<const FeatureVector> rows) {
  out << csv_header() << '\n';
  for (const auto& r : rows) {
    out << r.event_cycle << ',' << to_decimal3(r.core_power) << ',' << to_decimal3(r.core_temp) << ','
        << to_decimal3(r.core_util) << ',' << r.core_freq << ',' << r.packet_source << ',' << r.packet_dest << ','
        << r.current_router << ',' << r.flit_type << ',' << r.hop_count << ',' << r.flit_seq << ','
        << r.packet_seq << ',' << r.recv_port << ',' << r.depart_port << ',' << to_decimal3(r.congestion) << ','
        << to_decimal3(r.router_temp) << ',' << to_decimal3(r.temp_2cycle_avg) << ','
        << to_decimal3(r.temp_running_avg) << ',' << r.label << '\n';
  }
}

inline std::size_t export_csv(std::span<const FeatureVector> rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset '" + path + "'");
  write_csv(out, rows);
  out.flush();
  if (!out) throw IoError("failed writing dataset '" + path + "'");
  return rows.size();
}

inline std::vector<FeatureVector> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) throw ParseError(1, "header must be exactly " + csv_header());
  std::vector<FeatureVector> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != kFeatureColumns) throw ParseError(lineno, "expected 19 columns, got " + std::to_string(cells.size()));
    try {
      auto q = [](const std::string& s) { return Q88::from_double(std::stod(s)); };
      auto i = [](const std::string& s) { return std::stoi(s); };
      FeatureVector r;
      r.event_cycle = std::stoull(cells[0]);
      r.core_power = q(cells[1]);
      r.core_temp = q(cells[2]);
      r.core_util = q(cells[3]);
      r.core_freq = i(cells[4]);
      r.packet_source = i(cells[5]);
      r.packet_dest = i(cells[6]);
      r.current_router = i(cells[7]);
      r.flit_type = i(cells[8]);
      r.hop_count = i(cells[9]);
      r.flit_seq = i(cells[10]);
      r.packet_seq = std::stoull(cells[11]);
      r.recv_port = i(cells[12]);
      r.depart_port = i(cells[13]);
      r.congestion = q(cells[14]);
      r.router_temp = q(cells[15]);
      r.temp_2cycle_avg = q(cells[16]);
      r.temp_running_avg = q(cells[17]);
      r.label = i(cells[18]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ParseError(lineno, "non-numeric cell");
    }
  }
  return rows;
}

}  // namespace thermoc
