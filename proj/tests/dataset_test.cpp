#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "thermoc/dataset.hpp"

using namespace thermoc;

namespace {

FeatureVector random_row(std::mt19937_64& rng) {
  auto q = [&](double hi) { return Q88::from_raw(std::uniform_int_distribution<int>(0, int(hi * 256))(rng)); };
  auto i = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  FeatureVector r;
  r.event_cycle = static_cast<Cycle>(i(0, 5'000'000));
  r.core_power = q(3);
  r.core_temp = q(99);
  r.core_util = q(100);
  r.core_freq = i(0, 1) ? 3600 : 1800;
  r.packet_source = i(0, 63);
  r.packet_dest = i(0, 63);
  r.current_router = i(0, 63);
  r.flit_type = i(0, 2);
  r.hop_count = i(0, 14);
  r.flit_seq = i(0, 7);
  r.packet_seq = static_cast<std::uint64_t>(i(0, 1'000'000));
  r.recv_port = i(0, 6);
  r.depart_port = i(0, 6);
  r.congestion = q(100);
  r.router_temp = q(90);
  r.temp_2cycle_avg = q(90);
  r.temp_running_avg = q(90);
  r.label = i(0, 2);
  return r;
}

}  // namespace

TEST(Dataset, HeaderExact) {
  EXPECT_EQ(csv_header(), "F1,F2,F3,F4,F5,F6,F7,F8,F9,F10,F11,F12,F13,F14,F15,F16,F17,F18,F19");
}

TEST(Dataset, EmptyExportIsHeaderOnly) {
  const auto path = (std::filesystem::temp_directory_path() / "thermoc_empty.csv").string();
  EXPECT_EQ(export_csv({}, path), 0u);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), csv_header() + "\n");
  std::remove(path.c_str());
}

TEST(Dataset, UnwritablePathIsIoError) {
  EXPECT_THROW(export_csv({}, "/nonexistent-dir/x.csv"), IoError);
}

TEST(Dataset, RoundTripIsLossless) {
  std::mt19937_64 rng(5);
  std::vector<FeatureVector> rows;
  for (int i = 0; i < 2000; ++i) rows.push_back(random_row(rng));
  std::stringstream ss;
  write_csv(ss, rows);
  EXPECT_EQ(parse_csv(ss), rows);
}

TEST(Dataset, DecimalsHaveThreeDigits) {
  FeatureVector r;
  r.router_temp = Q88::from_double(57.5);
  std::stringstream ss;
  write_csv(ss, std::vector<FeatureVector>{r});
  std::string header, line;
  std::getline(ss, header);
  std::getline(ss, line);
  EXPECT_EQ(line, "0,0.000,0.000,0.000,3600,0,0,0,0,0,0,0,0,0,0.000,57.500,0.000,0.000,0");
}

TEST(Dataset, RangeViolations) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 500; ++i) ASSERT_FALSE(range_violation(random_row(rng)));
  FeatureVector r;
  r.router_temp = Q88::from_int(91);
  EXPECT_EQ(range_violation(r), "F16");
  r = {};
  r.hop_count = 15;
  EXPECT_EQ(range_violation(r), "F10");
  r = {};
  r.label = 3;
  EXPECT_EQ(range_violation(r), "F19");
  r = {};
  r.core_power = Q88::from_double(3.5);
  EXPECT_EQ(range_violation(r), "F2");
}

TEST(Dataset, ParseErrors) {
  std::istringstream bad_header("F1,F2\n");
  EXPECT_THROW(parse_csv(bad_header), ParseError);
  std::istringstream short_row(csv_header() + "\n1,2,3\n");
  try {
    parse_csv(short_row);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream junk(csv_header() + "\nx,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0\n");
  EXPECT_THROW(parse_csv(junk), ParseError);
}

TEST(Dataset, RowOrder) {
  FeatureVector a, b;
  a.event_cycle = 5;
  a.current_router = 9;
  b.event_cycle = 5;
  b.current_router = 3;
  b.packet_seq = 100;
  EXPECT_TRUE(row_order(b, a));
  b.current_router = 9;
  b.packet_seq = 0;
  b.flit_seq = 1;
  EXPECT_TRUE(row_order(a, b));
}
