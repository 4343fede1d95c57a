#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "thermoc/traffic.hpp"

using namespace thermoc;

TEST(UniformInjections, ZeroRateNeverFires) {
  std::mt19937_64 rng(1);
  for (int c = 0; c < 1000; ++c) ASSERT_TRUE(uniform_injections(64, 0.0, rng).empty());
}

TEST(UniformInjections, FullRateFiresEveryNodeOnce) {
  std::mt19937_64 rng(1);
  for (int c = 0; c < 100; ++c) {
    const auto inj = uniform_injections(64, 1.0, rng);
    ASSERT_EQ(inj.size(), 64u);
    for (std::size_t i = 0; i < inj.size(); ++i) {
      EXPECT_EQ(inj[i].src, i);
      EXPECT_NE(inj[i].dst, inj[i].src);
      EXPECT_LT(inj[i].dst, 64);
    }
  }
}

// Binomial(64 * 100k, 0.05): mean 320000, sigma sqrt(n p (1-p)).
TEST(UniformInjections, CountWithinThreeSigma) {
  std::mt19937_64 rng(2024);
  std::uint64_t total = 0;
  for (int c = 0; c < 100'000; ++c) total += uniform_injections(64, 0.05, rng).size();
  const double n = 64.0 * 100'000, p = 0.05;
  const double mean = n * p, sd = std::sqrt(n * p * (1 - p));
  EXPECT_NEAR(static_cast<double>(total), mean, 3 * sd);
}

TEST(UniformInjections, DestinationsCoverAllOtherNodes) {
  std::mt19937_64 rng(3);
  std::vector<int> hits(8, 0);
  for (int c = 0; c < 20'000; ++c)
    for (const auto& i : uniform_injections(8, 1.0, rng))
      if (i.src == 3) ++hits[i.dst];
  EXPECT_EQ(hits[3], 0);
  for (int d = 0; d < 8; ++d)
    if (d != 3) {
      EXPECT_NEAR(hits[d], 20'000 / 7.0, 300);
    }
}

TEST(Trace, EmptyFileIsEmptySchedule) {
  std::istringstream in("");
  EXPECT_TRUE(parse_trace(in, 64).empty());
}

TEST(Trace, ParsesOneLine) {
  std::istringstream in("0 5 0.1 0 1000\n");
  const auto t = parse_trace(in, 64);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].src, 0);
  EXPECT_EQ(t[0].dst, 5);
  EXPECT_DOUBLE_EQ(t[0].pir, 0.1);
  EXPECT_EQ(t[0].t_start, 0u);
  EXPECT_EQ(t[0].t_stop, 1000u);
  EXPECT_TRUE(t[0].active_at(0));
  EXPECT_TRUE(t[0].active_at(1000));
  EXPECT_FALSE(t[0].active_at(1001));
}

TEST(Trace, OutOfRangeRouterIsValidationError) {
  std::istringstream in("0 999 0.1 0 10\n");
  EXPECT_THROW(parse_trace(in, 64), ValidationError);
}

TEST(Trace, CommentsAndBlankLines) {
  std::istringstream in("# header\n\n  1 2 0.5 10 20\n");
  EXPECT_EQ(parse_trace(in, 64).size(), 1u);
}

TEST(Trace, MalformedLineReportsLineNumber) {
  std::istringstream in("0 1 0.1 0 5\n0 1 abc 0 5\n");
  try {
    parse_trace(in, 64);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream extra("0 1 0.1 0 5 7\n");
  EXPECT_THROW(parse_trace(extra, 64), ParseError);
}

TEST(Trace, RejectsBadValues) {
  for (const char* s : {"3 3 0.1 0 5", "0 1 1.5 0 5", "0 1 0.1 9 5", "-1 2 0.1 0 5"}) {
    std::istringstream in(s);
    EXPECT_THROW(parse_trace(in, 64), ValidationError) << s;
  }
}

TEST(Trace, MissingFileIsIoError) { EXPECT_THROW(load_trace("/nonexistent/trace.txt", 64), IoError); }

TEST(TrafficSource, DeterministicForSeed) {
  TrafficConfig cfg;
  cfg.pir = 0.1;
  TrafficSource a(cfg, {}, 64, 42), b(cfg, {}, 64, 42), c(cfg, {}, 64, 43);
  bool differs = false;
  for (Cycle t = 0; t < 500; ++t) {
    const auto x = a.next(t), y = b.next(t), z = c.next(t);
    ASSERT_EQ(x, y);
    differs |= x != z;
  }
  EXPECT_TRUE(differs);
}

TEST(TrafficSource, TraceModeRespectsWindowsAndOnePacketPerSource) {
  TrafficConfig cfg;
  cfg.mode = TrafficMode::Trace;
  cfg.trace_path = "unused";
  std::vector<TraceEntry> trace{{0, 5, 1.0, 10, 19}, {0, 6, 1.0, 10, 19}, {2, 1, 1.0, 15, 15}};
  TrafficSource src(cfg, trace, 64, 1);
  int n0 = 0, n2 = 0;
  for (Cycle t = 0; t < 40; ++t) {
    const auto inj = src.next(t);
    for (const auto& i : inj) {
      if (i.src == 0) {
        ++n0;
        EXPECT_EQ(i.dst, 5);  // first active entry wins the node for this cycle
        EXPECT_TRUE(t >= 10 && t <= 19);
      }
      if (i.src == 2) {
        ++n2;
        EXPECT_EQ(t, 15u);
      }
    }
  }
  EXPECT_EQ(n0, 10);
  EXPECT_EQ(n2, 1);
}

TEST(TrafficConfig, Validation) {
  TrafficConfig c;
  c.pir = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
  c.pir = 0.1;
  c.mode = TrafficMode::Mixed;
  EXPECT_THROW(c.validate(), ValidationError);
  c.trace_path = "t.txt";
  EXPECT_NO_THROW(c.validate());
}
