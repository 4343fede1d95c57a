#include <gtest/gtest.h>

#include "thermoc/fixed_point.hpp"

using namespace thermoc;

TEST(Q88, RawRoundTrip) {
  for (std::int64_t r = 0; r <= Q88::kMaxRaw; ++r) ASSERT_EQ(Q88::from_raw(r).raw(), r);
}

TEST(Q88, FromRawSaturates) {
  EXPECT_EQ(Q88::from_raw(-5).raw(), 0);
  EXPECT_EQ(Q88::from_raw(0x10000).raw(), 0xFFFF);
}

TEST(Q88, FromDoubleRoundsToNearest) {
  EXPECT_EQ(Q88::from_double(64.0).raw(), 16384);
  EXPECT_EQ(Q88::from_double(1.0 / 512).raw(), 1);  // tie rounds up
  EXPECT_EQ(Q88::from_double(0.0019).raw(), 0);
  EXPECT_EQ(Q88::from_double(-3.0).raw(), 0);
  EXPECT_EQ(Q88::from_double(1000.0).raw(), 0xFFFF);
}

TEST(Q88, SaturatingArithmetic) {
  EXPECT_EQ(sat_add(Q88::from_int(250), Q88::from_int(10)).raw(), 0xFFFF);
  EXPECT_EQ(sat_sub(Q88::from_int(1), Q88::from_int(2)).raw(), 0);
  EXPECT_EQ(sat_add(Q88::from_double(1.5), Q88::from_double(2.25)), Q88::from_double(3.75));
}

TEST(Q88, ClampCelsius) {
  EXPECT_EQ(clamp_celsius(Q88::from_int(95), 0, 90), Q88::from_int(90));
  EXPECT_EQ(clamp_celsius(Q88::from_int(45), 0, 90), Q88::from_int(45));
}

// Three decimals always recover the raw register.
TEST(Q88, Decimal3IsLossless) {
  for (std::int64_t r = 0; r <= Q88::kMaxRaw; ++r) {
    const Q88 q = Q88::from_raw(r);
    ASSERT_EQ(Q88::from_double(std::stod(to_decimal3(q))), q) << r;
  }
  EXPECT_EQ(to_decimal3(Q88::from_double(57.5)), "57.500");
}
