#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "thermoc/thermal.hpp"

using namespace thermoc;

TEST(TilePower, IdleAndLinear) {
  EXPECT_DOUBLE_EQ(tile_power(0.3, 0.01, 0), 0.3);
  EXPECT_NEAR(tile_power(0.3, 0.01, 20), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(tile_power(0.3, 0.01, 1'000'000), kMaxTilePower);
  ThermalConfig c;
  EXPECT_DOUBLE_EQ(tile_power(c, 0), c.p_idle);
}

TEST(StepThermal, AmbientZeroPowerIsFixedPoint) {
  const MeshDims d{4, 4, 4};
  ThermalConfig c;
  ThermalGrid g(d.routers(), Q88::from_double(c.t_ambient));
  const auto n = step_thermal(g, c, d);
  EXPECT_EQ(n.temps, g.temps);
}

TEST(StepThermal, UniformFieldHasNoDiffusion) {
  const MeshDims d{4, 4, 4};
  ThermalConfig c;
  c.alpha = 2.0;
  c.beta = 0.05;
  c.gamma = 0.01;
  ThermalGrid g(d.routers(), Q88::from_int(60));
  std::fill(g.powers.begin(), g.powers.end(), 0.5);
  const auto n = step_thermal(g, c, d);
  // 60 + 2*0.5 - 0.05*(60-45) = 60.25
  for (auto t : n.temps) EXPECT_EQ(t, Q88::from_double(60.25));
}

TEST(StepThermal, HotTileDiffusesToFourNeighbors) {
  const MeshDims d{3, 3, 1};
  ThermalConfig c;
  c.alpha = 0;
  c.beta = 0;
  c.gamma = 0.05;
  ThermalGrid g(d.routers(), Q88::from_int(45));
  const RouterId hot = d.id_of({1, 1, 0});
  g.temps[hot] = Q88::from_int(80);
  const auto n = step_thermal(g, c, d);
  EXPECT_EQ(n.temps[hot], Q88::from_int(73));
  for (Port p : {Port::East, Port::West, Port::North, Port::South})
    EXPECT_EQ(n.temps[*d.neighbor(hot, p)], Q88::from_double(46.75));
  EXPECT_EQ(n.temps[d.id_of({0, 0, 0})], Q88::from_int(45));
}

TEST(StepThermal, ClampsAt99) {
  const MeshDims d{2, 1, 1};
  ThermalConfig c;
  ThermalGrid g(d.routers(), Q88::from_int(98));
  std::fill(g.powers.begin(), g.powers.end(), kMaxTilePower);
  for (int i = 0; i < 10; ++i) g = step_thermal(g, c, d);
  for (auto t : g.temps) EXPECT_LE(t, Q88::from_double(kMaxTileTemp));
}

// Lateral exchange alone conserves the summed raw temperature.
TEST(StepThermal, DiffusionConservesHeat) {
  const MeshDims d{4, 4, 4};
  ThermalConfig c;
  c.alpha = 0;
  c.beta = 0;
  c.gamma = 0.1;
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> t(40 * 256, 90 * 256);
  ThermalGrid g(d.routers(), Q88{});
  for (auto& x : g.temps) x = Q88::from_raw(t(rng));
  auto sum = [](const ThermalGrid& gr) {
    return std::accumulate(gr.temps.begin(), gr.temps.end(), std::int64_t{0},
                           [](std::int64_t a, Q88 q) { return a + q.raw(); });
  };
  const auto before = sum(g);
  for (int i = 0; i < 50; ++i) g = step_thermal(g, c, d);
  EXPECT_EQ(sum(g), before);
}

// With no power the largest deviation from ambient never grows.
TEST(StepThermal, ZeroPowerDecaysTowardAmbient) {
  const MeshDims d{4, 4, 4};
  ThermalConfig c;
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> t(30.0, 90.0);
  ThermalGrid g(d.routers(), Q88{});
  for (auto& x : g.temps) x = Q88::from_double(t(rng));
  const auto amb = Q88::from_double(c.t_ambient).raw();
  auto maxdev = [&](const ThermalGrid& gr) {
    int m = 0;
    for (auto q : gr.temps) m = std::max(m, std::abs(int(q.raw()) - int(amb)));
    return m;
  };
  int prev = maxdev(g);
  for (int i = 0; i < 400; ++i) {
    g = step_thermal(g, c, d);
    const int now = maxdev(g);
    ASSERT_LE(now, prev);
    prev = now;
  }
  EXPECT_LT(prev, 256);  // within 1 degC after 400 steps
}

TEST(TileIdlePowers, SpreadBounds) {
  ThermalConfig c;
  c.idle_spread = 0.1;
  std::mt19937_64 rng(1);
  const auto p = tile_idle_powers(c, 64, rng);
  for (double v : p) {
    EXPECT_GE(v, c.p_idle * 0.9);
    EXPECT_LE(v, c.p_idle * 1.1);
  }
  c.idle_spread = 0.0;
  for (double v : tile_idle_powers(c, 8, rng)) EXPECT_EQ(v, c.p_idle);
}

TEST(Dtm, Hysteresis) {
  DtmConfig c;
  c.enabled = true;
  c.t_high = 60;
  c.t_low = 59;
  EXPECT_FALSE(dtm_update(c, false, Q88::from_double(59.5)));
  EXPECT_TRUE(dtm_update(c, false, Q88::from_int(60)));
  EXPECT_TRUE(dtm_update(c, true, Q88::from_double(59.5)));
  EXPECT_FALSE(dtm_update(c, true, Q88::from_int(59)));
  c.enabled = false;
  EXPECT_FALSE(dtm_update(c, true, Q88::from_int(80)));
}

TEST(ThermalConfig, Validation) {
  const MeshDims d{4, 4, 4};
  ThermalConfig c;
  EXPECT_NO_THROW(c.validate(d));
  c.gamma = 0.2;  // 0.05 + 6 * 0.2 >= 1
  EXPECT_THROW(c.validate(d), ValidationError);
  c = {};
  c.idle_spread = 1.0;
  EXPECT_THROW(c.validate(d), ValidationError);
  c = {};
  c.step_cycles = 0;
  EXPECT_THROW(c.validate(d), ValidationError);
  DtmConfig t;
  t.t_low = 70;
  EXPECT_THROW(t.validate(), ValidationError);
}
