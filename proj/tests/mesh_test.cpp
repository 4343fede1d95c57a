#include <gtest/gtest.h>

#include <random>

#include "thermoc/mesh.hpp"

using namespace thermoc;

TEST(Routing, LocalWhenAtDestination) {
  EXPECT_EQ(route_dimension_order({2, 3, 0}, {2, 3, 0}), Port::Local);
}

TEST(Routing, XFirstThenFullPathIsManhattan) {
  const MeshDims d{4, 4, 4};
  EXPECT_EQ(route_dimension_order({0, 0, 0}, {3, 1, 0}), Port::East);

  Coord c{0, 0, 0};
  const Coord dst{3, 1, 0};
  int hops = 0;
  while (route_dimension_order(c, dst) != Port::Local) {
    c = d.coord_of(*d.neighbor(d.id_of(c), route_dimension_order(c, dst)));
    ++hops;
  }
  EXPECT_EQ(hops, 4);
}

TEST(Routing, ZLast) { EXPECT_EQ(route_dimension_order({1, 1, 0}, {1, 1, 1}), Port::Up); }

TEST(Routing, DimensionOrderWalkAlwaysTakesManhattanHops) {
  const MeshDims d{4, 4, 4};
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> pick(0, d.routers() - 1);
  for (int i = 0; i < 2000; ++i) {
    const auto s = static_cast<RouterId>(pick(rng)), t = static_cast<RouterId>(pick(rng));
    Coord c = d.coord_of(s);
    const Coord dst = d.coord_of(t);
    int hops = 0;
    for (Port p; (p = route_dimension_order(c, dst)) != Port::Local; ++hops) {
      const auto n = d.neighbor(d.id_of(c), p);
      ASSERT_TRUE(n.has_value());
      c = d.coord_of(*n);
    }
    ASSERT_EQ(hops, manhattan(d.coord_of(s), dst));
  }
}

TEST(Routing, MinimalPortsStartWithDimensionOrder) {
  const auto ports = minimal_ports({0, 3, 2}, {2, 1, 2});
  ASSERT_EQ(ports.size(), 2u);
  EXPECT_EQ(ports[0], Port::East);
  EXPECT_EQ(ports[1], Port::South);
  EXPECT_TRUE(minimal_ports({1, 1, 1}, {1, 1, 1}).empty());
}

TEST(Mesh, CoordIdRoundTrip) {
  const MeshDims d{4, 3, 2};
  for (int i = 0; i < d.routers(); ++i) EXPECT_EQ(d.id_of(d.coord_of(static_cast<RouterId>(i))), i);
}

TEST(Mesh, PresentPorts) {
  const MeshDims d{4, 4, 4};
  EXPECT_EQ(d.present_ports(d.id_of({0, 0, 0})), 0b010101);  // E, N, Up
  EXPECT_TRUE(d.is_interior(d.id_of({1, 2, 1})));
  EXPECT_FALSE(d.is_interior(d.id_of({3, 2, 1})));
  int interior = 0;
  for (int i = 0; i < d.routers(); ++i) interior += d.is_interior(static_cast<RouterId>(i));
  EXPECT_EQ(interior, 8);
}

TEST(Mesh, NeighborIsSymmetric) {
  const MeshDims d{3, 4, 2};
  for (int i = 0; i < d.routers(); ++i)
    for (int p = 0; p < kDirectionalPorts; ++p) {
      const auto n = d.neighbor(static_cast<RouterId>(i), port_from_index(p));
      if (!n) continue;
      EXPECT_EQ(d.neighbor(*n, opposite(port_from_index(p))), i);
    }
}

TEST(Mesh, Validation) {
  EXPECT_THROW((MeshDims{0, 4, 4}.validate()), ValidationError);
  EXPECT_THROW((MeshDims{8, 8, 8}.validate()), ValidationError);
  EXPECT_NO_THROW((MeshDims{4, 4, 4}.validate()));
}
