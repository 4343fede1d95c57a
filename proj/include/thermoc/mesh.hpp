#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <vector>

#include "thermoc/error.hpp"

namespace thermoc {

using RouterId = std::uint16_t;
using Cycle = std::uint64_t;

// Directional ports first, local last. A port id doubles as the F13/F14 value.
enum class Port : std::uint8_t { East = 0, West = 1, North = 2, South = 3, Up = 4, Down = 5, Local = 6 };

inline constexpr int kDirectionalPorts = 6;
inline constexpr int kPortCount = 7;

constexpr int port_index(Port p) { return static_cast<int>(p); }
constexpr Port port_from_index(int i) { return static_cast<Port>(i); }

constexpr Port opposite(Port p) {
  switch (p) {
    case Port::East: return Port::West;
    case Port::West: return Port::East;
    case Port::North: return Port::South;
    case Port::South: return Port::North;
    case Port::Up: return Port::Down;
    case Port::Down: return Port::Up;
    case Port::Local: return Port::Local;
  }
  return Port::Local;
}

struct Coord {
  int x = 0;
  int y = 0;
  int z = 0;
  friend constexpr bool operator==(const Coord&, const Coord&) = default;
};

constexpr int manhattan(Coord a, Coord b) {
  return (a.x > b.x ? a.x - b.x : b.x - a.x) + (a.y > b.y ? a.y - b.y : b.y - a.y) +
         (a.z > b.z ? a.z - b.z : b.z - a.z);
}

// X first, then Y, then Z. Local iff already at the destination.
constexpr Port route_dimension_order(Coord current, Coord destination) {
  if (destination.x > current.x) return Port::East;
  if (destination.x < current.x) return Port::West;
  if (destination.y > current.y) return Port::North;
  if (destination.y < current.y) return Port::South;
  if (destination.z > current.z) return Port::Up;
  if (destination.z < current.z) return Port::Down;
  return Port::Local;
}

// Every directional port that reduces the remaining distance, in X, Y, Z order.
// The first entry is always the dimension-order port.
inline std::vector<Port> minimal_ports(Coord current, Coord destination) {
  std::vector<Port> out;
  if (destination.x != current.x) out.push_back(destination.x > current.x ? Port::East : Port::West);
  if (destination.y != current.y) out.push_back(destination.y > current.y ? Port::North : Port::South);
  if (destination.z != current.z) out.push_back(destination.z > current.z ? Port::Up : Port::Down);
  return out;
}

struct MeshDims {
  int x = 4;
  int y = 4;
  int z = 4;

  int routers() const { return x * y * z; }

  void validate() const {
    if (x < 1 || y < 1 || z < 1) throw ValidationError("mesh dimensions must be positive");
    if (routers() > 256) throw ValidationError("mesh holds at most 256 routers");
  }

  bool contains(Coord c) const { return c.x >= 0 && c.y >= 0 && c.z >= 0 && c.x < x && c.y < y && c.z < z; }

  Coord coord_of(RouterId id) const {
    const int i = id;
    return Coord{i % x, (i / x) % y, i / (x * y)};
  }

  RouterId id_of(Coord c) const { return static_cast<RouterId>(c.x + x * (c.y + y * c.z)); }

  // The router across directional port p, if the mesh has one there.
  std::optional<RouterId> neighbor(RouterId id, Port p) const {
    Coord c = coord_of(id);
    switch (p) {
      case Port::East: ++c.x; break;
      case Port::West: --c.x; break;
      case Port::North: ++c.y; break;
      case Port::South: --c.y; break;
      case Port::Up: ++c.z; break;
      case Port::Down: --c.z; break;
      case Port::Local: return std::nullopt;
    }
    if (!contains(c)) return std::nullopt;
    return id_of(c);
  }

  // Bit i set iff directional port i leads to a router. Edge routers lack some ports.
  std::uint8_t present_ports(RouterId id) const {
    std::uint8_t mask = 0;
    for (int p = 0; p < kDirectionalPorts; ++p) {
      if (neighbor(id, port_from_index(p))) mask |= static_cast<std::uint8_t>(1u << p);
    }
    return mask;
  }

  bool is_interior(RouterId id) const { return present_ports(id) == 0x3F; }
};

}  // namespace thermoc
