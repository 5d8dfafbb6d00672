#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace sandpile {

// A lattice vertex of Z^2. x grows eastward, y grows southward.
struct GridPoint {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend constexpr auto operator<=>(const GridPoint&, const GridPoint&) = default;
  friend constexpr GridPoint operator+(GridPoint a, GridPoint b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr GridPoint operator-(GridPoint a, GridPoint b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr GridPoint operator-(GridPoint a) { return {-a.x, -a.y}; }
};

// Displacements share the representation; inside a Neighborhood they are never (0,0).
using MovementVector = GridPoint;

constexpr std::int64_t cross(GridPoint a, GridPoint b) { return a.x * b.y - a.y * b.x; }
constexpr std::int64_t dot(GridPoint a, GridPoint b) { return a.x * b.x + a.y * b.y; }
constexpr std::int64_t norm2(GridPoint a) { return dot(a, a); }

// Inclusive axis-aligned rectangle.
struct Box {
  std::int64_t x0 = 0, y0 = 0, x1 = -1, y1 = -1;

  constexpr bool empty() const { return x1 < x0 || y1 < y0; }
  constexpr bool contains(GridPoint p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  constexpr std::int64_t width() const { return empty() ? 0 : x1 - x0 + 1; }
  constexpr std::int64_t height() const { return empty() ? 0 : y1 - y0 + 1; }
  constexpr void include(GridPoint p) {
    if (empty()) {
      *this = {p.x, p.y, p.x, p.y};
      return;
    }
    if (p.x < x0) x0 = p.x;
    if (p.y < y0) y0 = p.y;
    if (p.x > x1) x1 = p.x;
    if (p.y > y1) y1 = p.y;
  }
  friend constexpr bool operator==(const Box&, const Box&) = default;
};

struct GridPointHash {
  std::size_t operator()(GridPoint p) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(p.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(p.y) + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace sandpile
