#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <vector>

#include "error.hpp"
#include "grid.hpp"

namespace sandpile {

// Uniform neighborhood N+: a finite set of movement vectors, origin excluded.
// Stored sorted and deduplicated so equality and serialization are canonical.
class Neighborhood {
 public:
  explicit Neighborhood(std::vector<MovementVector> vectors) : vectors_(std::move(vectors)) {
    std::sort(vectors_.begin(), vectors_.end());
    vectors_.erase(std::unique(vectors_.begin(), vectors_.end()), vectors_.end());
    if (vectors_.empty()) throw EmptyNeighborhood("neighborhood has no movement vector");
    if (std::binary_search(vectors_.begin(), vectors_.end(), MovementVector{0, 0}))
      throw InvalidArgument("movement vector (0,0) is a self-loop and not allowed");
    for (const auto& v : vectors_) {
      reach_ = std::max({reach_, std::abs(v.x), std::abs(v.y)});
      if (!noncollinear_ && cross(vectors_.front(), v) != 0) noncollinear_ = true;
    }
  }

  const std::vector<MovementVector>& vectors() const& { return vectors_; }
  // temporaries hand their vectors over, so range-for over them cannot dangle
  std::vector<MovementVector> vectors() && { return std::move(vectors_); }
  std::size_t p() const { return vectors_.size(); }
  bool contains(MovementVector v) const { return std::binary_search(vectors_.begin(), vectors_.end(), v); }

  // Lemma-1 hypothesis: two movement vectors that are not collinear.
  bool has_noncollinear_pair() const { return noncollinear_; }

  // Vectors pointing strictly east, west, south and north all exist. Grains
  // that leave a bounded region can then not pile up on one side of it.
  bool is_balanced() const {
    bool e = false, w = false, s = false, n = false;
    for (const auto& v : vectors_) {
      e |= v.x > 0, w |= v.x < 0, s |= v.y > 0, n |= v.y < 0;
    }
    return e && w && s && n;
  }

  // Chebyshev radius of the vector set.
  std::int64_t reach() const { return reach_; }

  Neighborhood inverse() const {
    std::vector<MovementVector> out;
    out.reserve(vectors_.size());
    for (const auto& v : vectors_) out.push_back(-v);
    return Neighborhood(std::move(out));
  }

  static Neighborhood von_neumann(std::int64_t radius) {
    std::vector<MovementVector> out;
    for (std::int64_t dx = -radius; dx <= radius; ++dx)
      for (std::int64_t dy = -radius; dy <= radius; ++dy)
        if ((dx || dy) && std::abs(dx) + std::abs(dy) <= radius) out.push_back({dx, dy});
    return Neighborhood(std::move(out));
  }

  static Neighborhood moore(std::int64_t radius) {
    std::vector<MovementVector> out;
    for (std::int64_t dx = -radius; dx <= radius; ++dx)
      for (std::int64_t dy = -radius; dy <= radius; ++dy)
        if (dx || dy) out.push_back({dx, dy});
    return Neighborhood(std::move(out));
  }

  friend bool operator==(const Neighborhood& a, const Neighborhood& b) { return a.vectors_ == b.vectors_; }

 private:
  std::vector<MovementVector> vectors_;
  std::int64_t reach_ = 0;
  bool noncollinear_ = false;
};

inline Neighborhood inverse_neighborhood(const Neighborhood& nb) { return nb.inverse(); }

// Eulerian check used by the Prop.-4 transform: counts the in-neighbors of a
// probe vertex (all u with 0 - u in N+) and compares with the out-degree p.
inline bool is_eulerian(const Neighborhood& nb) {
  std::size_t in_degree = 0;
  const Neighborhood inv = nb.inverse();
  for (const auto& v : inv.vectors())
    if (nb.contains(GridPoint{0, 0} - v)) ++in_degree;
  return in_degree == nb.p();
}

}  // namespace sandpile
