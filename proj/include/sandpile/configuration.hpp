#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <utility>

#include "error.hpp"
#include "grid.hpp"

namespace sandpile {

// Finitely supported c : Z^2 -> N. Canonical: only strictly positive entries stored.
class Configuration {
 public:
  using Map = std::map<GridPoint, std::int64_t>;

  Configuration() = default;
  Configuration(std::initializer_list<std::pair<const GridPoint, std::int64_t>> cells) {
    for (const auto& [p, g] : cells) add_grains(p, g);
  }

  std::int64_t at(GridPoint p) const {
    auto it = cells_.find(p);
    return it == cells_.end() ? 0 : it->second;
  }

  void set(GridPoint p, std::int64_t grains) {
    if (grains < 0) throw InvalidArgument("negative grain count");
    if (grains == 0)
      cells_.erase(p);
    else
      cells_[p] = grains;
  }

  void add_grains(GridPoint p, std::int64_t grains) { set(p, at(p) + grains); }

  std::int64_t total() const {
    std::int64_t sum = 0;
    for (const auto& [p, g] : cells_) sum += g;
    return sum;
  }

  Box bounding_box() const {
    Box b;
    for (const auto& [p, g] : cells_) b.include(p);
    return b;
  }

  bool empty() const { return cells_.empty(); }
  std::size_t size() const { return cells_.size(); }
  const Map& cells() const { return cells_; }
  Map::const_iterator begin() const { return cells_.begin(); }
  Map::const_iterator end() const { return cells_.end(); }

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  Map cells_;
};

inline Configuration add(const Configuration& a, const Configuration& b) {
  Configuration out = a;
  for (const auto& [p, g] : b) out.add_grains(p, g);
  return out;
}

inline Configuration translate(const Configuration& c, GridPoint by) {
  Configuration out;
  for (const auto& [p, g] : c) out.set(p + by, g);
  return out;
}

}  // namespace sandpile
