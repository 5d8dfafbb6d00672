#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "configuration.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "neighborhood.hpp"

namespace sandpile {

enum class Side { North, East, South, West };

inline const char* side_name(Side s) {
  switch (s) {
    case Side::North: return "north";
    case Side::East: return "east";
    case Side::South: return "south";
    case Side::West: return "west";
  }
  return "?";
}

inline Side mirror(Side s) {
  switch (s) {
    case Side::North: return Side::South;
    case Side::East: return Side::West;
    case Side::South: return Side::North;
    case Side::West: return Side::East;
  }
  return s;
}

// e in E_n: the 0/1 vector of length n whose only 1 sits at `index`.
struct UnitVectorEn {
  std::int64_t n = 1;
  std::int64_t index = 0;

  UnitVectorEn() = default;
  UnitVectorEn(std::int64_t n_, std::int64_t index_) : n(n_), index(index_) {
    if (n < 1) throw InvalidArgument("E_n needs n >= 1");
    if (index < 0 || index >= n) throw InvalidArgument("unit vector index outside [0, n)");
  }
  friend bool operator==(const UnitVectorEn&, const UnitVectorEn&) = default;
};

// Border vectors of an n x n square at (0,0)..(n-1,n-1). The rectangle form is
// kept internally: north/south vectors have length width, east/west height.
struct CrossingSpec {
  std::int64_t width = 1, height = 1;
  UnitVectorEn north, east, south, west;

  CrossingSpec() = default;
  CrossingSpec(std::int64_t n, std::int64_t north_i, std::int64_t east_i, std::int64_t south_i, std::int64_t west_i)
      : CrossingSpec(n, n, north_i, east_i, south_i, west_i) {}
  CrossingSpec(std::int64_t w, std::int64_t h, std::int64_t north_i, std::int64_t east_i, std::int64_t south_i,
               std::int64_t west_i)
      : width(w), height(h), north(w, north_i), east(h, east_i), south(w, south_i), west(h, west_i) {}

  bool is_square() const { return width == height; }
  std::int64_t n() const { return width; }
  Box box() const { return {0, 0, width - 1, height - 1}; }

  const UnitVectorEn& vector(Side s) const { return const_cast<CrossingSpec*>(this)->vector(s); }
  UnitVectorEn& vector(Side s) {
    switch (s) {
      case Side::North: return north;
      case Side::East: return east;
      case Side::South: return south;
      default: return west;
    }
  }

  // The single cell where positioning puts the 1 of the side's vector.
  GridPoint border_cell(Side s) const {
    switch (s) {
      case Side::North: return {north.index, 0};
      case Side::East: return {width - 1, east.index};
      case Side::South: return {south.index, height - 1};
      default: return {0, west.index};
    }
  }

  bool on_border(GridPoint q, Side s) const {
    switch (s) {
      case Side::North: return q.y == 0;
      case Side::East: return q.x == width - 1;
      case Side::South: return q.y == height - 1;
      default: return q.x == 0;
    }
  }

  CrossingSpec transposed() const { return CrossingSpec(height, width, west.index, south.index, east.index, north.index); }

  friend bool operator==(const CrossingSpec&, const CrossingSpec&) = default;
};

// N(e), E(e), S(e), W(e) on the e.n x e.n square.
inline Configuration positioning(Side which, const UnitVectorEn& e) {
  CrossingSpec sq(e.n, 0, 0, 0, 0);
  sq.vector(which) = e;
  return Configuration{{sq.border_cell(which), 1}};
}

// Full parallel evolution of c + one grain on an entry border.
struct BorderAvalanche {
  std::vector<std::vector<GridPoint>> act;      // Act(F^t(c + seed)) for t = 0..t0
  std::map<GridPoint, std::int64_t> fire_time;  // first firing step of each fired vertex
  std::map<GridPoint, std::int64_t> fire_count;
  Configuration final_configuration;
};

namespace detail {

inline bool supported_inside(const Configuration& c, const Box& box) {
  return std::all_of(c.begin(), c.end(), [&](const auto& kv) { return box.contains(kv.first); });
}

inline bool is_stable(const Configuration& c, const Neighborhood& nb) { return active_set(c, nb).empty(); }

}  // namespace detail

// When c is a stable configuration inside the rectangle, every vertex fires at
// most once and, for balanced neighborhoods, nothing outside the rectangle
// fires; either failure throws InvariantViolation. (Neighborhoods lacking some
// direction can legitimately fire cells outside.)
inline BorderAvalanche run_border_avalanche(const Configuration& c, const Neighborhood& nb, const CrossingSpec& spec,
                                            Side entry, std::optional<std::int64_t> budget = std::nullopt) {
  bool enforce = detail::is_stable(c, nb) && detail::supported_inside(c, spec.box());
  bool contain = enforce && nb.is_balanced();
  std::int64_t limit = budget.value_or(kDefaultStepBudget);
  Configuration start = c;
  start.add_grains(spec.border_cell(entry), 1);
  ParallelRun run(start, nb);
  BorderAvalanche out;
  while (true) {
    out.act.push_back(run.active());
    if (run.is_stable()) break;
    if (run.time() >= limit) detail::out_of_budget(nb, limit, "parallel steps");
    for (const auto& q : run.active()) {
      if (enforce && run.fire_count(q) >= 1)
        throw InvariantViolation("vertex (" + std::to_string(q.x) + "," + std::to_string(q.y) + ") fires twice");
      if (contain && !spec.box().contains(q))
        throw InvariantViolation("vertex (" + std::to_string(q.x) + "," + std::to_string(q.y) +
                                 ") outside the rectangle fires");
    }
    run.step();
  }
  out.fire_time = run.first_fire_times();
  out.fire_count = run.fire_counts();
  out.final_configuration = run.configuration();
  return out;
}

struct TransportResult {
  bool ok = false;
  std::optional<std::int64_t> witness_time;       // t with Act = {exit cell}
  std::vector<std::vector<GridPoint>> evolution;  // kept only on failure
};

struct IsolationResult {
  bool ok = true;
  std::optional<std::pair<std::int64_t, GridPoint>> violation;  // first (t, cell) on the forbidden border
};

inline TransportResult transport_of(const BorderAvalanche& a, const CrossingSpec& spec, Side exit) {
  std::vector<GridPoint> target{spec.border_cell(exit)};
  TransportResult r;
  for (std::size_t t = 0; t < a.act.size(); ++t)
    if (a.act[t] == target) {
      r.ok = true;
      r.witness_time = static_cast<std::int64_t>(t);
      return r;
    }
  r.evolution = a.act;
  return r;
}

inline IsolationResult isolation_of(const BorderAvalanche& a, const CrossingSpec& spec, Side forbidden) {
  for (std::size_t t = 0; t < a.act.size(); ++t)
    for (const auto& q : a.act[t])
      if (spec.on_border(q, forbidden))  // the whole line, as in the definition
        return {false, std::pair{static_cast<std::int64_t>(t), q}};
  return {};
}

// c is stable and one grain on `from` makes Act exactly the `to` cell at some t.
inline TransportResult verify_transporter(const Configuration& c, const Neighborhood& nb, Side from, Side to,
                                          const UnitVectorEn& in_vec, const UnitVectorEn& out_vec) {
  if (in_vec.n != out_vec.n) throw InvalidArgument("vectors of different lengths");
  if (from == to) throw InvalidArgument("entry and exit border coincide");
  CrossingSpec spec(in_vec.n, 0, 0, 0, 0);
  spec.vector(from) = in_vec;
  spec.vector(to) = out_vec;
  if (!detail::is_stable(c, nb)) return {false, std::nullopt, {}};
  return transport_of(run_border_avalanche(c, nb, spec, from), spec, to);
}

enum class IsolationAxis { WestToSouth, NorthToEast };

inline IsolationResult verify_isolation(const Configuration& c, const Neighborhood& nb, IsolationAxis axis,
                                        const UnitVectorEn& in_vec) {
  CrossingSpec spec(in_vec.n, 0, 0, 0, 0);
  Side entry = axis == IsolationAxis::WestToSouth ? Side::West : Side::North;
  spec.vector(entry) = in_vec;
  Side forbidden = axis == IsolationAxis::WestToSouth ? Side::South : Side::East;
  return isolation_of(run_border_avalanche(c, nb, spec, entry), spec, forbidden);
}

// The five items of a crossing configuration. The last check guards the east
// border against the north input.
struct CrossingReport {
  bool stable = false;
  TransportResult west_to_east;
  IsolationResult west_isolated_to_south;
  TransportResult north_to_south;
  IsolationResult north_isolated_to_east;
  bool inside = true;  // support within the square

  bool verdict() const {
    return stable && inside && west_to_east.ok && west_isolated_to_south.ok && north_to_south.ok &&
           north_isolated_to_east.ok;
  }
};

inline CrossingReport verify_crossing(const Configuration& c, const Neighborhood& nb, const CrossingSpec& spec) {
  CrossingReport r;
  r.stable = detail::is_stable(c, nb);
  r.inside = detail::supported_inside(c, spec.box());
  auto we = run_border_avalanche(c, nb, spec, Side::West);
  auto ns = run_border_avalanche(c, nb, spec, Side::North);
  r.west_to_east = transport_of(we, spec, Side::East);
  r.west_isolated_to_south = isolation_of(we, spec, Side::South);
  r.north_to_south = transport_of(ns, spec, Side::South);
  r.north_isolated_to_east = isolation_of(ns, spec, Side::East);
  return r;
}

// Reflection across the main diagonal: swaps the roles of the two signals.
inline Configuration transpose(const Configuration& c) {
  Configuration out;
  for (const auto& [q, g] : c) out.set({q.y, q.x}, g);
  return out;
}

inline Neighborhood transpose(const Neighborhood& nb) {
  std::vector<MovementVector> v;
  for (const auto& d : nb.vectors()) v.push_back({d.y, d.x});
  return Neighborhood(std::move(v));
}

}  // namespace sandpile
