#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "configuration.hpp"
#include "crossing.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "neighborhood.hpp"

namespace sandpile {

using Arc = std::pair<GridPoint, GridPoint>;

// Fired vertices with their (first) parallel firing step, and an arc (u, v)
// whenever v is an out-neighbor of u and u fired strictly before v.
struct FiringGraph {
  std::map<GridPoint, std::int64_t> fire_time;
  std::vector<Arc> arcs;  // sorted

  std::set<GridPoint> vertices() const {
    std::set<GridPoint> out;
    for (const auto& [v, t] : fire_time) out.insert(v);
    return out;
  }
  bool contains(GridPoint v) const { return fire_time.count(v) != 0; }

  std::vector<GridPoint> in_neighbors(GridPoint v) const {
    std::vector<GridPoint> out;
    for (const auto& [a, b] : arcs)
      if (b == v) out.push_back(a);
    return out;
  }
  std::vector<GridPoint> out_neighbors(GridPoint v) const {
    std::vector<GridPoint> out;
    auto it = std::lower_bound(arcs.begin(), arcs.end(), Arc{v, GridPoint{INT64_MIN, INT64_MIN}});
    for (; it != arcs.end() && it->first == v; ++it) out.push_back(it->second);
    return out;
  }

  friend bool operator==(const FiringGraph&, const FiringGraph&) = default;
};

inline FiringGraph graph_from_times(std::map<GridPoint, std::int64_t> fire_time, const Neighborhood& nb) {
  FiringGraph g{std::move(fire_time), {}};
  for (const auto& [u, tu] : g.fire_time)
    for (const auto& d : nb.vectors()) {
      auto it = g.fire_time.find(u + d);
      if (it != g.fire_time.end() && tu < it->second) g.arcs.push_back({u, u + d});
    }
  std::sort(g.arcs.begin(), g.arcs.end());
  return g;
}

inline FiringGraph extract_firing_graph(const Configuration& c, const Configuration& seed, const Neighborhood& nb,
                                        std::optional<std::int64_t> budget = std::nullopt) {
  ParallelRun run(add(c, seed), nb);
  std::int64_t limit = budget.value_or(kDefaultStepBudget);
  while (!run.is_stable()) {
    if (run.time() >= limit) detail::out_of_budget(nb, limit, "parallel steps");
    run.step();
  }
  return graph_from_times(run.first_fire_times(), nb);
}

struct FiringGraphPair {
  FiringGraph we, ns;
};

inline FiringGraphPair firing_graphs(const Configuration& c, const Neighborhood& nb, const CrossingSpec& spec) {
  return {extract_firing_graph(c, Configuration{{spec.border_cell(Side::West), 1}}, nb),
          extract_firing_graph(c, Configuration{{spec.border_cell(Side::North), 1}}, nb)};
}

// Crossing whose firing graphs share no vertex: shared vertices are emptied
// and each of their out-neighbors (in one graph only) receives one grain per
// shared in-neighbor it loses. The result is re-verified.
inline Configuration disjointify(const Configuration& c, const Neighborhood& nb, const CrossingSpec& spec) {
  if (!verify_crossing(c, nb, spec).verdict()) throw NotACrossing("input is not a crossing for the given vectors");
  if (!is_eulerian(nb)) throw InvariantViolation("neighborhood digraph is not Eulerian");
  auto [g1, g2] = firing_graphs(c, nb, spec);
  std::set<GridPoint> shared;
  for (const auto& [v, t] : g1.fire_time)
    if (g2.contains(v)) shared.insert(v);
  if (shared.empty()) return c;

  auto image = [&](const FiringGraph& g) {
    std::set<GridPoint> out;
    for (const auto& [a, b] : g.arcs)
      if (shared.count(a)) out.insert(b);
    return out;
  };
  auto lost = [&](const FiringGraph& g, GridPoint v) {
    std::int64_t k = 0;
    for (const auto& u : g.in_neighbors(v)) k += static_cast<std::int64_t>(shared.count(u));
    return k;
  };
  std::set<GridPoint> img1 = image(g1), img2 = image(g2);
  Configuration out = c;
  for (const auto& v : img1)
    if (!img2.count(v) && !shared.count(v)) out.add_grains(v, lost(g1, v));
  for (const auto& v : img2)
    if (!img1.count(v) && !shared.count(v)) out.add_grains(v, lost(g2, v));
  for (const auto& v : shared) out.set(v, 0);

  if (!verify_crossing(out, nb, spec).verdict())
    throw InvariantViolation("disjointified configuration is no longer a crossing");
  auto [h1, h2] = firing_graphs(out, nb, spec);
  for (const auto& [v, t] : h1.fire_time)
    if (h2.contains(v)) throw InvariantViolation("disjointified firing graphs still intersect");
  return out;
}

}  // namespace sandpile
