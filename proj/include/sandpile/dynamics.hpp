#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "configuration.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "neighborhood.hpp"

namespace sandpile {

struct Odometer {
  std::map<GridPoint, std::int64_t> fire_count;  // only vertices that fired
  std::int64_t steps = 0;

  friend bool operator==(const Odometer&, const Odometer&) = default;
};

struct Stabilization {
  Configuration stable;
  Odometer odometer;
};

struct StepResult {
  Configuration next;
  std::vector<GridPoint> fired;  // Act of the input, sorted
};

inline constexpr std::int64_t kDefaultStepBudget = 1'000'000;
inline constexpr std::int64_t kDefaultFiringBudget = 1'000'000'000;
// Hard cap on the simulated window; a run that needs more is treated as
// exhausting its budget (collinear neighborhoods can drift grains forever).
inline constexpr std::int64_t kMaxWindowCells = std::int64_t{1} << 22;

namespace detail {

// Dense rectangular window over Z^2 that grows on demand.
class Lattice {
 public:
  Lattice(const Configuration& c, const Neighborhood& nb) : nb_(&nb), p_(static_cast<std::int64_t>(nb.p())) {
    Box b = c.bounding_box();
    if (b.empty()) b = {0, 0, 0, 0};
    reallocate(b);
    for (const auto& [q, g] : c) grains_[index(q)] = g;
  }

  std::int64_t p() const { return p_; }
  std::int64_t grains(GridPoint q) const { return window_.contains(q) ? grains_[index(q)] : 0; }
  std::int64_t fires(GridPoint q) const { return window_.contains(q) ? fires_[index(q)] : 0; }
  std::int64_t first_time(GridPoint q) const { return window_.contains(q) ? first_[index(q)] : -1; }

  std::vector<GridPoint> unstable() const {
    std::vector<GridPoint> out;
    for (std::int64_t x = window_.x0; x <= window_.x1; ++x)
      for (std::int64_t y = window_.y0; y <= window_.y1; ++y)
        if (grains_[index({x, y})] >= p_) out.push_back({x, y});
    return out;
  }

  // Makes every target of a firing at q addressable.
  void reserve_around(GridPoint q) {
    std::int64_t r = nb_->reach();
    Box need{q.x - r, q.y - r, q.x + r, q.y + r};
    if (window_.contains({need.x0, need.y0}) && window_.contains({need.x1, need.y1})) return;
    Box grown = window_;
    grown.include({need.x0, need.y0});
    grown.include({need.x1, need.y1});
    reallocate(grown);
  }

  // Fires q once at time t; calls on_rise for each cell that reaches p grains.
  template <class OnRise>
  void fire(GridPoint q, std::int64_t t, OnRise&& on_rise) {
    std::int64_t i = index(q);
    grains_[i] -= p_;
    ++fires_[i];
    if (first_[i] < 0) first_[i] = t;
    for (std::size_t k = 0; k < offsets_.size(); ++k) {
      std::int64_t j = i + offsets_[k];
      if (++grains_[j] == p_) on_rise(q + nb_->vectors()[k]);
    }
  }

  // Removal half of a parallel step; the grains are delivered by deliver().
  void topple(GridPoint q, std::int64_t t) {
    std::int64_t i = index(q);
    grains_[i] -= p_;
    ++fires_[i];
    if (first_[i] < 0) first_[i] = t;
  }

  template <class OnTouch>
  void deliver(GridPoint q, OnTouch&& on_touch) {
    std::int64_t i = index(q);
    for (std::size_t k = 0; k < offsets_.size(); ++k) {
      ++grains_[i + offsets_[k]];
      on_touch(q + nb_->vectors()[k]);
    }
  }

  Configuration configuration() const {
    Configuration out;
    for (std::int64_t x = window_.x0; x <= window_.x1; ++x)
      for (std::int64_t y = window_.y0; y <= window_.y1; ++y)
        if (std::int64_t g = grains_[index({x, y})]) out.set({x, y}, g);
    return out;
  }

  std::map<GridPoint, std::int64_t> fire_counts() const { return collect(fires_, 1); }
  std::map<GridPoint, std::int64_t> first_times() const { return collect(first_, 0); }

 private:
  std::int64_t index(GridPoint q) const { return (q.x - window_.x0) * window_.height() + (q.y - window_.y0); }

  std::map<GridPoint, std::int64_t> collect(const std::vector<std::int64_t>& v, std::int64_t min) const {
    std::map<GridPoint, std::int64_t> out;
    for (std::int64_t x = window_.x0; x <= window_.x1; ++x)
      for (std::int64_t y = window_.y0; y <= window_.y1; ++y)
        if (std::int64_t k = v[index({x, y})]; k >= min) out.emplace(GridPoint{x, y}, k);
    return out;
  }

  void reallocate(Box target) {
    std::int64_t base = std::max<std::int64_t>(16, 4 * nb_->reach());
    std::int64_t mx = std::max(base, window_.width() / 2), my = std::max(base, window_.height() / 2);
    Box next{target.x0 - mx, target.y0 - my, target.x1 + mx, target.y1 + my};
    if (next.width() * next.height() > kMaxWindowCells) {
      if (!nb_->has_noncollinear_pair()) throw NonConvergent("collinear neighborhood drifts without bound");
      throw BudgetExhausted("simulation window exceeds the cell limit");
    }
    std::size_t size = static_cast<std::size_t>(next.width() * next.height());
    std::vector<std::int64_t> g(size, 0), f(size, 0), t(size, -1);
    if (!window_.empty()) {
      for (std::int64_t x = window_.x0; x <= window_.x1; ++x)
        for (std::int64_t y = window_.y0; y <= window_.y1; ++y) {
          std::int64_t from = index({x, y});
          std::int64_t to = (x - next.x0) * next.height() + (y - next.y0);
          g[to] = grains_[from], f[to] = fires_[from], t[to] = first_[from];
        }
    }
    window_ = next;
    grains_ = std::move(g), fires_ = std::move(f), first_ = std::move(t);
    offsets_.clear();
    for (const auto& v : nb_->vectors()) offsets_.push_back(v.x * window_.height() + v.y);
  }

  const Neighborhood* nb_;
  std::int64_t p_;
  Box window_;
  std::vector<std::int64_t> grains_, fires_, first_;
  std::vector<std::int64_t> offsets_;
};

}  // namespace detail

// Step-by-step parallel evolution F^t(c), exposing Act at every time.
class ParallelRun {
 public:
  ParallelRun(const Configuration& c, const Neighborhood& nb) : nb_(nb), lattice_(c, nb_) {
    active_ = lattice_.unstable();
    std::sort(active_.begin(), active_.end());
  }

  ParallelRun(const ParallelRun&) = delete;  // the lattice points at nb_
  ParallelRun& operator=(const ParallelRun&) = delete;

  const Neighborhood& neighborhood() const { return nb_; }
  const std::vector<GridPoint>& active() const { return active_; }
  bool is_stable() const { return active_.empty(); }
  std::int64_t time() const { return time_; }

  void step() {
    for (const auto& q : active_) lattice_.reserve_around(q);
    for (const auto& q : active_) lattice_.topple(q, time_);
    std::vector<GridPoint> touched = active_;
    for (const auto& q : active_) lattice_.deliver(q, [&](GridPoint u) { touched.push_back(u); });
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    active_.clear();
    for (const auto& u : touched)
      if (lattice_.grains(u) >= lattice_.p()) active_.push_back(u);
    ++time_;
  }

  std::int64_t grains(GridPoint q) const { return lattice_.grains(q); }
  std::int64_t fire_count(GridPoint q) const { return lattice_.fires(q); }
  Configuration configuration() const { return lattice_.configuration(); }
  std::map<GridPoint, std::int64_t> fire_counts() const { return lattice_.fire_counts(); }
  // Parallel step index at which each fired vertex fired first.
  std::map<GridPoint, std::int64_t> first_fire_times() const { return lattice_.first_times(); }

 private:
  Neighborhood nb_;
  detail::Lattice lattice_;
  std::vector<GridPoint> active_;
  std::int64_t time_ = 0;
};

inline std::vector<GridPoint> active_set(const Configuration& c, const Neighborhood& nb) {
  std::vector<GridPoint> out;
  for (const auto& [q, g] : c)
    if (g >= static_cast<std::int64_t>(nb.p())) out.push_back(q);
  return out;
}

// One application of the parallel rule F.
inline StepResult parallel_step(const Configuration& c, const Neighborhood& nb) {
  StepResult r{c, active_set(c, nb)};
  auto p = static_cast<std::int64_t>(nb.p());
  for (const auto& q : r.fired) {
    r.next.set(q, r.next.at(q) - p);
    for (const auto& d : nb.vectors()) r.next.add_grains(q + d, 1);
  }
  return r;
}

namespace detail {
[[noreturn]] inline void out_of_budget(const Neighborhood& nb, std::int64_t budget, const char* unit) {
  std::string what = "no stable configuration within " + std::to_string(budget) + " " + unit;
  if (!nb.has_noncollinear_pair()) throw NonConvergent(what + " (all movement vectors are collinear)");
  throw BudgetExhausted(what);
}
}  // namespace detail

inline Stabilization stabilize(const Configuration& c, const Neighborhood& nb,
                               std::optional<std::int64_t> budget = std::nullopt) {
  std::int64_t limit = budget.value_or(kDefaultStepBudget);
  ParallelRun run(c, nb);
  while (!run.is_stable()) {
    if (run.time() >= limit) detail::out_of_budget(nb, limit, "parallel steps");
    run.step();
  }
  return {run.configuration(), {run.fire_counts(), run.time()}};
}

// One unstable vertex fires at a time, chosen uniformly by a seeded generator.
// Odometer::steps counts individual firings here.
inline Stabilization stabilize_sequential(const Configuration& c, const Neighborhood& nb, std::uint64_t order_seed,
                                          std::optional<std::int64_t> budget = std::nullopt) {
  std::int64_t limit = budget.value_or(kDefaultFiringBudget);
  detail::Lattice lattice(c, nb);
  std::mt19937_64 rng(order_seed);
  std::vector<GridPoint> pool = lattice.unstable();
  std::int64_t firings = 0;
  while (!pool.empty()) {
    if (firings >= limit) detail::out_of_budget(nb, limit, "firings");
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::size_t k = pick(rng);
    GridPoint q = pool[k];
    pool[k] = pool.back();
    pool.pop_back();
    lattice.reserve_around(q);
    lattice.fire(q, firings, [&](GridPoint u) { pool.push_back(u); });
    if (lattice.grains(q) >= lattice.p()) pool.push_back(q);
    ++firings;
  }
  return {lattice.configuration(), {lattice.fire_counts(), firings}};
}

}  // namespace sandpile
