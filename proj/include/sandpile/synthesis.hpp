#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "configuration.hpp"
#include "crossing.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "neighborhood.hpp"
#include "rational.hpp"
#include "shape.hpp"

namespace sandpile {

// Continuous part of the construction. h1 is the origin and h2 = h; the
// vertical signal runs from v1 to v2 = v1 + v and must cross ]h1, h2[.
struct CrossingPlan {
  Point2 h, v_e, s2_y, v, v1, v2;
  Rational epsilon;
  int plan_case = 1;  // 1: v taken in quadrant I of the (h, s2_y) frame; 2: v = v_e
};

namespace detail {

// Frame coordinates of q: q = a*h + b*s2_y.
inline std::pair<Rational, Rational> frame_of(const CrossingPlan& p, const Point2& q) {
  return {dot(q, p.h) / norm2(p.h), dot(q, p.s2_y) / norm2(p.s2_y)};
}

// Disk of radius sqrt(delta2) around q inside one primitive (conservative).
inline bool has_clearance(const Shape& s, const Point2& q, const Rational& delta2) {
  Rational delta = sqrt_upper(delta2, 40);
  for (const auto& prim : s.primitives()) {
    if (!Shape::primitive_contains(prim, q)) continue;
    bool ok = true;
    for (const auto& h : prim.cuts) {
      Rational v = h.a * q.x + h.b * q.y - h.c;
      ok = ok && v > 0 && v * v >= delta2 * (h.a * h.a + h.b * h.b);
    }
    if (const auto* d = std::get_if<Disk>(&prim.body)) {
      Rational room = d->radius - delta;
      ok = ok && room > 0 && norm2(q - d->center) <= room * room;
    } else {
      const auto& v = std::get<ConvexPolygon>(prim.body).vertices;
      for (std::size_t i = 0; i < v.size() && ok; ++i) {
        Point2 e = v[(i + 1) % v.size()] - v[i];
        Rational c = cross(e, q - v[i]);
        ok = norm2(e) > 0 && c > 0 && c * c >= delta2 * norm2(e);
      }
    }
    if (ok) return true;
  }
  return false;
}

// Open segments ]a,b[ and ]c,d[ cross at a single interior point.
inline bool open_segments_cross(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  Rational d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  Rational d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

inline constexpr int kFrameGrid = 32;
inline constexpr int kMaxHalvings = 40;

}  // namespace detail

// Checks the two plan predicates: v1 does not reach h2, and the segments cross.
inline bool plan_is_valid(const Shape& s, const CrossingPlan& p) {
  return !s.contains(p.h - p.v1) && detail::open_segments_cross(p.v1, p.v2, Point2{0, 0}, p.h);
}

inline CrossingPlan plan_crossing_vectors(const Shape& s) {
  if (!is_non_flat(s).non_flat) throw FlatShape("crossing plan needs a non-flat shape");
  CrossingPlan p;
  p.h = longest_vector(s);
  p.v_e = max_orthogonal_vector(s, p.h);
  p.s2_y = p.v_e - (dot(p.v_e, p.h) / norm2(p.h)) * p.h;

  // Case 1: a fat point of quadrant I, maximizing min(2a, b) (room for both
  // the crossing and the vertical half-length), then b, then a.
  Rational delta2 = norm2(p.h) / (detail::kFrameGrid * detail::kFrameGrid);
  std::optional<std::array<Rational, 3>> best;
  Rational best_a, best_b;
  for (int i = 1; i <= detail::kFrameGrid; ++i)
    for (int j = 1; j <= detail::kFrameGrid; ++j) {
      Rational a(i, detail::kFrameGrid), b(j, detail::kFrameGrid);
      Point2 q = a * p.h + b * p.s2_y;
      if (!detail::has_clearance(s, q, delta2)) continue;
      std::array<Rational, 3> key{std::min(Rational(2 * a), b), b, a};
      if (!best || key > *best) best = key, best_a = a, best_b = b;
    }
  if (best) {
    p.plan_case = 1;
    p.v = best_a * p.h + best_b * p.s2_y;
    // epsilon*|h| starts at a quarter of the vertical half-length b*|s2_y|/2
    Rational ratio = sqrt_lower(norm2(p.s2_y) / norm2(p.h), 30);
    p.epsilon = best_b * ratio / 8;
    for (int k = 0; k <= detail::kMaxHalvings; ++k, p.epsilon /= 2) {
      p.v1 = Rational(-best_b / 2) * p.s2_y + p.epsilon * p.h;
      p.v2 = p.v1 + p.v;
      if (plan_is_valid(s, p)) return p;
    }
  }
  p.plan_case = 2;
  p.epsilon = 0;
  p.v = p.v_e;
  p.v1 = Rational(1, 2) * p.h - Rational(1, 2) * p.v_e;
  p.v2 = p.v1 + p.v;
  if (!plan_is_valid(s, p)) throw PlanFailure("neither crossing-vector case validates");
  return p;
}

enum class Signal { H, V };  // H runs along h (the 6/2 gadget side), V along v_e

inline const char* signal_name(Signal s) { return s == Signal::H ? "h" : "v"; }

struct PlacedCell {
  Signal signal;
  int stage;          // firing order along the signal's wire
  std::int64_t need;  // grains missing to fire: the cell holds p - need
};

// Cells placed so far, with the number of cells of each signal reaching each
// placed cell kept up to date.
class Layout {
 public:
  explicit Layout(Neighborhood nb) : nb_(std::move(nb)) {}

  const Neighborhood& neighborhood() const { return nb_; }
  const std::map<GridPoint, PlacedCell>& cells() const { return cells_; }
  bool used(GridPoint u) const { return cells_.count(u) != 0; }
  bool reaches(GridPoint u, GridPoint w) const { return nb_.contains(w - u); }

  void place(GridPoint u, Signal sig, int stage, std::int64_t need) {
    if (used(u)) throw GeometryConflict("cell placed twice");
    std::array<std::int64_t, 2> in{0, 0};
    for (auto& [w, c] : cells_) {
      if (reaches(u, w)) ++incoming_[w][index(sig)];
      if (reaches(w, u)) ++in[index(c.signal)];
    }
    cells_.emplace(u, PlacedCell{sig, stage, need});
    incoming_[u] = in;
  }

  // u can join `sig` needing `need` grains: the other signal cannot fire it,
  // and it does not push any placed cell of the other signal over its need.
  bool ok(GridPoint u, Signal sig, std::int64_t need) const {
    if (used(u)) return false;
    std::int64_t stray = 0;
    for (const auto& [w, c] : cells_) {
      if (c.signal == sig) continue;
      if (reaches(w, u) && ++stray >= need) return false;
      if (reaches(u, w) && incoming_.at(w)[index(sig)] + 1 >= c.need) return false;
    }
    return true;
  }

  std::int64_t incoming(GridPoint w, Signal sig) const { return incoming_.at(w)[index(sig)]; }

  std::vector<GridPoint> stage_cells(Signal sig, int stage) const {
    std::vector<GridPoint> out;
    for (const auto& [u, c] : cells_)
      if (c.signal == sig && c.stage == stage) out.push_back(u);
    return out;
  }

  std::pair<int, int> stage_range(Signal sig) const {
    int lo = INT32_MAX, hi = INT32_MIN;
    for (const auto& [u, c] : cells_)
      if (c.signal == sig) lo = std::min(lo, c.stage), hi = std::max(hi, c.stage);
    return {lo, hi};
  }

 private:
  static std::size_t index(Signal s) { return s == Signal::H ? 0 : 1; }

  Neighborhood nb_;
  std::map<GridPoint, PlacedCell> cells_;
  std::map<GridPoint, std::array<std::int64_t, 2>> incoming_;
};

struct Gadget {
  std::vector<GridPoint> H1, V1;
  GridPoint h2, v2;
};

struct WireStage {
  Signal signal;
  int stage;
  std::vector<GridPoint> cells;
  std::int64_t grains;
};

// Which border pair each signal connects.
struct Orientation {
  Side h_entry = Side::West, v_entry = Side::North;
};

struct Synthesis {
  Configuration configuration;
  CrossingSpec spec;
  Neighborhood neighborhood;
  CrossingPlan plan;
  Rational ratio;
  Orientation orientation;
  Gadget gadget;                   // in output coordinates
  std::vector<WireStage> stages;  // in output coordinates, by signal then stage
};

namespace detail {

inline Rational dist2(GridPoint u, const Point2& q) { return norm2(to_point(u) - q); }

inline std::vector<GridPoint> by_distance(std::vector<GridPoint> cells, const Point2& anchor) {
  std::vector<std::pair<Rational, GridPoint>> keyed;
  keyed.reserve(cells.size());
  for (const auto& u : cells) keyed.push_back({dist2(u, anchor), u});
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return a.first < b.first || (a.first == b.first && a.second < b.second);
  });
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = keyed[i].second;
  return cells;
}

inline std::vector<GridPoint> lattice_disk(const Point2& center, const Rational& radius) {
  std::vector<GridPoint> out;
  auto x0 = floor_int(center.x - radius).convert_to<std::int64_t>(), x1 = ceil_int(center.x + radius).convert_to<std::int64_t>();
  auto y0 = floor_int(center.y - radius).convert_to<std::int64_t>(), y1 = ceil_int(center.y + radius).convert_to<std::int64_t>();
  for (std::int64_t x = x0; x <= x1; ++x)
    for (std::int64_t y = y0; y <= y1; ++y)
      if (dist2({x, y}, center) <= radius * radius) out.push_back({x, y});
  return out;
}

// Places k cells of `sig` at `stage`, each reaching every cell of `succ`,
// nearest the anchor first.
inline std::vector<GridPoint> place_stage(Layout& L, Signal sig, int stage, std::int64_t need, const Point2& anchor,
                                          const std::vector<GridPoint>& succ, std::size_t k, const char* what,
                                          const std::vector<GridPoint>& avoid = {}) {
  std::vector<GridPoint> cand;
  for (const auto& d : L.neighborhood().vectors()) {
    GridPoint u = succ.front() - d;
    if (std::all_of(succ.begin(), succ.end(), [&](GridPoint s) { return L.reaches(u, s); }) &&
        std::none_of(avoid.begin(), avoid.end(), [&](GridPoint a) { return L.reaches(u, a); }))
      cand.push_back(u);
  }
  std::vector<GridPoint> out;
  for (const auto& u : by_distance(cand, anchor)) {
    if (out.size() == k) break;
    if (L.ok(u, sig, need)) L.place(u, sig, stage, need), out.push_back(u);
  }
  if (out.size() < k)
    throw RatioTooSmall(std::string(what) + ": found " + std::to_string(out.size()) + " of " + std::to_string(k) +
                        " cells");
  return out;
}

// A single cell reached by `prev` (forward) or reaching it (backward).
inline GridPoint place_next(Layout& L, Signal sig, int stage, GridPoint prev, bool forward, const Point2& anchor,
                            const char* what) {
  std::vector<GridPoint> cand;
  for (const auto& d : L.neighborhood().vectors()) cand.push_back(forward ? prev + d : prev - d);
  for (const auto& u : by_distance(cand, anchor))
    if (L.ok(u, sig, 1)) {
      L.place(u, sig, stage, 1);
      return u;
    }
  throw RatioTooSmall(std::string(what) + ": no admissible cell");
}

inline Point2 scaled(const Rational& r, const Point2& q) { return r * q; }

// Anchor is strictly farther than |h| from both h1 = 0 and h2 = h.
inline bool outside_gadget_disks(const CrossingPlan& p, const Point2& q) {
  return norm2(q) > norm2(p.h) && norm2(q - p.h) > norm2(p.h);
}

inline constexpr int kMaxVerticalStages = 64;

}  // namespace detail

// The crossing-part conditions on discrete data; empty when all hold.
inline std::vector<std::string> gadget_violations(const Neighborhood& nb, const Gadget& g) {
  std::vector<std::string> out;
  auto reaching = [&](const std::vector<GridPoint>& from, GridPoint to) {
    return std::count_if(from.begin(), from.end(), [&](GridPoint u) { return nb.contains(to - u); });
  };
  std::vector<GridPoint> vs = g.V1, hs = g.H1;
  vs.push_back(g.v2);
  hs.push_back(g.h2);
  if (reaching(g.V1, g.h2) != 0) out.push_back("a V1 cell reaches h2");
  if (!(static_cast<std::int64_t>(g.H1.size()) > reaching({g.v2}, g.h2))) out.push_back("|H1| <= |{v2} & N-(h2)|");
  for (auto u : g.H1)
    if (reaching(vs, u) >= 6) out.push_back("vertical cells fire an H1 cell");
  for (auto u : vs)
    if (reaching(hs, u) >= 4) out.push_back("horizontal cells fire a vertical gadget cell");
  if (reaching(g.H1, g.h2) != 2) out.push_back("h2 is not fed by both H1 cells");
  for (auto u : g.V1)
    if (!nb.contains(g.v2 - u)) out.push_back("v2 is not fed by every V1 cell");
  return out;
}

struct Materialized {
  Layout layout;
  Gadget gadget;
};

// The crossing part: H1 = {h1, one more}, h2, V1 (4 cells), v2, with grain
// levels p-6, p-2, p-4, p-4.
inline Materialized materialize_gadget(const CrossingPlan& plan, const Shape& shape, const Rational& r) {
  Neighborhood nb = [&] {
    try {
      return discretize(shape, r);
    } catch (const EmptyNeighborhood&) {
      throw RatioTooSmall("empty neighborhood");
    }
  }();
  Layout L(nb);
  Gadget g;
  using detail::by_distance;
  const GridPoint origin{0, 0};

  g.h2 = by_distance(nb.vectors(), detail::scaled(r, plan.h)).front();
  std::vector<GridPoint> partner;
  for (const auto& d : nb.vectors()) {
    GridPoint u = g.h2 - d;
    if (u != origin && u != g.h2) partner.push_back(u);
  }
  if (partner.empty()) throw RatioTooSmall("no second cell for H1");
  g.H1 = {origin, by_distance(partner, {0, 0}).front()};
  for (const auto& u : g.H1) L.place(u, Signal::H, 2, 6);
  L.place(g.h2, Signal::H, 3, 2);

  Rational window = std::max(Rational(2), Rational(3, 20) * r);
  Point2 a1 = detail::scaled(r, plan.v1), a2 = detail::scaled(r, plan.v2);
  for (const auto& v2 : by_distance(detail::lattice_disk(a2, window), a2)) {
    if (L.used(v2)) continue;
    std::vector<GridPoint> cand;
    for (const auto& u : detail::lattice_disk(a1, window))
      if (!L.used(u) && u != v2 && L.reaches(u, v2) && !L.reaches(u, g.h2)) cand.push_back(u);
    if (cand.size() < 4) continue;
    cand = by_distance(cand, a1);
    g.V1.assign(cand.begin(), cand.begin() + 4);
    g.v2 = v2;
    break;
  }
  if (g.V1.empty()) throw RatioTooSmall("no V1/v2 placement near the plan anchors");
  if (auto bad = gadget_violations(nb, g); !bad.empty()) throw RatioTooSmall("crossing part: " + bad.front());
  for (const auto& u : g.V1) L.place(u, Signal::V, 2, 4);
  L.place(g.v2, Signal::V, 3, 4);
  return {std::move(L), g};
}

namespace detail {

inline MovementVector most_along(const Neighborhood& nb, GridPoint axis) {
  GridPoint perp{-axis.y, axis.x};
  MovementVector best = nb.vectors().front();
  auto key = [&](MovementVector d) {
    std::int64_t side = dot(d, perp);
    return std::tuple{dot(d, axis), -std::abs(side), dot(d, GridPoint{1, 1})};
  };
  for (const auto& d : nb.vectors())
    if (key(d) > key(best)) best = d;
  return best;
}

inline GridPoint exit_axis(Side entry) { return entry == Side::West ? GridPoint{1, 0} : GridPoint{0, 1}; }

// The end cell of a wire is alone at its stage and strictly beyond every
// other cell along the axis (minimum for the entry, maximum for the exit).
inline bool end_is_extreme(const Layout& L, Signal sig, bool entry_end, GridPoint axis) {
  auto [lo, hi] = L.stage_range(sig);
  auto ends = L.stage_cells(sig, entry_end ? lo : hi);
  if (ends.size() != 1) return false;
  std::int64_t at = dot(ends[0], axis);
  for (const auto& [u, c] : L.cells())
    if (u != ends[0] && (entry_end ? dot(u, axis) <= at : dot(u, axis) >= at)) return false;
  return true;
}

inline GridPoint end_cell(const Layout& L, Signal sig, bool entry_end) {
  auto [lo, hi] = L.stage_range(sig);
  return L.stage_cells(sig, entry_end ? lo : hi).front();
}

}  // namespace detail

// Feeding stages (H0, h_-1; V0, ..., v_-i-1), exit cells h3/v3, border tails,
// squaring, and translation into the n x n square.
inline Synthesis build_wires(const CrossingPlan& plan, Materialized m, const Rational& r) {
  Layout& L = m.layout;
  const Gadget& g = m.gadget;
  using detail::scaled;
  const Point2 origin{0, 0};

  std::vector<GridPoint> crossing_part = g.V1;
  crossing_part.push_back(g.v2);
  crossing_part.push_back(g.h2);
  auto H0 = detail::place_stage(L, Signal::H, 1, 1, scaled(r, origin - plan.h), g.H1, 6, "H0", crossing_part);
  detail::place_stage(L, Signal::H, 0, 1, scaled(r, origin - Rational(2) * plan.h), H0, 1, "h_-1");

  // vertical feeding stages of 4 cells until the anchor leaves both |h|-disks
  std::vector<GridPoint> succ = g.V1;
  int stage = 1;
  for (int j = 0;; ++j, --stage) {
    if (j == detail::kMaxVerticalStages) throw GeometryConflict("vertical stages never leave the gadget disks");
    Point2 anchor = plan.v1 - Rational(j + 1) * plan.v_e;
    bool last = detail::outside_gadget_disks(plan, anchor);
    succ = detail::place_stage(L, Signal::V, stage, 1, scaled(r, anchor), succ, 4, "V stage");
    if (last) {
      detail::place_stage(L, Signal::V, stage - 1, 1, scaled(r, anchor - plan.v_e), succ, 1, "v_-i-1");
      break;
    }
  }

  detail::place_next(L, Signal::H, 4, g.h2, true, scaled(r, plan.h + plan.h), "h3");
  detail::place_next(L, Signal::V, 4, g.v2, true, scaled(r, plan.v2 + plan.v_e), "v3");

  Orientation o;
  if (plan.h.x > 0 && plan.v_e.y > 0)
    o = {Side::West, Side::North};
  else if (plan.h.y > 0 && plan.v_e.x > 0)
    o = {Side::North, Side::West};
  else
    throw GeometryConflict("h and v_e do not point toward two mirror borders");
  GridPoint h_axis = detail::exit_axis(o.h_entry), v_axis = detail::exit_axis(o.v_entry);
  const Neighborhood& nb = L.neighborhood();
  MovementVector h_step = detail::most_along(nb, h_axis), v_step = detail::most_along(nb, v_axis);
  if (dot(h_step, h_axis) <= 0 || dot(v_step, v_axis) <= 0) throw GeometryConflict("no vector toward a border");

  auto extend = [&](Signal sig, bool entry_end, MovementVector step) {
    auto [lo, hi] = L.stage_range(sig);
    GridPoint prev = detail::end_cell(L, sig, entry_end);
    Point2 anchor = to_point(entry_end ? prev - step : prev + step);
    detail::place_next(L, sig, entry_end ? lo - 1 : hi + 1, prev, !entry_end, anchor, "border tail");
  };
  for (int round = 0;; ++round) {
    if (round > 4096) throw GeometryConflict("border tails do not terminate");
    bool done = true;
    for (Signal sig : {Signal::H, Signal::V}) {
      GridPoint axis = sig == Signal::H ? h_axis : v_axis;
      MovementVector step = sig == Signal::H ? h_step : v_step;
      for (bool entry_end : {true, false})
        if (!detail::end_is_extreme(L, sig, entry_end, axis)) extend(sig, entry_end, step), done = false;
    }
    if (done) break;
  }

  // square up: lengthen the shorter wire's exit tail with exact steps
  auto span = [&](Signal sig, GridPoint axis) {
    return dot(detail::end_cell(L, sig, false), axis) - dot(detail::end_cell(L, sig, true), axis);
  };
  Signal we = o.h_entry == Side::West ? Signal::H : Signal::V;
  Signal ns = we == Signal::H ? Signal::V : Signal::H;
  GridPoint ex{1, 0}, sy{0, 1};
  std::int64_t gap = span(ns, sy) - span(we, ex);
  Signal shorter = gap > 0 ? we : ns;
  GridPoint axis = gap > 0 ? ex : sy;
  GridPoint other_axis = gap > 0 ? sy : ex;
  gap = std::abs(gap);
  while (gap > 0) {
    std::int64_t best = 0;
    for (const auto& d : nb.vectors())
      if (dot(d, axis) <= gap) best = std::max(best, dot(d, axis));
    if (best <= 0) throw GeometryConflict("cannot square the crossing");
    std::vector<MovementVector> opts;
    for (const auto& d : nb.vectors())
      if (dot(d, axis) == best) opts.push_back(d);
    std::sort(opts.begin(), opts.end(), [&](MovementVector a, MovementVector b) {
      auto ka = std::abs(dot(a, other_axis)), kb = std::abs(dot(b, other_axis));
      return ka < kb || (ka == kb && a < b);
    });
    auto [lo, hi] = L.stage_range(shorter);
    GridPoint prev = detail::end_cell(L, shorter, false);
    bool placed = false;
    for (const auto& d : opts) {
      GridPoint u = prev + d;
      if (!L.ok(u, shorter, 1)) continue;
      L.place(u, shorter, hi + 1, 1);
      bool extremes = true;
      for (Signal sig : {Signal::H, Signal::V})
        for (bool entry_end : {true, false})
          extremes = extremes && detail::end_is_extreme(L, sig, entry_end, sig == Signal::H ? h_axis : v_axis);
      if (!extremes) throw GeometryConflict("squaring step breaks a border extreme");
      placed = true;
      break;
    }
    if (!placed) throw GeometryConflict("no admissible squaring step");
    gap -= best;
  }

  GridPoint west = detail::end_cell(L, we, true), north = detail::end_cell(L, ns, true);
  GridPoint east = detail::end_cell(L, we, false), south = detail::end_cell(L, ns, false);
  GridPoint shift{-west.x, -north.y};
  std::int64_t n = east.x - west.x + 1;
  if (south.y - north.y + 1 != n) throw SynthesisBug("squaring left a rectangle");

  Synthesis out{Configuration{},
                CrossingSpec(n, north.x + shift.x, east.y + shift.y, south.x + shift.x, west.y + shift.y),
                nb,
                plan,
                r,
                o,
                {},
                {}};
  auto p = static_cast<std::int64_t>(nb.p());
  std::map<std::pair<int, int>, WireStage> stages;
  for (const auto& [u, c] : L.cells()) {
    out.configuration.set(u + shift, p - c.need);
    auto& st = stages[{c.signal == Signal::H ? 0 : 1, c.stage}];
    st.signal = c.signal, st.stage = c.stage, st.grains = p - c.need;
    st.cells.push_back(u + shift);
  }
  for (auto& [k, st] : stages) out.stages.push_back(std::move(st));
  auto moved = [&](std::vector<GridPoint> v) {
    for (auto& u : v) u = u + shift;
    return v;
  };
  out.gadget = {moved(g.H1), moved(g.V1), g.h2 + shift, g.v2 + shift};
  return out;
}

namespace detail {

// Sufficient local conditions for the global crossing property; a failure
// names the offending cell.
inline void check_locally(const Synthesis& s) {
  const Neighborhood& nb = s.neighborhood;
  auto p = static_cast<std::int64_t>(nb.p());
  std::map<GridPoint, std::pair<Signal, int>> where;
  for (const auto& st : s.stages)
    for (const auto& u : st.cells) where[u] = {st.signal, st.stage};
  auto need_of = [&](GridPoint u) { return p - s.configuration.at(u); };
  auto fail = [](const std::string& what, GridPoint u) {
    throw GeometryConflict(what + " at (" + std::to_string(u.x) + "," + std::to_string(u.y) + ")");
  };
  for (const auto& [u, sc] : where) {
    auto [sig, stage] = sc;
    std::int64_t from_prev = 0, from_early = 0, stray = 0;
    std::size_t prev_size = 0;
    for (const auto& [w, wc] : where) {
      if (!nb.contains(u - w)) {
        if (wc.first == sig && wc.second == stage - 1) ++prev_size;
        continue;
      }
      if (wc.first != sig)
        ++stray;
      else if (wc.second == stage - 1)
        ++from_prev, ++prev_size;
      else if (wc.second < stage - 1)
        ++from_early;
    }
    bool first = std::none_of(where.begin(), where.end(), [&](const auto& kv) {
      return kv.second.first == sig && kv.second.second < stage;
    });
    if (!first && from_prev < need_of(u)) fail("stage is not fed by its predecessor", u);
    if (stray >= need_of(u)) fail("other signal fires a wire cell", u);
    if (from_early >= need_of(u)) fail("wire cell fires ahead of its stage", u);
  }
  for (Signal sig : {Signal::H, Signal::V}) {
    std::unordered_map<GridPoint, std::int64_t, GridPointHash> received;
    for (const auto& [u, sc] : where)
      if (sc.first == sig)
        for (const auto& d : nb.vectors()) ++received[u + d];
    for (const auto& [x, k] : received)
      if (!where.count(x) && k >= p) fail("empty cell collects a full load", x);
  }
}

}  // namespace detail

// Informational bounds in the spirit of the existence proof: ratios from which
// small disks (radius epsilon/2, or |h|/8 when epsilon is 0) around the stage
// anchors hold the stage sizes.
struct StageRatios {
  Rational r1, r2, r3, r4;
  Rational max() const { return std::max({r1, r2, r3, r4}); }
};

inline StageRatios stage_ratios(const CrossingPlan& plan) {
  Rational rad = plan.epsilon > 0 ? plan.epsilon / 2 : sqrt_lower(norm2(plan.h), 20) / 8;
  auto around = [&](const Point2& c, std::size_t k) { return find_ratio_for_count(Shape::disk(c, rad), k); };
  const Point2 origin{0, 0};
  StageRatios s;
  s.r1 = std::max(around(origin, 2), around(plan.v1, 4));
  s.r2 = around(origin - plan.h, 6);
  s.r3 = around(plan.v1 - plan.v_e, 4);
  s.r4 = std::max({around(origin - Rational(2) * plan.h, 1), around(plan.h + plan.h, 1),
                   around(plan.v2 + plan.v_e, 1)});
  return s;
}

namespace detail {

inline Synthesis assemble(const Shape& shape, const Rational& r, const CrossingPlan& plan) {
  if (r <= 0) throw InvalidArgument("ratio must be positive");
  Synthesis s = build_wires(plan, materialize_gadget(plan, shape, r), r);
  check_locally(s);
  auto report = verify_crossing(s.configuration, s.neighborhood, s.spec);
  if (!report.verdict()) throw SynthesisBug("local checks passed but the assembled configuration is not a crossing");
  return s;
}

}  // namespace detail

// Plan, gadget, wires, local checks, then the mandatory crossing verification.
inline Synthesis synthesize(const Shape& shape, const Rational& r, const CrossingPlan& plan) {
  try {
    return detail::assemble(shape, r, plan);
  } catch (const RatioTooSmall& e) {
    throw RatioTooSmall(std::string(e.what()) + " at r = " + format_rational(r) +
                        " (stage ratios give r0 = " + format_rational(stage_ratios(plan).max()) + ")");
  }
}

inline Synthesis synthesize(const Shape& shape, const Rational& r) {
  return synthesize(shape, r, plan_crossing_vectors(shape));
}

struct RatioSearch {
  Rational ratio;
  std::vector<std::pair<Rational, bool>> spot_checks;
  std::size_t attempts = 0;
};

// Smallest r in {step, 2 step, ..., r_max} where synthesis succeeds, then spot
// checks at min(r_max, 2r) and three seeded random larger grid points.
inline RatioSearch find_min_working_ratio(const Shape& shape, const Rational& r_max, const Rational& step,
                                          std::uint64_t seed = 1) {
  if (step <= 0 || r_max <= 0) throw InvalidArgument("step and r_max must be positive");
  CrossingPlan plan = plan_crossing_vectors(shape);
  auto works = [&](const Rational& r) {
    try {
      detail::assemble(shape, r, plan);
      return true;
    } catch (const RatioTooSmall&) {
      return false;
    } catch (const GeometryConflict&) {
      return false;
    }
  };
  RatioSearch out;
  std::int64_t last = floor_int(r_max / step).convert_to<std::int64_t>();
  std::int64_t found = 0;
  for (std::int64_t k = 1; k <= last && !found; ++k) {
    ++out.attempts;
    if (works(step * k)) found = k;
  }
  if (!found) throw NoRatioFound("no sampled ratio up to " + format_rational(r_max) + " synthesizes a crossing");
  out.ratio = step * found;
  std::vector<std::int64_t> checks{std::min(last, 2 * found)};
  if (found < last) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> pick(found + 1, last);
    for (int i = 0; i < 3; ++i) checks.push_back(pick(rng));
  }
  for (auto k : checks) out.spot_checks.push_back({step * k, works(step * k)});
  return out;
}

}  // namespace sandpile
