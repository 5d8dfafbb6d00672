#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "neighborhood.hpp"
#include "rational.hpp"
#include "shape.hpp"

namespace sandpile {

namespace detail {

inline BigInt lcm_denoms(std::initializer_list<const Rational*> qs) {
  BigInt l = 1;
  for (const Rational* q : qs) l = boost::multiprecision::lcm(l, denom(*q));
  return l;
}

// One primitive's membership test for (x/r, y/r), cleared of denominators so
// that every lattice point is classified with integer arithmetic.
class ScaledPrimitive {
 public:
  ScaledPrimitive(const Primitive& prim, const Rational& r) {
    Rational lo_x, hi_x, lo_y, hi_y;
    if (const auto* d = std::get_if<Disk>(&prim.body)) {
      Rational cx = r * d->center.x, cy = r * d->center.y, s = r * r * d->radius * d->radius;
      BigInt den = lcm_denoms({&cx, &cy});
      Rational rhs = s * Rational(den * den);
      disk_ = DiskForm{den, numer(cx * Rational(den)), numer(cy * Rational(den)), denom(rhs), numer(rhs)};
      lo_x = cx - r * d->radius, hi_x = cx + r * d->radius;
      lo_y = cy - r * d->radius, hi_y = cy + r * d->radius;
    } else {
      const auto& v = std::get<ConvexPolygon>(prim.body).vertices;
      lo_x = hi_x = v[0].x, lo_y = hi_y = v[0].y;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Point2& a = v[i];
        Point2 e = v[(i + 1) % v.size()] - a;
        // cross(e, q - a) >= 0  <=>  -e.y*x + e.x*y >= r*(e.x*a.y - e.y*a.x)
        add_linear(-e.y, e.x, r * (e.x * a.y - e.y * a.x), false);
        lo_x = std::min(lo_x, a.x), hi_x = std::max(hi_x, a.x);
        lo_y = std::min(lo_y, a.y), hi_y = std::max(hi_y, a.y);
      }
      add_linear(1, 0, r * lo_x, false);
      add_linear(-1, 0, -r * hi_x, false);
      add_linear(0, 1, r * lo_y, false);
      add_linear(0, -1, -r * hi_y, false);
      lo_x *= r, hi_x *= r, lo_y *= r, hi_y *= r;
    }
    for (const auto& h : prim.cuts) add_linear(h.a, h.b, r * h.c, h.strict);
    box_ = {floor_int(lo_x).convert_to<std::int64_t>(), floor_int(lo_y).convert_to<std::int64_t>(),
            ceil_int(hi_x).convert_to<std::int64_t>(), ceil_int(hi_y).convert_to<std::int64_t>()};
  }

  const Box& box() const { return box_; }

  bool contains(GridPoint g) const {
    BigInt x = g.x, y = g.y;
    for (const auto& l : linear_) {
      BigInt v = l.a * x + l.b * y - l.c;
      if (l.strict ? v <= 0 : v < 0) return false;
    }
    if (disk_) {
      BigInt dx = x * disk_->den - disk_->a, dy = y * disk_->den - disk_->b;
      if (disk_->t * (dx * dx + dy * dy) > disk_->s) return false;
    }
    return true;
  }

 private:
  struct Linear {
    BigInt a, b, c;
    bool strict;
  };
  struct DiskForm {
    BigInt den, a, b, t, s;  // t*((x*den-a)^2 + (y*den-b)^2) <= s
  };

  void add_linear(const Rational& a, const Rational& b, const Rational& c, bool strict) {
    BigInt l = lcm_denoms({&a, &b, &c});
    linear_.push_back({numer(a * Rational(l)), numer(b * Rational(l)), numer(c * Rational(l)), strict});
  }

  std::vector<Linear> linear_;
  std::optional<DiskForm> disk_;
  Box box_;
};

}  // namespace detail

// {(x,y) in Z^2 : (x/r, y/r) in shape} \ {(0,0)}, sorted; may be empty.
inline std::vector<MovementVector> lattice_points(const Shape& s, const Rational& r) {
  if (r <= 0) throw InvalidArgument("ratio must be positive");
  std::vector<MovementVector> out;
  for (const auto& prim : s.primitives()) {
    detail::ScaledPrimitive sp(prim, r);
    const Box& b = sp.box();
    for (std::int64_t x = b.x0; x <= b.x1; ++x)
      for (std::int64_t y = b.y0; y <= b.y1; ++y)
        if ((x || y) && sp.contains({x, y})) out.push_back({x, y});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline Neighborhood discretize(const Shape& s, const Rational& r) {
  auto pts = lattice_points(s, r);
  if (pts.empty()) throw EmptyNeighborhood("no lattice point of the scaled shape besides the origin");
  return Neighborhood(std::move(pts));
}

// Discrete side of a partition: the parts' lattice sets are pairwise disjoint
// and their union is the whole's.
inline bool partition_check(const std::vector<Shape>& parts, const Shape& whole, const Rational& r) {
  std::set<GridPoint> seen;
  for (const auto& part : parts)
    for (const auto& q : lattice_points(part, r))
      if (!seen.insert(q).second) return false;
  auto all = lattice_points(whole, r);
  return std::vector<GridPoint>(seen.begin(), seen.end()) == all;
}

namespace detail {

// A primitive as half-planes a*x + b*y >= c (edges and cuts) plus an optional disk.
struct Constraints {
  std::vector<HalfPlane> planes;
  std::optional<Disk> disk;
};

inline Constraints constraints_of(const Primitive& prim) {
  Constraints out{prim.cuts, std::nullopt};
  if (const auto* d = std::get_if<Disk>(&prim.body)) {
    out.disk = *d;
    return out;
  }
  const auto& v = std::get<ConvexPolygon>(prim.body).vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2& a = v[i];
    Point2 e = v[(i + 1) % v.size()] - a;
    if (e.x != 0 || e.y != 0) out.planes.push_back({-e.y, e.x, e.x * a.y - e.y * a.x, false});
  }
  return out;
}

// Certified lower bound on the distance from c to the primitive's boundary;
// not positive when c is outside.
inline Rational clearance(const Constraints& pc, const Point2& c) {
  std::optional<Rational> best;
  auto take = [&](const Rational& v) {
    if (!best || v < *best) best = v;
  };
  for (const auto& h : pc.planes) {
    Rational v = h.a * c.x + h.b * c.y - h.c;
    take(v <= 0 ? v : v / sqrt_upper(h.a * h.a + h.b * h.b, 32));
  }
  if (pc.disk) take(pc.disk->radius - sqrt_upper(norm2(c - pc.disk->center), 32));
  return best.value_or(0);
}

// Lower bound on the radius of a disk inside some primitive: a compass search
// in floating point for a deep center, whose clearance is then certified exactly.
inline Rational inscribed_radius(const Shape& s) {
  Rational best = 0;
  for (const auto& prim : s.primitives()) {
    auto t = primitive_witness(prim);
    if (!t) continue;
    Constraints pc = constraints_of(prim);
    struct Plane {
      double a, b, c, n;
    };
    std::vector<Plane> planes;
    for (const auto& h : pc.planes) {
      double a = h.a.convert_to<double>(), b = h.b.convert_to<double>();
      planes.push_back({a, b, h.c.convert_to<double>(), std::hypot(a, b)});
    }
    auto depth = [&](double x, double y) {
      double v = std::numeric_limits<double>::infinity();
      for (const auto& h : planes) v = std::min(v, (h.a * x + h.b * y - h.c) / h.n);
      if (pc.disk)
        v = std::min(v, pc.disk->radius.convert_to<double>() - std::hypot(x - pc.disk->center.x.convert_to<double>(),
                                                                         y - pc.disk->center.y.convert_to<double>()));
      return v;
    };
    Point2 g = Rational(1, 3) * (t->a + t->b + t->c);
    double x = g.x.convert_to<double>(), y = g.y.convert_to<double>(), here = depth(x, y);
    double step = std::sqrt(std::max({norm2(t->b - t->a), norm2(t->c - t->b), norm2(t->a - t->c)}).convert_to<double>());
    for (int iter = 0; iter < 2000 && step > 1e-9; ++iter) {
      bool moved = false;
      for (int k = 0; k < 16; ++k) {
        double nx = x + step * std::cos(k * std::numbers::pi / 8), ny = y + step * std::sin(k * std::numbers::pi / 8);
        if (double v = depth(nx, ny); v > here) x = nx, y = ny, here = v, moved = true;
      }
      if (!moved) step /= 2;
    }
    // a hair inside, so strict cuts cannot touch the certified disk
    best = std::max(best, clearance(pc, {dyadic(x, 40), dyadic(y, 40)}) * Rational(1023, 1024));
    Rational area2 = abs(t->area2());
    Rational perimeter = sqrt_upper(norm2(t->b - t->a)) + sqrt_upper(norm2(t->c - t->b)) + sqrt_upper(norm2(t->a - t->c));
    best = std::max(best, area2 / perimeter * Rational(1023, 1024));  // incircle r = 2A / P
  }
  return best;
}

// Values t = 1/r with g in the r-scaled primitive. The set is convex in t, so
// one interval; irrational ends are rounded inward.
struct TInterval {
  Rational lo, hi;
  bool lo_closed, hi_closed;
};

inline std::optional<TInterval> t_interval(const Constraints& pc, GridPoint g) {
  TInterval iv{0, 0, false, false};
  bool bounded = false;
  auto raise = [&](const Rational& v, bool closed) {
    if (v > iv.lo || (v == iv.lo && !closed)) iv.lo = v, iv.lo_closed = closed;
  };
  auto lower = [&](const Rational& v, bool closed) {
    if (!bounded || v < iv.hi || (v == iv.hi && !closed)) iv.hi = v, iv.hi_closed = closed;
    bounded = true;
  };
  Rational qx(g.x), qy(g.y);
  for (const auto& h : pc.planes) {
    Rational k = h.a * qx + h.b * qy;  // t*k >= c
    if (k == 0) {
      if (h.strict ? !(0 > h.c) : !(0 >= h.c)) return std::nullopt;
    } else if (k > 0) {
      raise(h.c / k, !h.strict);
    } else {
      lower(h.c / k, !h.strict);
    }
  }
  if (pc.disk) {
    // |q|^2 t^2 - 2 (q.c) t + |c|^2 - R^2 <= 0
    Point2 q{qx, qy};
    Rational a = norm2(q), b = dot(q, pc.disk->center);
    Rational disc = b * b - a * (norm2(pc.disk->center) - pc.disk->radius * pc.disk->radius);
    if (disc < 0) return std::nullopt;
    Rational root = sqrt_lower(disc, 40);
    raise((b - root) / a, true);
    lower((b + root) / a, true);
  }
  if (!bounded || iv.lo > iv.hi || (iv.lo == iv.hi && !(iv.lo_closed && iv.hi_closed))) return std::nullopt;
  return iv;
}

// Simplest rational in [lo, hi] (Stern-Brocot descent), lo <= hi, lo > 0.
inline Rational simplest_between(const Rational& lo, const Rational& hi) {
  BigInt fl = floor_int(lo);
  if (Rational(fl) == lo) return lo;
  if (Rational(fl + 1) <= hi) return Rational(fl + 1);
  Rational frac_lo = lo - Rational(fl), frac_hi = hi - Rational(fl);
  // 1/x for x in [frac_lo, frac_hi] maps to [1/frac_hi, 1/frac_lo]
  return Rational(fl) + 1 / simplest_between(1 / frac_hi, 1 / frac_lo);
}

}  // namespace detail

// Some r0 with |N+_{s,r}| >= k for r >= r0. An inscribed disk of radius rho
// certifies the count beyond r_cert = ceil(sqrt(k+1)) / (rho*sqrt 2) (its axis
// square holds m^2 lattice points). Below that, each lattice point is in r*s
// for an interval of t = 1/r per primitive; sweeping t up from 1/r_cert finds
// where the count first drops under k.
inline Rational find_ratio_for_count(const Shape& s, std::size_t k) {
  if (k == 0) return 1;
  if (!is_non_flat(s).non_flat) throw FlatShape("shape has a zero-area primitive");
  Rational rho = detail::inscribed_radius(s);
  if (rho <= 0) throw FlatShape("no inscribed disk found");
  BigInt m = boost::multiprecision::sqrt(BigInt(k + 1));
  if (m * m < k + 1) ++m;
  const Rational cert = Rational(m) / (rho * sqrt_lower(Rational(2), 32));
  const Rational t_cert = 1 / cert;

  // r*s for r <= r_cert lies in the box spanned by the origin and r_cert*s
  Box reach{0, 0, 0, 0};
  std::vector<detail::Constraints> prims;
  for (const auto& prim : s.primitives()) {
    const Box& b = detail::ScaledPrimitive(prim, cert).box();
    reach = {std::min(reach.x0, b.x0), std::min(reach.y0, b.y0), std::max(reach.x1, b.x1), std::max(reach.y1, b.y1)};
    prims.push_back(detail::constraints_of(prim));
  }

  std::vector<detail::TInterval> spans, own;
  for (std::int64_t x = reach.x0; x <= reach.x1; ++x)
    for (std::int64_t y = reach.y0; y <= reach.y1; ++y) {
      if (!x && !y) continue;
      own.clear();
      for (const auto& pc : prims)
        if (auto iv = detail::t_interval(pc, {x, y}); iv && (iv->hi > t_cert || (iv->hi == t_cert && iv->hi_closed)))
          own.push_back(*iv);
      // a point counts once: merge its overlapping intervals
      std::sort(own.begin(), own.end(), [](const auto& a, const auto& b) {
        return a.lo < b.lo || (a.lo == b.lo && a.lo_closed && !b.lo_closed);
      });
      for (std::size_t i = 0; i < own.size(); ++i) {
        const auto& next = own[i];
        if (i > 0) {
          auto& cur = spans.back();
          if (next.lo < cur.hi || (next.lo == cur.hi && (next.lo_closed || cur.hi_closed))) {
            if (next.hi > cur.hi) cur.hi = next.hi, cur.hi_closed = next.hi_closed;
            else if (next.hi == cur.hi) cur.hi_closed = cur.hi_closed || next.hi_closed;
            continue;
          }
        }
        spans.push_back(next);
      }
    }

  std::vector<Rational> at{t_cert};
  for (const auto& iv : spans) {
    if (iv.lo > t_cert) at.push_back(iv.lo);
    at.push_back(iv.hi);
  }
  std::sort(at.begin(), at.end());
  at.erase(std::unique(at.begin(), at.end()), at.end());
  // prefix sums give the count at t = at[i] and on the gap (at[i], at[i+1])
  std::vector<std::int64_t> point(at.size() + 1, 0), gap(at.size() + 1, 0);
  auto index = [&](const Rational& v) {
    return static_cast<std::size_t>(std::lower_bound(at.begin(), at.end(), v) - at.begin());
  };
  for (const auto& iv : spans) {
    bool before = iv.lo < t_cert;
    std::size_t lo = before ? 0 : index(iv.lo), hi = index(iv.hi);
    std::size_t first = (before || iv.lo_closed) ? lo : lo + 1, last = iv.hi_closed ? hi + 1 : hi;
    if (first < last) ++point[first], --point[last];
    ++gap[lo], --gap[hi];
  }
  // a short rational just above the threshold
  auto snap = [&](const Rational& lo) { return detail::simplest_between(lo, std::min(cert, lo + lo / 16)); };
  const auto need = static_cast<std::int64_t>(k);
  std::int64_t here = 0, after = 0;
  for (std::size_t i = 0; i < at.size(); ++i) {
    here += point[i], after += gap[i];
    if (here < need) {
      // the count holds on [t_cert, at[i]) only
      if (i == 0) return cert;
      return snap((1 / at[i] + 1 / at[i - 1]) / 2);
    }
    if (i + 1 == at.size() || after < need) return snap(1 / at[i]);
  }
  return cert;
}

namespace detail {

// Lexicographic preference used for every tie: larger x, then larger y.
inline bool lex_greater(const Point2& a, const Point2& b) { return a.x > b.x || (a.x == b.x && a.y > b.y); }

inline Point2 nudge_inside(const Primitive& prim, Point2 q) {
  if (Shape::primitive_contains(prim, q)) return q;
  auto poly = primitive_polygon(prim);
  if (poly.empty()) return q;
  Point2 g = vertex_mean(poly);
  Rational eps(1, BigInt(1) << 40);
  return q + eps * (g - q);
}

// Point of the disk at distance up to radius along direction dir (dir != 0):
// exact when |dir| is rational, otherwise pulled inward by the sqrt bound.
inline Point2 toward(const Disk& d, const Point2& dir) {
  Rational len2 = norm2(dir);
  Rational len = exact_sqrt(len2).value_or(sqrt_upper(len2));
  return d.center + (d.radius / len) * dir;
}

// Candidate extremal points: exact at polygon vertices and at rational disk
// extremes, otherwise slightly inside the disk.
inline std::vector<std::pair<Point2, const Primitive*>> candidates(const Shape& s, const Point2& disk_dir) {
  std::vector<std::pair<Point2, const Primitive*>> out;
  for (const auto& prim : s.primitives()) {
    if (const auto* d = std::get_if<Disk>(&prim.body)) {
      for (const Point2& dir : {disk_dir, -disk_dir}) {
        if (dir.x == 0 && dir.y == 0) continue;
        Point2 q = toward(*d, dir);
        if (Shape::primitive_contains(prim, q)) out.push_back({q, &prim});
      }
      if (!prim.cuts.empty())
        for (const auto& v : primitive_polygon(prim, 1024)) out.push_back({nudge_inside(prim, v), &prim});
    } else {
      for (const auto& v : primitive_polygon(prim)) out.push_back({nudge_inside(prim, v), &prim});
    }
  }
  return out;
}

template <class Score>
Point2 argmax(const std::vector<std::pair<Point2, const Primitive*>>& cands, Score&& score) {
  std::optional<Point2> best;
  Rational best_score;
  for (const auto& [q, prim] : cands) {
    Rational sc = score(q);
    if (!best || sc > best_score || (sc == best_score && lex_greater(q, *best))) best = q, best_score = sc;
  }
  if (!best) throw FlatShape("shape has no extremal point");
  return *best;
}

}  // namespace detail

// A shape point farthest from the origin (the proof's h).
inline Point2 longest_vector(const Shape& s) {
  if (!is_non_flat(s).non_flat) throw FlatShape("longest vector needs a non-flat shape");
  std::vector<std::pair<Point2, const Primitive*>> cands;
  for (const auto& prim : s.primitives()) {
    const auto* d = std::get_if<Disk>(&prim.body);
    if (!d) {
      auto more = detail::candidates(Shape({prim}), {0, 0});
      for (auto& [q, unused] : more) cands.push_back({q, &prim});
      continue;
    }
    // farthest point lies along the center direction; a centered disk ties
    // everywhere on its rim and (radius, 0) wins the x-first tie-break
    Point2 dir = d->center.x == 0 && d->center.y == 0 ? Point2{1, 0} : d->center;
    Point2 q = detail::toward(*d, dir);
    if (Shape::primitive_contains(prim, q)) cands.push_back({q, &prim});
    if (!prim.cuts.empty())
      for (const auto& v : detail::primitive_polygon(prim, 1024)) cands.push_back({detail::nudge_inside(prim, v), &prim});
  }
  return detail::argmax(cands, [](const Point2& q) { return norm2(q); });
}

// A shape point maximizing |cross(h, q)|, i.e. the projection orthogonal to h
// (the proof's v_e); its side of the h-axis is the one called s^2.
inline Point2 max_orthogonal_vector(const Shape& s, const Point2& h) {
  if (h.x == 0 && h.y == 0) throw ZeroVector("h must be non-zero");
  Point2 perp{-h.y, h.x};
  auto cands = detail::candidates(s, perp);
  auto score = [&](const Point2& q) {
    Rational c = cross(h, q);
    return c < 0 ? Rational(-c) : c;
  };
  Point2 best = detail::argmax(cands, score);
  if (score(best) == 0) throw FlatShape("shape lies on the line spanned by h");
  return best;
}

// A neighborhood is convex when some convex shape discretizes to it; taking
// the hull of its vectors as that shape (r = 1), this holds iff the hull has no
// lattice point besides the origin and the vectors themselves.
inline bool is_convex_neighborhood(const Neighborhood& nb) {
  std::vector<GridPoint> pts = nb.vectors();
  auto turn = [](GridPoint o, GridPoint a, GridPoint b) { return cross(a - o, b - o); };
  std::vector<GridPoint> hull;
  for (int pass = 0; pass < 2; ++pass) {  // monotone chain: lower, then upper
    std::size_t base = hull.size();
    for (const auto& q : pts) {
      while (hull.size() >= base + 2 && turn(hull[hull.size() - 2], hull.back(), q) <= 0) hull.pop_back();
      hull.push_back(q);
    }
    hull.pop_back();
    std::reverse(pts.begin(), pts.end());
  }
  auto inside = [&](GridPoint q) {
    if (hull.size() <= 2) {  // a segment (or a point)
      GridPoint a = hull.front(), b = hull.back();
      return turn(a, b, q) == 0 && dot(q - a, b - a) >= 0 && dot(q - b, a - b) >= 0;
    }
    for (std::size_t i = 0; i < hull.size(); ++i)
      if (turn(hull[i], hull[(i + 1) % hull.size()], q) < 0) return false;
    return true;
  };
  std::int64_t r = nb.reach();
  for (std::int64_t x = -r; x <= r; ++x)
    for (std::int64_t y = -r; y <= r; ++y) {
      GridPoint q{x, y};
      if ((x || y) && !nb.contains(q) && inside(q)) return false;
    }
  return true;
}

}  // namespace sandpile
