#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "rational.hpp"

namespace sandpile {

struct Point2 {
  Rational x, y;

  friend bool operator==(const Point2&, const Point2&) = default;
  friend bool operator<(const Point2& a, const Point2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }
  friend Point2 operator+(const Point2& a, const Point2& b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(const Point2& a, const Point2& b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator-(const Point2& a) { return {-a.x, -a.y}; }
  friend Point2 operator*(const Rational& k, const Point2& a) { return {k * a.x, k * a.y}; }
};

inline Rational cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }
inline Rational dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
inline Rational norm2(const Point2& a) { return dot(a, a); }
inline Point2 to_point(GridPoint g) { return {Rational(g.x), Rational(g.y)}; }

// { q : a*q.x + b*q.y >= c }, or > c when strict.
struct HalfPlane {
  Rational a, b, c;
  bool strict = false;

  bool contains(const Point2& q) const {
    Rational v = a * q.x + b * q.y;
    return strict ? v > c : v >= c;
  }
  HalfPlane complement() const { return {-a, -b, -c, !strict}; }
  friend bool operator==(const HalfPlane&, const HalfPlane&) = default;
};

struct Disk {
  Point2 center;
  Rational radius;
  friend bool operator==(const Disk&, const Disk&) = default;
};

// Closed convex polygon; vertices are kept counterclockwise.
struct ConvexPolygon {
  std::vector<Point2> vertices;
  friend bool operator==(const ConvexPolygon&, const ConvexPolygon&) = default;
};

// A disk or polygon, optionally intersected with half-planes. The cuts are
// how partitions (e.g. a disk split along a diameter) are expressed.
struct Primitive {
  std::variant<Disk, ConvexPolygon> body;
  std::vector<HalfPlane> cuts;
  friend bool operator==(const Primitive&, const Primitive&) = default;
};

struct Triangle {
  Point2 a, b, c;
  Rational area2() const { return cross(b - a, c - a); }  // twice the signed area
};

namespace detail {

inline Rational signed_area2(const std::vector<Point2>& v) {
  Rational s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) s += cross(v[i], v[(i + 1) % v.size()]);
  return s;
}

// Sutherland-Hodgman against the closed half-plane.
inline std::vector<Point2> clip(const std::vector<Point2>& poly, const HalfPlane& h) {
  std::vector<Point2> out;
  auto value = [&](const Point2& q) { return h.a * q.x + h.b * q.y - h.c; };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % poly.size()];
    Rational vp = value(p), vq = value(q);
    if (vp >= 0) out.push_back(p);
    if ((vp > 0 && vq < 0) || (vp < 0 && vq > 0)) out.push_back(p + (vp / (vp - vq)) * (q - p));
  }
  return out;
}

inline std::vector<Point2> clip_all(std::vector<Point2> poly, const std::vector<HalfPlane>& cuts) {
  for (const auto& h : cuts) {
    if (poly.empty()) break;
    poly = clip(poly, h);
  }
  return poly;
}

// Rational points exactly on the circle, via the tangent half-angle map.
inline std::vector<Point2> inscribed_polygon(const Disk& d, int sides) {
  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(sides));
  for (int k = 0; k < sides; ++k) {
    double theta = -std::numbers::pi + 2 * std::numbers::pi * (k + 0.5) / sides;
    Rational t = dyadic(std::tan(theta / 2), 24);
    Rational den = 1 + t * t;
    out.push_back(d.center + d.radius * Point2{(1 - t * t) / den, 2 * t / den});
  }
  return out;
}

inline Rational squared_distance_to_segment(const Point2& q, const Point2& a, const Point2& b) {
  Point2 ab = b - a;
  Rational len = norm2(ab);
  if (len == 0) return norm2(q - a);
  Rational t = dot(q - a, ab) / len;
  if (t < 0) t = 0;
  if (t > 1) t = 1;
  return norm2(q - (a + t * ab));
}

// Distance^2 from q to a closed convex ccw polygon (0 if inside).
inline Rational squared_distance_to_polygon(const Point2& q, const std::vector<Point2>& poly) {
  bool inside = true;
  for (std::size_t i = 0; i < poly.size(); ++i)
    if (cross(poly[(i + 1) % poly.size()] - poly[i], q - poly[i]) < 0) inside = false;
  if (inside) return 0;
  Rational best = -1;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    Rational d = squared_distance_to_segment(q, poly[i], poly[(i + 1) % poly.size()]);
    if (best < 0 || d < best) best = d;
  }
  return best;
}

inline Point2 vertex_mean(const std::vector<Point2>& poly) {
  Point2 g{0, 0};
  for (const auto& v : poly) g = g + v;
  return Rational(1, static_cast<long long>(poly.size())) * g;
}

// A positive-area triangle strictly inside a convex polygon of positive area.
inline std::optional<Triangle> interior_triangle(const std::vector<Point2>& poly) {
  if (poly.size() < 3 || signed_area2(poly) <= 0) return std::nullopt;
  Point2 g = vertex_mean(poly);
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    Triangle t{poly[0], poly[i], poly[i + 1]};
    if (t.area2() != 0) {
      Rational half(1, 2);
      return Triangle{half * (t.a + g), half * (t.b + g), half * (t.c + g)};
    }
  }
  return std::nullopt;
}

}  // namespace detail

// A bounded region of the plane: a finite union of primitives, boundaries
// included (except along strict cuts).
class Shape {
 public:
  explicit Shape(std::vector<Primitive> primitives) : primitives_(std::move(primitives)) {
    if (primitives_.empty()) throw InvalidArgument("shape needs at least one primitive");
    for (auto& prim : primitives_) {
      if (auto* d = std::get_if<Disk>(&prim.body)) {
        if (d->radius <= 0) throw InvalidArgument("disk radius must be positive");
      } else {
        auto& v = std::get<ConvexPolygon>(prim.body).vertices;
        if (v.size() < 3) throw InvalidArgument("polygon needs at least 3 vertices");
        if (detail::signed_area2(v) < 0) std::reverse(v.begin(), v.end());
        for (std::size_t i = 0; i < v.size(); ++i) {
          const Point2 &a = v[i], &b = v[(i + 1) % v.size()], &c = v[(i + 2) % v.size()];
          if (cross(b - a, c - b) < 0) throw InvalidArgument("polygon is not convex");
        }
      }
      for (const auto& h : prim.cuts)
        if (h.a == 0 && h.b == 0) throw InvalidArgument("half-plane with zero normal");
    }
  }

  static Shape disk(Point2 center, Rational radius) { return Shape({Primitive{Disk{center, radius}, {}}}); }
  static Shape unit_disk() { return disk({0, 0}, 1); }
  static Shape polygon(std::vector<Point2> vertices) {
    return Shape({Primitive{ConvexPolygon{std::move(vertices)}, {}}});
  }

  const std::vector<Primitive>& primitives() const { return primitives_; }

  static bool primitive_contains(const Primitive& prim, const Point2& q) {
    for (const auto& h : prim.cuts)
      if (!h.contains(q)) return false;
    if (const auto* d = std::get_if<Disk>(&prim.body)) return norm2(q - d->center) <= d->radius * d->radius;
    const auto& v = std::get<ConvexPolygon>(prim.body).vertices;
    Rational lo_x = v[0].x, hi_x = v[0].x, lo_y = v[0].y, hi_y = v[0].y;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (cross(v[(i + 1) % v.size()] - v[i], q - v[i]) < 0) return false;
      lo_x = std::min(lo_x, v[i].x), hi_x = std::max(hi_x, v[i].x);
      lo_y = std::min(lo_y, v[i].y), hi_y = std::max(hi_y, v[i].y);
    }
    // the box test matters only for degenerate (segment) polygons
    return q.x >= lo_x && q.x <= hi_x && q.y >= lo_y && q.y <= hi_y;
  }

  bool contains(const Point2& q) const {
    return std::any_of(primitives_.begin(), primitives_.end(),
                       [&](const Primitive& prim) { return primitive_contains(prim, q); });
  }

  // Central symmetry around the origin.
  Shape inverse() const {
    std::vector<Primitive> out;
    for (const auto& prim : primitives_) {
      Primitive q;
      if (const auto* d = std::get_if<Disk>(&prim.body))
        q.body = Disk{-d->center, d->radius};
      else {
        ConvexPolygon poly;
        for (const auto& v : std::get<ConvexPolygon>(prim.body).vertices) poly.vertices.push_back(-v);
        q.body = poly;
      }
      for (const auto& h : prim.cuts) q.cuts.push_back({-h.a, -h.b, h.c, h.strict});
      out.push_back(std::move(q));
    }
    return Shape(std::move(out));
  }

  // Same shape with an extra half-plane on every primitive.
  Shape cut(const HalfPlane& h) const {
    auto out = primitives_;
    for (auto& prim : out) prim.cuts.push_back(h);
    return Shape(std::move(out));
  }

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::vector<Primitive> primitives_;
};

inline Shape inverse_shape(const Shape& s) { return s.inverse(); }

// Splits along the line a*x + b*y = c; the line itself goes to the first part.
inline std::pair<Shape, Shape> split(const Shape& s, const HalfPlane& h) {
  HalfPlane closed{h.a, h.b, h.c, false};
  return {s.cut(closed), s.cut(closed.complement())};
}

namespace detail {

// Closed region of a primitive as a convex polygon, exact for polygons and an
// inscribed approximation for disks.
inline std::vector<Point2> primitive_polygon(const Primitive& prim, int disk_sides = 64) {
  std::vector<Point2> base = std::holds_alternative<Disk>(prim.body)
                                 ? inscribed_polygon(std::get<Disk>(prim.body), disk_sides)
                                 : std::get<ConvexPolygon>(prim.body).vertices;
  std::vector<HalfPlane> closed = prim.cuts;
  for (auto& h : closed) h.strict = false;
  return clip_all(std::move(base), closed);
}

// Exact positive-area test for one primitive.
inline bool has_positive_area(const Primitive& prim) {
  std::vector<HalfPlane> closed = prim.cuts;
  for (auto& h : closed) h.strict = false;
  if (const auto* d = std::get_if<Disk>(&prim.body)) {
    const Point2& c = d->center;
    const Rational& r = d->radius;
    std::vector<Point2> square{{c.x - r, c.y - r}, {c.x + r, c.y - r}, {c.x + r, c.y + r}, {c.x - r, c.y + r}};
    auto q = clip_all(std::move(square), closed);
    return q.size() >= 3 && signed_area2(q) > 0 && squared_distance_to_polygon(c, q) < r * r;
  }
  auto q = clip_all(std::get<ConvexPolygon>(prim.body).vertices, closed);
  return q.size() >= 3 && signed_area2(q) > 0;
}

inline std::optional<Triangle> primitive_witness(const Primitive& prim) {
  if (!has_positive_area(prim)) return std::nullopt;
  if (std::holds_alternative<ConvexPolygon>(prim.body)) return interior_triangle(primitive_polygon(prim));
  for (int sides = 64; sides <= 4096; sides *= 4)
    if (auto t = interior_triangle(primitive_polygon(prim, sides))) return t;
  return std::nullopt;
}

}  // namespace detail

struct NonFlatReport {
  bool non_flat = false;
  // One entry per primitive: a positive-area triangle inside it, when it has one.
  std::vector<std::optional<Triangle>> witnesses;
};

// Every primitive must have positive area: a point of a fat convex piece sits
// in a fat triangle, while a degenerate piece contributes flat points.
inline NonFlatReport is_non_flat(const Shape& s) {
  NonFlatReport r{true, {}};
  for (const auto& prim : s.primitives()) {
    bool fat = detail::has_positive_area(prim);
    r.non_flat = r.non_flat && fat;
    r.witnesses.push_back(fat ? detail::primitive_witness(prim) : std::nullopt);
  }
  return r;
}

// Triangle T(q, q', q'') of positive area inside the shape, for a member q.
inline std::optional<Triangle> non_flat_witness(const Shape& s, const Point2& q) {
  for (const auto& prim : s.primitives()) {
    if (!Shape::primitive_contains(prim, q)) continue;
    auto t = detail::primitive_witness(prim);
    if (!t) continue;
    const Point2* pts[3] = {&t->a, &t->b, &t->c};
    for (int i = 0; i < 3; ++i) {
      Triangle cand{q, *pts[i], *pts[(i + 1) % 3]};
      if (cand.area2() != 0) return cand;
    }
  }
  return std::nullopt;
}

}  // namespace sandpile
