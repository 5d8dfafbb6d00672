#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "../configuration.hpp"
#include "../crossing.hpp"
#include "../dynamics.hpp"
#include "../error.hpp"
#include "../firing_graph.hpp"
#include "../neighborhood.hpp"
#include "../rational.hpp"
#include "../shape.hpp"
#include "../synthesis.hpp"

namespace sandpile::io {

using Json = nlohmann::json;  // std::map-backed: keys always come out sorted

// Text layout: objects one key per line, arrays of scalars inline, arrays of
// arrays one element per line. Equal values give identical bytes.
inline void write_text(std::ostream& os, const Json& j, int indent = 0) {
  auto pad = [&](int k) { os << std::string(static_cast<std::size_t>(k), ' '); };
  auto all_scalar = [](const Json& a) {
    return std::none_of(a.begin(), a.end(), [](const Json& e) { return e.is_structured(); });
  };
  // [x, y] points and [[x1, y1], [x2, y2]] arcs stay on one line
  auto inline_array = [&](const Json& a) {
    return all_scalar(a) ||
           (a.size() <= 2 && std::all_of(a.begin(), a.end(), [&](const Json& e) { return e.is_array() && all_scalar(e); }));
  };
  if (j.is_object()) {
    if (j.empty()) {
      os << "{}";
      return;
    }
    os << "{\n";
    std::size_t i = 0;
    for (auto it = j.begin(); it != j.end(); ++it, ++i) {
      pad(indent + 2);
      os << Json(it.key()).dump() << ": ";
      write_text(os, it.value(), indent + 2);
      os << (i + 1 < j.size() ? ",\n" : "\n");
    }
    pad(indent);
    os << "}";
  } else if (j.is_array() && !inline_array(j)) {
    os << "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      pad(indent + 2);
      write_text(os, j[i], indent + 2);
      os << (i + 1 < j.size() ? ",\n" : "\n");
    }
    pad(indent);
    os << "]";
  } else if (j.is_array()) {
    // short rows such as [x, y, grains] or [[x1, y1], [x2, y2]]
    os << "[";
    for (std::size_t i = 0; i < j.size(); ++i) os << (i ? ", " : "") << j[i].dump(-1, ' ', false);
    os << "]";
  } else {
    os << j.dump();
  }
}

inline std::string to_text(const Json& j) {
  std::ostringstream os;
  write_text(os, j);
  os << "\n";
  return os.str();
}

inline Json parse_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

inline Json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

// ---- scalars ----

// Integers stay numbers; other rationals become exact strings.
inline Json rational_json(const Rational& q) {
  if (denom(q) == 1 && abs(numer(q)) < BigInt(INT64_MAX)) return numer(q).convert_to<std::int64_t>();
  return format_rational(q);
}

// Accepts integers, "p/q" or decimal strings, and floats (read through their
// shortest decimal form, so 0.1 means 1/10).
inline Rational rational_from(const Json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_number_float()) return parse_rational(j.dump());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  throw ParseError("expected a number or a rational string, got " + j.dump());
}

inline std::int64_t int_from(const Json& j, const char* what) {
  if (!j.is_number_integer()) throw ParseError(std::string(what) + " must be an integer");
  return j.get<std::int64_t>();
}

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing key \"") + key + "\"");
  return j.at(key);
}

// Files may hold the value itself or a bundle carrying it under `key`.
inline const Json& unwrap(const Json& j, const char* key) {
  return j.is_object() && j.contains(key) && j.at(key).is_object() ? j.at(key) : j;
}

inline Json point_json(const Point2& p) { return Json::array({rational_json(p.x), rational_json(p.y)}); }

inline Point2 point_from(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("a point is [x, y]");
  return {rational_from(j[0]), rational_from(j[1])};
}

inline Json cell_json(GridPoint g) { return Json::array({g.x, g.y}); }

inline GridPoint cell_from(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("a cell is [x, y]");
  return {int_from(j[0], "x"), int_from(j[1], "y")};
}

// ---- configuration / neighborhood ----

inline Json to_json(const Configuration& c) {
  Json cells = Json::array();
  for (const auto& [q, g] : c) cells.push_back({q.x, q.y, g});
  return {{"cells", cells}};
}

inline Configuration configuration_from(const Json& root) {
  const Json& j = unwrap(root, "configuration");
  Configuration c;
  for (const auto& row : field(j, "cells")) {
    if (!row.is_array() || row.size() != 3) throw ParseError("a cell row is [x, y, grains]");
    GridPoint q{int_from(row[0], "x"), int_from(row[1], "y")};
    std::int64_t g = int_from(row[2], "grains");
    if (g < 0) throw ParseError("negative grain count");
    c.add_grains(q, g);
  }
  return c;
}

inline Json to_json(const Neighborhood& nb) {
  Json v = Json::array();
  for (const auto& d : nb.vectors()) v.push_back({d.x, d.y});
  return {{"vectors", v}};
}

inline Neighborhood neighborhood_from(const Json& root) {
  const Json& j = unwrap(root, "neighborhood");
  std::vector<MovementVector> v;
  for (const auto& d : field(j, "vectors")) v.push_back(cell_from(d));
  return Neighborhood(std::move(v));
}

// ---- shapes ----

// Shape coordinates are written as exact strings ("3", "7.25", "1/3").
inline Json exact_json(const Rational& q) { return format_rational(q); }

inline Json exact_point_json(const Point2& p) { return Json::array({exact_json(p.x), exact_json(p.y)}); }

inline Json to_json(const HalfPlane& h) {
  return {{"a", exact_json(h.a)}, {"b", exact_json(h.b)}, {"c", exact_json(h.c)}, {"strict", h.strict}};
}

inline Json to_json(const Shape& s) {
  Json prims = Json::array();
  for (const auto& prim : s.primitives()) {
    Json p;
    if (const auto* d = std::get_if<Disk>(&prim.body)) {
      p["disk"] = {{"c", exact_point_json(d->center)}, {"r", exact_json(d->radius)}};
    } else {
      Json v = Json::array();
      for (const auto& q : std::get<ConvexPolygon>(prim.body).vertices) v.push_back(exact_point_json(q));
      p["poly"] = {{"v", v}};
    }
    // half-plane cuts {a x + b y >= c} express partitions such as half-disks
    if (!prim.cuts.empty()) {
      p["cuts"] = Json::array();
      for (const auto& h : prim.cuts) p["cuts"].push_back(to_json(h));
    }
    prims.push_back(p);
  }
  return {{"primitives", prims}};
}

inline Primitive primitive_from(const Json& j) {
  Primitive prim;
  if (!j.is_object()) throw ParseError("a primitive is an object");
  if (j.contains("disk")) {
    const Json& d = j.at("disk");
    Point2 c = d.contains("c") ? point_from(d.at("c")) : Point2{0, 0};
    prim.body = Disk{c, rational_from(field(d, "r"))};
  } else if (j.contains("poly")) {
    ConvexPolygon poly;
    for (const auto& q : field(j.at("poly"), "v")) poly.vertices.push_back(point_from(q));
    prim.body = poly;
  } else {
    throw ParseError("a primitive needs \"disk\" or \"poly\"");
  }
  if (j.contains("cuts"))
    for (const auto& h : j.at("cuts"))
      prim.cuts.push_back({rational_from(field(h, "a")), rational_from(field(h, "b")), rational_from(field(h, "c")),
                           h.value("strict", false)});
  return prim;
}

// {"primitives": [...]}, or a single primitive object.
inline Shape shape_from(const Json& root) {
  const Json& j = unwrap(root, "shape");
  std::vector<Primitive> prims;
  if (j.contains("primitives"))
    for (const auto& p : j.at("primitives")) prims.push_back(primitive_from(p));
  else
    prims.push_back(primitive_from(j));
  try {
    return Shape(std::move(prims));
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid shape: ") + e.what());
  }
}

// ---- crossing spec / report ----

inline Json to_json(const CrossingSpec& s) {
  Json j{{"north", s.north.index}, {"east", s.east.index}, {"south", s.south.index}, {"west", s.west.index}};
  if (s.is_square())
    j["n"] = s.n();
  else
    j["width"] = s.width, j["height"] = s.height;
  return j;
}

inline CrossingSpec spec_from(const Json& root) {
  const Json& j = unwrap(root, "spec");
  std::int64_t w, h;
  if (j.contains("n"))
    w = h = int_from(j.at("n"), "n");
  else
    w = int_from(field(j, "width"), "width"), h = int_from(field(j, "height"), "height");
  try {
    return CrossingSpec(w, h, int_from(field(j, "north"), "north"), int_from(field(j, "east"), "east"),
                        int_from(field(j, "south"), "south"), int_from(field(j, "west"), "west"));
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid spec: ") + e.what());
  }
}

inline Json to_json(const TransportResult& t) {
  Json j{{"ok", t.ok}, {"witness_time", nullptr}};
  if (t.witness_time) j["witness_time"] = *t.witness_time;
  return j;
}

inline Json to_json(const IsolationResult& r) {
  Json j{{"ok", r.ok}, {"violation", nullptr}};
  if (r.violation) j["violation"] = {{"t", r.violation->first}, {"cell", cell_json(r.violation->second)}};
  return j;
}

inline Json to_json(const CrossingReport& r) {
  return {{"stable", r.stable},
          {"inside", r.inside},
          {"west_to_east", to_json(r.west_to_east)},
          {"west_isolated_to_south", to_json(r.west_isolated_to_south)},
          {"north_to_south", to_json(r.north_to_south)},
          {"north_isolated_to_east", to_json(r.north_isolated_to_east)},
          {"verdict", r.verdict()}};
}

// ---- dynamics ----

inline Json to_json(const Odometer& o) {
  Json f = Json::array();
  for (const auto& [q, k] : o.fire_count) f.push_back({q.x, q.y, k});
  return {{"fire_count", f}, {"steps", o.steps}};
}

// ---- firing graphs ----

inline Json to_json(const FiringGraph& g) {
  Json fired = Json::array(), arcs = Json::array();
  for (const auto& [v, t] : g.fire_time) fired.push_back({v.x, v.y, t});
  for (const auto& [a, b] : g.arcs) arcs.push_back({cell_json(a), cell_json(b)});
  return {{"fired", fired}, {"arcs", arcs}};
}

inline FiringGraph firing_graph_from(const Json& j) {
  FiringGraph g;
  for (const auto& row : field(j, "fired")) {
    if (!row.is_array() || row.size() != 3) throw ParseError("a fired row is [x, y, t]");
    g.fire_time[{int_from(row[0], "x"), int_from(row[1], "y")}] = int_from(row[2], "t");
  }
  for (const auto& arc : field(j, "arcs")) {
    if (!arc.is_array() || arc.size() != 2) throw ParseError("an arc is [[x1, y1], [x2, y2]]");
    GridPoint a = cell_from(arc[0]), b = cell_from(arc[1]);
    if (!g.contains(a) || !g.contains(b) || g.fire_time[a] >= g.fire_time[b])
      throw ParseError("arc between unfired vertices or against time");
    g.arcs.push_back({a, b});
  }
  std::sort(g.arcs.begin(), g.arcs.end());
  return g;
}

inline Json to_json(const FiringGraphPair& p) { return {{"we", to_json(p.we)}, {"ns", to_json(p.ns)}}; }

inline FiringGraphPair firing_graphs_from(const Json& root) {
  const Json& j = unwrap(root, "graphs");
  return {firing_graph_from(field(j, "we")), firing_graph_from(field(j, "ns"))};
}

// ---- synthesis ----

inline Json to_json(const CrossingPlan& p) {
  return {{"case", p.plan_case}, {"h", point_json(p.h)},   {"v_e", point_json(p.v_e)},
          {"s2_y", point_json(p.s2_y)}, {"v", point_json(p.v)}, {"v1", point_json(p.v1)},
          {"v2", point_json(p.v2)},     {"epsilon", rational_json(p.epsilon)}};
}

inline Json to_json(const StageRatios& s) {
  return {{"r1", rational_json(s.r1)},
          {"r2", rational_json(s.r2)},
          {"r3", rational_json(s.r3)},
          {"r4", rational_json(s.r4)},
          {"r0", rational_json(s.max())}};
}

inline Json cells_json(const std::vector<GridPoint>& v) {
  Json a = Json::array();
  for (const auto& q : v) a.push_back(cell_json(q));
  return a;
}

// The PlanReport: continuous anchors, case, stage ratios and the discrete layout.
inline Json plan_report(const Synthesis& s, bool with_stage_ratios = true) {
  Json stages = Json::array();
  for (const auto& st : s.stages)
    stages.push_back({{"signal", signal_name(st.signal)},
                      {"stage", st.stage},
                      {"grains", st.grains},
                      {"cells", cells_json(st.cells)}});
  Json j{{"plan", to_json(s.plan)},
         {"ratio", rational_json(s.ratio)},
         {"orientation", {{"h_entry", side_name(s.orientation.h_entry)}, {"v_entry", side_name(s.orientation.v_entry)}}},
         {"gadget",
          {{"H1", cells_json(s.gadget.H1)},
           {"V1", cells_json(s.gadget.V1)},
           {"h2", cell_json(s.gadget.h2)},
           {"v2", cell_json(s.gadget.v2)}}},
         {"stages", stages}};
  if (with_stage_ratios) j["stage_ratios"] = to_json(stage_ratios(s.plan));
  return j;
}

// Everything verify needs in one file.
inline Json bundle(const Configuration& c, const Neighborhood& nb, const CrossingSpec& spec) {
  return {{"configuration", to_json(c)}, {"neighborhood", to_json(nb)}, {"spec", to_json(spec)}};
}

}  // namespace sandpile::io
