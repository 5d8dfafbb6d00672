#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "../configuration.hpp"
#include "../crossing.hpp"
#include "../firing_graph.hpp"
#include "../neighborhood.hpp"

namespace sandpile::io {

enum class Layer { Grains, NeighborhoodOverlay, FiringGraphWE, FiringGraphNS, Borders };

struct RenderSpec {
  int cell_size = 16;
  std::set<Layer> layers{Layer::Grains, Layer::FiringGraphWE, Layer::FiringGraphNS, Layer::Borders};
  std::string palette = "sand";
};

namespace detail {

// Light to dark; index 0 is never used for a non-empty cell.
inline const std::array<const char*, 9>& palette(const std::string& name) {
  static const std::array<const char*, 9> sand{"#fff7e6", "#fde7c2", "#fbd49a", "#f7bd6e", "#f0a04b",
                                               "#e07f32", "#c45f22", "#9c4418", "#6b2c10"};
  static const std::array<const char*, 9> gray{"#f7f7f7", "#e6e6e6", "#d0d0d0", "#b8b8b8", "#9e9e9e",
                                               "#828282", "#666666", "#4a4a4a", "#2e2e2e"};
  if (name == "gray") return gray;
  if (name != "sand") throw InvalidArgument("unknown palette " + name);
  return sand;
}

}  // namespace detail

// SVG picture of a configuration on its square (or bounding box), with
// optional firing-graph arcs, neighborhood overlay and border cells. The
// output depends only on the arguments.
inline std::string render(const Configuration& c, const std::optional<FiringGraphPair>& graphs,
                          const RenderSpec& spec, const std::optional<CrossingSpec>& square = std::nullopt,
                          const Neighborhood* nb = nullptr) {
  if (spec.cell_size <= 0) throw InvalidArgument("cell size must be positive");
  const auto& colors = detail::palette(spec.palette);
  auto has = [&](Layer l) { return spec.layers.count(l) != 0; };

  Box box = square ? square->box() : c.bounding_box();
  if (!square && graphs)
    for (const auto* g : {&graphs->we, &graphs->ns})
      for (const auto& [v, t] : g->fire_time) box.include(v);
  if (box.empty()) box = {0, 0, 0, 0};
  const std::int64_t k = spec.cell_size, w = box.width() * k, h = box.height() * k;
  auto px = [&](std::int64_t x) { return (x - box.x0) * k; };
  auto py = [&](std::int64_t y) { return (y - box.y0) * k; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 "
     << w << " " << h << "\">\n";
  os << "<style>.grid{fill:none;stroke:#cccccc;stroke-width:1}.frame{fill:none;stroke:#333333;stroke-width:2}"
        ".overlay{fill:#bbbbbb;fill-opacity:0.35}.border{fill:none;stroke:#1f6feb;stroke-width:3}"
        ".arc-we{stroke:#d62728;stroke-width:1.5}.arc-ns{stroke:#2ca02c;stroke-width:1.5}"
        "text{font:" << std::max<std::int64_t>(6, k / 2) << "px monospace;text-anchor:middle}</style>\n";
  os << "<defs>";
  for (const char* which : {"we", "ns"})
    os << "<marker id=\"arrow-" << which << "\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"5\" "
       << "markerHeight=\"5\" orient=\"auto\"><path d=\"M0,0L10,5L0,10z\" fill=\""
       << (which[0] == 'w' ? "#d62728" : "#2ca02c") << "\"/></marker>";
  os << "</defs>\n";

  if (has(Layer::Grains)) {
    std::int64_t top = nb ? static_cast<std::int64_t>(nb->p()) - 1 : 1;
    for (const auto& [q, g] : c) top = std::max(top, g);
    for (const auto& [q, g] : c) {
      if (!box.contains(q)) continue;
      std::size_t shade = 1 + static_cast<std::size_t>((g * 7) / top);
      os << "<rect x=\"" << px(q.x) << "\" y=\"" << py(q.y) << "\" width=\"" << k << "\" height=\"" << k
         << "\" fill=\"" << colors[std::min<std::size_t>(shade, 8)] << "\"/>\n";
      if (k >= 12)
        os << "<text x=\"" << px(q.x) + k / 2 << "\" y=\"" << py(q.y) + (3 * k) / 4 << "\">" << g << "</text>\n";
    }
  }

  if (has(Layer::NeighborhoodOverlay) && nb && graphs) {
    std::set<GridPoint> shaded;
    for (const auto& [v, t] : graphs->we.fire_time)
      for (const auto& d : nb->vectors())
        if (box.contains(v + d)) shaded.insert(v + d);
    for (const auto& q : shaded)
      os << "<rect class=\"overlay\" x=\"" << px(q.x) << "\" y=\"" << py(q.y) << "\" width=\"" << k
         << "\" height=\"" << k << "\"/>\n";
  }

  os << "<path class=\"grid\" d=\"";
  for (std::int64_t x = 1; x < box.width(); ++x) os << "M" << x * k << ",0V" << h;
  for (std::int64_t y = 1; y < box.height(); ++y) os << "M0," << y * k << "H" << w;
  os << "\"/>\n";
  os << "<rect class=\"frame\" x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\"/>\n";

  if (has(Layer::Borders) && square)
    for (Side s : {Side::North, Side::East, Side::South, Side::West}) {
      GridPoint q = square->border_cell(s);
      os << "<rect class=\"border\" data-side=\"" << side_name(s) << "\" x=\"" << px(q.x) << "\" y=\"" << py(q.y)
         << "\" width=\"" << k << "\" height=\"" << k << "\"/>\n";
    }

  auto arcs = [&](const FiringGraph& g, const char* cls, const char* marker) {
    for (const auto& [a, b] : g.arcs)
      os << "<line class=\"" << cls << "\" x1=\"" << px(a.x) + k / 2 << "\" y1=\"" << py(a.y) + k / 2 << "\" x2=\""
         << px(b.x) + k / 2 << "\" y2=\"" << py(b.y) + k / 2 << "\" marker-end=\"url(#" << marker << ")\"/>\n";
  };
  if (graphs && has(Layer::FiringGraphWE)) arcs(graphs->we, "arc-we", "arrow-we");
  if (graphs && has(Layer::FiringGraphNS)) arcs(graphs->ns, "arc-ns", "arrow-ns");
  os << "</svg>\n";
  return os.str();
}

// Terminal view: one row per y, '.' for empty cells.
inline std::string render_ascii(const Configuration& c, const std::optional<CrossingSpec>& square = std::nullopt) {
  Box box = square ? square->box() : c.bounding_box();
  if (box.empty()) return "(empty)\n";
  std::size_t wide = 1;
  for (const auto& [q, g] : c)
    if (box.contains(q)) wide = std::max(wide, std::to_string(g).size());
  std::ostringstream os;
  for (std::int64_t y = box.y0; y <= box.y1; ++y) {
    for (std::int64_t x = box.x0; x <= box.x1; ++x) {
      std::int64_t g = c.at({x, y});
      std::string cell = g ? std::to_string(g) : ".";
      os << (x > box.x0 ? " " : "") << std::string(wide - cell.size(), ' ') << cell;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace sandpile::io
