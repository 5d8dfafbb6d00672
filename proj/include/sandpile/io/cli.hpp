#pragma once

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../sandpile.hpp"
#include "json.hpp"
#include "render.hpp"

namespace sandpile::io {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;        // success / the input is a crossing
inline constexpr int kExitNegative = 1;  // not a crossing, no ratio found, ratio too small
inline constexpr int kExitError = 2;     // usage, parse or internal error

namespace detail {

struct Output {
  std::string path;
  std::ostream& fallback;

  void write(const std::string& text) const {
    if (path.empty() || path == "-") {
      fallback << text;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot write " + path);
    f << text;
  }
};

// The neighborhood/spec come from their own file, or from a bundle given as
// the main input.
inline Json companion(const std::string& flag_value, const Json& main, const char* key, const char* flag) {
  if (!flag_value.empty()) return read_file(flag_value);
  if (main.is_object() && main.contains(key)) return main;
  throw ParseError(std::string("missing ") + flag + " (and the input carries no \"" + key + "\")");
}

inline Rational ratio_arg(const std::string& text, const char* what) {
  Rational r = parse_rational(text);
  if (r <= 0) throw InvalidArgument(std::string(what) + " must be positive");
  return r;
}

inline std::set<Layer> parse_layers(const std::string& list) {
  static const std::map<std::string, Layer> names{{"grains", Layer::Grains},
                                                  {"neighborhood-overlay", Layer::NeighborhoodOverlay},
                                                  {"firing-graph-we", Layer::FiringGraphWE},
                                                  {"firing-graph-ns", Layer::FiringGraphNS},
                                                  {"borders", Layer::Borders}};
  std::set<Layer> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    auto it = names.find(item);
    if (it == names.end()) throw InvalidArgument("unknown layer " + item);
    out.insert(it->second);
  }
  return out;
}

}  // namespace detail

inline int cli_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  CLI::App app{"Abelian sandpiles on Z^2: dynamics, crossings and their synthesis"};
  app.require_subcommand(1);
  std::string input, nb_path, spec_path, out_path, graphs_path, ratio, layers, palette = "sand";
  std::vector<std::string> sweep;
  std::int64_t budget = kDefaultStepBudget, cell_size = 16;
  std::optional<std::uint64_t> order_seed;
  bool ascii = false, no_stage_ratios = false;

  auto common = [&](CLI::App* sub, const char* what) {
    sub->add_option("input", input, what)->required();
    sub->add_option("-o,--output", out_path, "Output file (default: stdout)");
  };
  auto* discretize_cmd = app.add_subcommand("discretize", "Neighborhood of a shape at a ratio");
  common(discretize_cmd, "Shape JSON");
  discretize_cmd->add_option("--ratio", ratio, "Scaling ratio r > 0")->required();

  auto* stabilize_cmd = app.add_subcommand("stabilize", "Stabilize a configuration");
  common(stabilize_cmd, "Configuration JSON");
  stabilize_cmd->add_option("--nb", nb_path, "Neighborhood JSON");
  stabilize_cmd->add_option("--budget", budget, "Step (or firing) limit");
  stabilize_cmd->add_option("--sequential", order_seed, "Fire one vertex at a time, order seeded");

  auto* verify_cmd = app.add_subcommand("verify", "Check the crossing conditions");
  common(verify_cmd, "Configuration JSON");
  verify_cmd->add_option("--nb", nb_path, "Neighborhood JSON");
  verify_cmd->add_option("--spec", spec_path, "Crossing spec JSON");

  auto* synth_cmd = app.add_subcommand("synthesize", "Build a verified crossing for a shape");
  common(synth_cmd, "Shape JSON");
  auto* ratio_opt = synth_cmd->add_option("--ratio", ratio, "Scaling ratio r > 0");
  auto* sweep_opt = synth_cmd->add_option("--sweep", sweep, "R_MAX STEP: smallest working sampled ratio")
                        ->expected(2);
  ratio_opt->excludes(sweep_opt);
  synth_cmd->add_flag("--no-stage-ratios", no_stage_ratios, "Skip the informational stage ratios");

  auto* disjoint_cmd = app.add_subcommand("disjointify", "Crossing with vertex-disjoint firing graphs");
  common(disjoint_cmd, "Configuration JSON");
  disjoint_cmd->add_option("--nb", nb_path, "Neighborhood JSON");
  disjoint_cmd->add_option("--spec", spec_path, "Crossing spec JSON");

  auto* graphs_cmd = app.add_subcommand("graphs", "Firing graphs of both signals");
  common(graphs_cmd, "Configuration JSON");
  graphs_cmd->add_option("--nb", nb_path, "Neighborhood JSON");
  graphs_cmd->add_option("--spec", spec_path, "Crossing spec JSON");

  auto* render_cmd = app.add_subcommand("render", "SVG (or ASCII) picture");
  common(render_cmd, "Configuration JSON");
  render_cmd->add_option("--graphs", graphs_path, "Firing graphs JSON");
  render_cmd->add_option("--nb", nb_path, "Neighborhood JSON (colors and overlay)");
  render_cmd->add_option("--spec", spec_path, "Crossing spec JSON (frame and borders)");
  render_cmd->add_option("--cell-size", cell_size, "Pixels per cell");
  render_cmd->add_option("--layers", layers, "Comma-separated layers");
  render_cmd->add_option("--palette", palette, "sand or gray");
  render_cmd->add_flag("--ascii", ascii, "Plain text instead of SVG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitError;
  }

  detail::Output sink{out_path, out};
  try {
    Json main = read_file(input);
    if (discretize_cmd->parsed()) {
      sink.write(to_text(to_json(discretize(shape_from(main), detail::ratio_arg(ratio, "--ratio")))));
      return kExitOk;
    }
    if (synth_cmd->parsed()) {
      Shape shape = shape_from(main);
      Json result;
      std::optional<Synthesis> s;
      try {
        if (!sweep.empty()) {
          auto found = find_min_working_ratio(shape, detail::ratio_arg(sweep[0], "R_MAX"),
                                              detail::ratio_arg(sweep[1], "STEP"));
          Json checks = Json::array();
          for (const auto& [r, ok] : found.spot_checks) checks.push_back({rational_json(r), ok});
          result["sweep"] = {{"ratio", rational_json(found.ratio)},
                             {"attempts", found.attempts},
                             {"spot_checks", checks}};
          s = synthesize(shape, found.ratio);
        } else if (!ratio.empty()) {
          s = synthesize(shape, detail::ratio_arg(ratio, "--ratio"));
        } else {
          throw InvalidArgument("synthesize needs --ratio R or --sweep R_MAX STEP");
        }
      } catch (const RatioTooSmall& e) {
        err << e.kind() << ": " << e.what() << "\n";
        return kExitNegative;
      } catch (const NoRatioFound& e) {
        err << e.kind() << ": " << e.what() << "\n";
        return kExitNegative;
      }
      Json b = bundle(s->configuration, s->neighborhood, s->spec);
      for (auto it = b.begin(); it != b.end(); ++it) result[it.key()] = it.value();
      result["report"] = plan_report(*s, !no_stage_ratios);
      sink.write(to_text(result));
      return kExitOk;
    }

    Configuration c = configuration_from(main);
    if (stabilize_cmd->parsed()) {
      Neighborhood nb = neighborhood_from(detail::companion(nb_path, main, "neighborhood", "--nb"));
      auto st = order_seed ? stabilize_sequential(c, nb, *order_seed, budget) : stabilize(c, nb, budget);
      sink.write(to_text({{"configuration", to_json(st.stable)}, {"odometer", to_json(st.odometer)}}));
      return kExitOk;
    }
    if (render_cmd->parsed()) {
      std::optional<CrossingSpec> spec;
      if (!spec_path.empty() || main.contains("spec"))
        spec = spec_from(detail::companion(spec_path, main, "spec", "--spec"));
      if (ascii) {
        sink.write(render_ascii(c, spec));
        return kExitOk;
      }
      std::optional<Neighborhood> nb;
      if (!nb_path.empty() || main.contains("neighborhood"))
        nb = neighborhood_from(detail::companion(nb_path, main, "neighborhood", "--nb"));
      std::optional<FiringGraphPair> graphs;
      if (!graphs_path.empty()) graphs = firing_graphs_from(read_file(graphs_path));
      RenderSpec rs;
      rs.cell_size = static_cast<int>(cell_size);
      rs.palette = palette;
      if (!layers.empty()) rs.layers = detail::parse_layers(layers);
      sink.write(render(c, graphs, rs, spec, nb ? &*nb : nullptr));
      return kExitOk;
    }

    Neighborhood nb = neighborhood_from(detail::companion(nb_path, main, "neighborhood", "--nb"));
    CrossingSpec spec = spec_from(detail::companion(spec_path, main, "spec", "--spec"));
    if (verify_cmd->parsed()) {
      CrossingReport report = verify_crossing(c, nb, spec);
      sink.write(to_text(to_json(report)));
      return report.verdict() ? kExitOk : kExitNegative;
    }
    if (graphs_cmd->parsed()) {
      sink.write(to_text(to_json(firing_graphs(c, nb, spec))));
      return kExitOk;
    }
    if (disjoint_cmd->parsed()) {
      try {
        sink.write(to_text(bundle(disjointify(c, nb, spec), nb, spec)));
      } catch (const NotACrossing& e) {
        err << e.kind() << ": " << e.what() << "\n";
        return kExitNegative;
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    err << e.kind() << ": " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace sandpile::io
