#include <gtest/gtest.h>

#include <sandpile/sandpile.hpp>

using namespace sandpile;

namespace {

Shape thin_rectangle() {
  return Shape::polygon({{0, Rational(-2, 5)}, {4, Rational(-2, 5)}, {4, Rational(2, 5)}, {0, Rational(2, 5)}});
}

Shape square() { return Shape::polygon({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}); }

// Grains reaching `target` when every cell of `fired` fires once.
std::int64_t received(const Neighborhood& nb, const std::vector<GridPoint>& fired, GridPoint target) {
  return std::count_if(fired.begin(), fired.end(), [&](GridPoint u) { return nb.contains(target - u); });
}

const Synthesis& disk_at_ten() {
  static const Synthesis s = synthesize(Shape::unit_disk(), 10);
  return s;
}

}  // namespace

TEST(Plan, UnitDiskTakesTheFirstCase) {
  Shape disk = Shape::unit_disk();
  auto p = plan_crossing_vectors(disk);
  EXPECT_EQ(p.plan_case, 1);
  EXPECT_EQ(p.h, (Point2{1, 0}));
  EXPECT_EQ(p.v_e, (Point2{0, 1}));
  EXPECT_TRUE(plan_is_valid(disk, p));
  EXPECT_FALSE(disk.contains(p.h - p.v1));  // v1 is out of reach of h2
  EXPECT_TRUE(detail::open_segments_cross(p.v1, p.v2, {0, 0}, p.h));
  EXPECT_GT(p.v.x, 0);
  EXPECT_GT(p.v.y, 0);
  EXPECT_TRUE(disk.contains(p.v));
}

TEST(Plan, ThinRectangle) {
  Shape s = thin_rectangle();
  auto p = plan_crossing_vectors(s);
  EXPECT_EQ(p.h.x, 4);
  EXPECT_TRUE(plan_is_valid(s, p));
  EXPECT_TRUE(s.contains(p.v));
  EXPECT_EQ(dot(p.s2_y, p.h), 0);
}

TEST(Plan, FlatShapeIsRejected) {
  EXPECT_THROW(plan_crossing_vectors(Shape::polygon({{0, 0}, {1, 1}, {2, 2}})), FlatShape);
  EXPECT_THROW(synthesize(Shape::polygon({{0, 0}, {1, 0}, {3, 0}}), 10), FlatShape);
}

TEST(Gadget, InequalitiesAndGrainLevels) {
  Shape disk = Shape::unit_disk();
  auto plan = plan_crossing_vectors(disk);
  for (Rational r : {Rational(10), Rational(15), Rational(20)}) {
    auto m = materialize_gadget(plan, disk, r);
    const auto& nb = m.layout.neighborhood();
    const auto& g = m.gadget;
    EXPECT_TRUE(gadget_violations(nb, g).empty());
    EXPECT_EQ(g.H1.size(), 2u);
    EXPECT_EQ(g.V1.size(), 4u);
    std::vector<GridPoint> vertical = g.V1;
    vertical.push_back(g.v2);
    EXPECT_GT(static_cast<std::int64_t>(g.H1.size()), received(nb, {g.v2}, g.h2));
    std::vector<GridPoint> horizontal = g.H1;
    horizontal.push_back(g.h2);
    for (auto u : g.H1) EXPECT_LT(received(nb, vertical, u), 6);
    for (auto u : vertical) EXPECT_LT(received(nb, horizontal, u), 4);
    EXPECT_EQ(received(nb, g.V1, g.h2), 0);
    for (const auto& [u, c] : m.layout.cells()) {
      if (u == g.h2) EXPECT_EQ(c.need, 2);
      else if (u == g.v2) EXPECT_EQ(c.need, 4);
      else EXPECT_EQ(c.need, c.signal == Signal::H ? 6 : 4);
    }
  }
}

// Firing H1 hands h2 its two missing grains; the vertical cells never do.
TEST(Gadget, SimulatedInIsolation) {
  Shape disk = Shape::unit_disk();
  auto plan = plan_crossing_vectors(disk);
  auto m = materialize_gadget(plan, disk, 12);
  const auto& nb = m.layout.neighborhood();
  const auto p = static_cast<std::int64_t>(nb.p());
  const auto& g = m.gadget;
  Configuration c;
  for (const auto& [u, pc] : m.layout.cells()) c.set(u, p - pc.need);

  auto fire_all = [&](const std::vector<GridPoint>& cells) {
    Configuration out = c;
    for (auto u : cells) {
      out.add_grains(u, -p);
      for (const auto& d : nb.vectors()) out.add_grains(u + d, 1);
    }
    return out;
  };
  std::vector<GridPoint> h_cells = g.H1;
  for (auto u : h_cells) c.add_grains(u, 6);  // the west chain's contribution
  EXPECT_GE(fire_all(h_cells).at(g.h2), p);
  for (auto u : h_cells) c.add_grains(u, -6);

  std::vector<GridPoint> v_cells = g.V1;
  v_cells.push_back(g.v2);
  for (auto u : v_cells) c.add_grains(u, 4);
  EXPECT_LT(fire_all(v_cells).at(g.h2), p);
}

TEST(Gadget, SurvivesDoublingTheRatio) {
  Shape disk = Shape::unit_disk();
  auto plan = plan_crossing_vectors(disk);
  for (Rational r : {Rational(19, 2), Rational(12), Rational(27, 2)}) {
    ASSERT_NO_THROW(materialize_gadget(plan, disk, r));
    auto m = materialize_gadget(plan, disk, 2 * r);
    EXPECT_TRUE(gadget_violations(m.layout.neighborhood(), m.gadget).empty());
  }
}

TEST(Wires, GrainLevels) {
  const auto& s = disk_at_ten();
  const auto p = static_cast<std::int64_t>(s.neighborhood.p());
  std::set<GridPoint> gadget(s.gadget.H1.begin(), s.gadget.H1.end());
  gadget.insert(s.gadget.V1.begin(), s.gadget.V1.end());
  gadget.insert(s.gadget.h2);
  gadget.insert(s.gadget.v2);
  for (const auto& [u, k] : s.configuration) EXPECT_EQ(k, gadget.count(u) ? s.configuration.at(u) : p - 1);
  for (auto u : s.gadget.H1) EXPECT_EQ(s.configuration.at(u), p - 6);
  for (auto u : s.gadget.V1) EXPECT_EQ(s.configuration.at(u), p - 4);
  EXPECT_EQ(s.configuration.at(s.gadget.h2), p - 2);
  EXPECT_EQ(s.configuration.at(s.gadget.v2), p - 4);
  std::size_t placed = 0;
  for (const auto& st : s.stages) placed += st.cells.size();
  EXPECT_EQ(placed, s.configuration.size());
}

TEST(Wires, FeedingStageAvoidsTheCrossingPart) {
  const auto& s = disk_at_ten();
  std::vector<GridPoint> part = s.gadget.V1;
  part.push_back(s.gadget.v2);
  part.push_back(s.gadget.h2);
  const WireStage* h0 = nullptr;
  for (const auto& st : s.stages)
    if (st.signal == Signal::H && st.stage == 1) h0 = &st;
  ASSERT_NE(h0, nullptr);
  EXPECT_GE(h0->cells.size(), 6u);
  for (auto u : h0->cells) {
    EXPECT_EQ(received(s.neighborhood, {u}, s.gadget.H1[0]) + received(s.neighborhood, {u}, s.gadget.H1[1]), 2);
    for (auto w : part) EXPECT_FALSE(s.neighborhood.contains(w - u));
  }
}

TEST(Wires, VerticalStagesLeaveTheGadgetDisks) {
  for (Rational r : {Rational(10), Rational(41, 4), Rational(18)}) {
    auto s = synthesize(Shape::unit_disk(), r);
    std::int64_t four_cell = 0;
    for (const auto& st : s.stages)
      if (st.signal == Signal::V && st.stage <= 1 && st.cells.size() == 4) ++four_cell;
    ASSERT_GE(four_cell, 1);
    const auto& p = s.plan;
    auto anchor = [&](std::int64_t j) { return p.v1 - Rational(j) * p.v_e; };
    auto outside = [&](const Point2& q) { return norm2(q) > norm2(p.h) && norm2(q - p.h) > norm2(p.h); };
    for (std::int64_t j = 1; j < four_cell; ++j) EXPECT_FALSE(outside(anchor(j))) << j;
    EXPECT_TRUE(outside(anchor(four_cell)));
  }
}

TEST(Synthesize, VerifiesAndIsDeterministic) {
  const auto& s = disk_at_ten();
  auto report = verify_crossing(s.configuration, s.neighborhood, s.spec);
  EXPECT_TRUE(report.verdict());
  auto again = synthesize(Shape::unit_disk(), 10);
  EXPECT_EQ(again.configuration, s.configuration);
  EXPECT_EQ(again.spec, s.spec);
  EXPECT_EQ(s.neighborhood, discretize(Shape::unit_disk(), 10));
  EXPECT_EQ(s.spec.width, s.spec.height);
}

TEST(Synthesize, EveryVertexFiresAtMostOnce) {
  const auto& s = disk_at_ten();
  for (Side side : {Side::West, Side::North}) {
    auto a = run_border_avalanche(s.configuration, s.neighborhood, s.spec, side);
    for (const auto& [q, k] : a.fire_count) EXPECT_EQ(k, 1);
  }
}

TEST(Synthesize, FiringGraphsAreDisjoint) {
  for (Rational r : {Rational(10), Rational(16), Rational(25)}) {
    auto s = synthesize(Shape::unit_disk(), r);
    auto [we, ns] = firing_graphs(s.configuration, s.neighborhood, s.spec);
    for (const auto& v : we.vertices()) EXPECT_FALSE(ns.contains(v)) << format_rational(r);
  }
}

// Convex neighborhoods force some fired vertex down to p-2 grains or fewer.
TEST(Synthesize, ConvexCorollaryHolds) {
  for (Rational r : {Rational(10), Rational(16)}) {
    auto s = synthesize(Shape::unit_disk(), r);
    const auto p = static_cast<std::int64_t>(s.neighborhood.p());
    auto [we, ns] = firing_graphs(s.configuration, s.neighborhood, s.spec);
    bool found = false;
    for (const auto* g : {&we, &ns})
      for (const auto& v : g->vertices()) found = found || s.configuration.at(v) <= p - 2;
    EXPECT_TRUE(found);
  }
}

TEST(Synthesize, SmallRatiosAreRejected) {
  for (Rational r : {Rational(1, 2), Rational(2), Rational(4)}) {
    try {
      synthesize(Shape::unit_disk(), r);
      ADD_FAILURE() << "expected RatioTooSmall at " << format_rational(r);
    } catch (const RatioTooSmall& e) {
      EXPECT_NE(std::string(e.what()).find("r0 ="), std::string::npos);
    }
  }
}

TEST(Synthesize, OtherShapes) {
  auto sq = synthesize(square(), 8);
  EXPECT_TRUE(verify_crossing(sq.configuration, sq.neighborhood, sq.spec).verdict());
  Shape half = Shape::unit_disk().cut({0, 1, 0});
  auto found = find_min_working_ratio(half, 40, 1);
  auto s = synthesize(half, found.ratio);
  EXPECT_TRUE(verify_crossing(s.configuration, s.neighborhood, s.spec).verdict());
}

TEST(StageRatios, AreInformationalBounds) {
  auto p = plan_crossing_vectors(Shape::unit_disk());
  auto sr = stage_ratios(p);
  EXPECT_GT(sr.r1, 0);
  EXPECT_EQ(sr.max(), std::max({sr.r1, sr.r2, sr.r3, sr.r4}));
  // each small disk really holds its stage size at the reported ratio
  Rational rad = p.epsilon / 2;
  EXPECT_GE(lattice_points(Shape::disk(p.v1, rad), sr.r1).size(), 4u);
  EXPECT_GE(lattice_points(Shape::disk(Point2{0, 0} - p.h, rad), sr.r2).size(), 6u);
}

TEST(FindMinWorkingRatio, UnitDisk) {
  auto found = find_min_working_ratio(Shape::unit_disk(), 20, Rational(1, 4));
  EXPECT_LE(found.ratio, 20);
  EXPECT_EQ(found.ratio * 4, Rational(static_cast<std::int64_t>(found.attempts)));
  for (const auto& [r, ok] : found.spot_checks) EXPECT_TRUE(ok) << format_rational(r);
  auto s = synthesize(Shape::unit_disk(), found.ratio);
  EXPECT_TRUE(verify_crossing(s.configuration, s.neighborhood, s.spec).verdict());
  EXPECT_THROW(find_min_working_ratio(Shape::unit_disk(), 3, Rational(1, 4)), NoRatioFound);
  EXPECT_THROW(find_min_working_ratio(Shape::polygon({{0, 0}, {1, 0}, {2, 0}}), 20, 1), FlatShape);
}
