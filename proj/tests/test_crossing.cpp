#include <gtest/gtest.h>

#include <random>

#include <sandpile/crossing.hpp>

using namespace sandpile;

namespace {

Neighborhood vn1() { return Neighborhood::von_neumann(1); }

Configuration row_wire(std::int64_t n, std::int64_t y, std::int64_t grains) {
  Configuration c;
  for (std::int64_t x = 0; x < n; ++x) c.set({x, y}, grains);
  return c;
}

}  // namespace

TEST(Positioning, Examples) {
  EXPECT_EQ(positioning(Side::West, UnitVectorEn(7, 3)), (Configuration{{{0, 3}, 1}}));
  EXPECT_EQ(positioning(Side::North, UnitVectorEn(1, 0)), (Configuration{{{0, 0}, 1}}));
  EXPECT_EQ(positioning(Side::South, UnitVectorEn(5, 2)), (Configuration{{{2, 4}, 1}}));
  EXPECT_EQ(positioning(Side::East, UnitVectorEn(5, 1)), (Configuration{{{4, 1}, 1}}));
  EXPECT_THROW(UnitVectorEn(3, 3), InvalidArgument);
  EXPECT_THROW(UnitVectorEn(0, 0), InvalidArgument);
}

TEST(Transporter, EmptyFails) {
  auto r = verify_transporter(Configuration{}, vn1(), Side::West, Side::East, {5, 2}, {5, 2});
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.witness_time.has_value());
}

TEST(Transporter, ThreeCellWire) {
  for (std::int64_t k = 0; k < 3; ++k) {
    auto r = verify_transporter(row_wire(3, k, 3), vn1(), Side::West, Side::East, {3, k}, {3, k});
    EXPECT_TRUE(r.ok) << k;
    EXPECT_EQ(r.witness_time, 2);
    auto wrong = verify_transporter(row_wire(3, k, 3), vn1(), Side::West, Side::East, {3, k}, {3, (k + 1) % 3});
    EXPECT_FALSE(wrong.ok);
    EXPECT_FALSE(wrong.evolution.empty());
  }
}

TEST(Transporter, UnstableInputIsNotATransporter) {
  auto r = verify_transporter(Configuration{{{1, 1}, 4}}, vn1(), Side::West, Side::East, {3, 1}, {3, 1});
  EXPECT_FALSE(r.ok);
}

TEST(Transporter, WitnessReplaysThroughParallelStep) {
  Configuration c = row_wire(5, 2, 3);
  CrossingSpec spec(5, 2, 2, 2, 2);
  auto a = run_border_avalanche(c, vn1(), spec, Side::West);
  auto t = transport_of(a, spec, Side::East);
  ASSERT_TRUE(t.ok);
  Configuration cur = add(c, positioning(Side::West, spec.west));
  for (std::int64_t i = 0; i < *t.witness_time; ++i) cur = parallel_step(cur, vn1()).next;
  EXPECT_EQ(active_set(cur, vn1()), (std::vector<GridPoint>{spec.border_cell(Side::East)}));
}

TEST(Isolation, Examples) {
  EXPECT_TRUE(verify_isolation(Configuration{}, vn1(), IsolationAxis::WestToSouth, {4, 1}).ok);
  EXPECT_TRUE(verify_isolation(row_wire(3, 0, 3), vn1(), IsolationAxis::WestToSouth, {3, 0}).ok);
  Configuration column{{{0, 0}, 3}, {{0, 1}, 3}, {{0, 2}, 3}};
  auto bad = verify_isolation(column, vn1(), IsolationAxis::WestToSouth, {3, 0});
  EXPECT_FALSE(bad.ok);
  ASSERT_TRUE(bad.violation.has_value());
  EXPECT_EQ(bad.violation->first, 2);
  EXPECT_EQ(bad.violation->second, (GridPoint{0, 2}));
  auto east = verify_isolation(row_wire(3, 0, 3), vn1(), IsolationAxis::NorthToEast, {3, 0});
  EXPECT_FALSE(east.ok);  // the north seed at (0,0) runs the row to (2,0)
}

TEST(Crossing, EmptyIsNot) {
  auto r = verify_crossing(Configuration{}, vn1(), CrossingSpec(5, 2, 2, 2, 2));
  EXPECT_TRUE(r.stable);
  EXPECT_FALSE(r.west_to_east.ok);
  EXPECT_FALSE(r.verdict());
}

TEST(Crossing, OutsideSupportIsReported) {
  Configuration c{{{9, 9}, 1}};
  auto r = verify_crossing(c, vn1(), CrossingSpec(3, 1, 1, 1, 1));
  EXPECT_FALSE(r.inside);
  EXPECT_FALSE(r.verdict());
}

// A hand-built crossing under a neighborhood with long jumps: signals hop
// over each other's lines.
TEST(Crossing, HandBuiltJumpCrossing) {
  Neighborhood nb({{3, 0}, {0, 3}, {1, 1}, {-1, -1}});  // p = 4
  // W->E along row 1: (0,1) -> (3,1); N->S along column 1: (1,0) -> (1,3).
  Configuration c{{{0, 1}, 3}, {{3, 1}, 3}, {{1, 0}, 3}, {{1, 3}, 3}};
  CrossingSpec spec(4, 1, 1, 1, 1);
  auto r = verify_crossing(c, nb, spec);
  EXPECT_TRUE(r.stable);
  EXPECT_TRUE(r.west_to_east.ok);
  EXPECT_TRUE(r.north_to_south.ok);
  EXPECT_TRUE(r.west_isolated_to_south.ok);
  EXPECT_TRUE(r.north_isolated_to_east.ok);
  EXPECT_TRUE(r.verdict());
}

TEST(Crossing, TransposeSwapsTheSignals) {
  Neighborhood nb({{3, 0}, {0, 3}, {1, 1}, {-1, -1}, {2, -1}});
  Configuration c{{{0, 1}, 4}, {{3, 1}, 4}, {{1, 0}, 4}, {{1, 3}, 4}, {{2, 2}, 2}};
  CrossingSpec spec(4, 1, 1, 1, 1);
  auto a = verify_crossing(c, nb, spec);
  auto b = verify_crossing(transpose(c), transpose(nb), spec.transposed());
  EXPECT_EQ(a.stable, b.stable);
  EXPECT_EQ(a.west_to_east.ok, b.north_to_south.ok);
  EXPECT_EQ(a.north_to_south.ok, b.west_to_east.ok);
  EXPECT_EQ(a.west_to_east.witness_time, b.north_to_south.witness_time);
  EXPECT_EQ(a.west_isolated_to_south.ok, b.north_isolated_to_east.ok);
  EXPECT_EQ(a.verdict(), b.verdict());
}

// Stable rectangle plus one border grain: every vertex fires at most once,
// nothing outside fires, grains are conserved.
TEST(BorderAvalanche, AtMostOnceProperty) {
  std::mt19937_64 rng(5);
  std::vector<Neighborhood> nbs{vn1(), Neighborhood::moore(1), Neighborhood::von_neumann(2),
                                Neighborhood({{2, 1}, {-1, 0}, {0, -2}, {1, 1}, {-1, 2}, {0, 1}})};
  for (int trial = 0; trial < 60; ++trial) {
    const auto& nb = nbs[trial % nbs.size()];
    std::uniform_int_distribution<std::int64_t> side(2, 9);
    std::int64_t w = side(rng), h = side(rng);
    std::uniform_int_distribution<std::int64_t> g(0, static_cast<std::int64_t>(nb.p()) - 1);
    Configuration c;
    for (std::int64_t x = 0; x < w; ++x)
      for (std::int64_t y = 0; y < h; ++y) c.set({x, y}, g(rng));
    CrossingSpec spec(w, h, 0, 0, 0, std::uniform_int_distribution<std::int64_t>(0, h - 1)(rng));
    auto a = run_border_avalanche(c, nb, spec, Side::West);
    for (const auto& [q, k] : a.fire_count) {
      EXPECT_EQ(k, 1);
      EXPECT_TRUE(spec.box().contains(q));
    }
    EXPECT_EQ(a.final_configuration.total(), c.total() + 1);
  }
}

// Without vectors pointing every way, grains can pile up and fire outside
// the rectangle; the at-most-once part still holds.
TEST(BorderAvalanche, UnbalancedNeighborhoodFiresOutside) {
  Neighborhood nb({{1, 0}, {1, 1}});
  Configuration c;
  for (std::int64_t x = 0; x < 4; ++x)
    for (std::int64_t y = 0; y < 4; ++y) c.set({x, y}, 1);
  CrossingSpec spec(4, 0, 0, 0, 0);
  auto a = run_border_avalanche(c, nb, spec, Side::West);
  std::vector<GridPoint> outside;
  for (const auto& [q, k] : a.fire_count) {
    EXPECT_EQ(k, 1);
    if (!spec.box().contains(q)) outside.push_back(q);
  }
  EXPECT_EQ(outside, (std::vector<GridPoint>{{4, 1}, {4, 2}, {4, 3}, {5, 2}, {5, 3}, {6, 3}}));
}
