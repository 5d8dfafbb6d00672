#include <gtest/gtest.h>

#include <random>

#include <sandpile/geometry.hpp>

using namespace sandpile;

namespace {

// Integer-only oracle for a disk of radius num/den at the origin scaled by
// r = rn/rd: (x, y) is in iff (x^2 + y^2) (den rd)^2 <= (num rn)^2.
std::vector<MovementVector> disk_points(std::int64_t num, std::int64_t den, std::int64_t rn, std::int64_t rd) {
  std::vector<MovementVector> out;
  std::int64_t bound = num * rn / (den * rd) + 1;
  std::int64_t lhs_scale = (den * rd) * (den * rd), rhs = (num * rn) * (num * rn);
  for (std::int64_t x = -bound; x <= bound; ++x)
    for (std::int64_t y = -bound; y <= bound; ++y)
      if ((x || y) && (x * x + y * y) * lhs_scale <= rhs) out.push_back({x, y});
  return out;
}

Shape triangle(Point2 a, Point2 b, Point2 c) { return Shape::polygon({a, b, c}); }

}  // namespace

TEST(Discretize, UnitDiskRatioOne) {
  auto nb = discretize(Shape::unit_disk(), 1);
  EXPECT_EQ(nb, Neighborhood::von_neumann(1));
}

TEST(Discretize, UnitDiskAgainstEnumeration) {
  struct R {
    std::int64_t n, d;
  };
  for (R r : {R{1, 2}, R{1, 1}, R{2, 1}, R{7, 2}, R{29, 4}, R{10, 1}, R{30, 1}}) {
    auto pts = lattice_points(Shape::unit_disk(), Rational(r.n, r.d));
    EXPECT_EQ(pts, disk_points(1, 1, r.n, r.d)) << r.n << "/" << r.d;
  }
  EXPECT_EQ(discretize(Shape::unit_disk(), 2).p(), 12u);
  // frozen counts from the oracle
  EXPECT_EQ(lattice_points(Shape::unit_disk(), Rational(29, 4)).size(), 168u);
  EXPECT_EQ(lattice_points(Shape::unit_disk(), 10).size(), 316u);
  EXPECT_THROW(discretize(Shape::unit_disk(), Rational(1, 2)), EmptyNeighborhood);
  EXPECT_THROW(lattice_points(Shape::unit_disk(), 0), InvalidArgument);
}

TEST(Discretize, ExactPolygonBoundary) {
  // (1,1) sits exactly on the hypotenuse x + y = 2 at r = 1
  auto pts = lattice_points(triangle({0, 0}, {2, 0}, {0, 2}), 1);
  EXPECT_EQ(pts, (std::vector<MovementVector>{{0, 1}, {0, 2}, {1, 0}, {1, 1}, {2, 0}}));
  auto thirds = lattice_points(triangle({0, 0}, {Rational(2, 3), 0}, {0, Rational(2, 3)}), 3);
  EXPECT_EQ(thirds, (std::vector<MovementVector>{{0, 1}, {0, 2}, {1, 0}, {1, 1}, {2, 0}}));
}

TEST(Discretize, Deterministic) {
  Shape s = Shape::disk({Rational(1, 3), Rational(-1, 7)}, Rational(5, 4));
  EXPECT_EQ(lattice_points(s, Rational(13, 2)), lattice_points(s, Rational(13, 2)));
}

TEST(Inverse, CommutesWithDiscretization) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> num(-8, 8), rad(2, 12), ratio(3, 40);
  for (int i = 0; i < 50; ++i) {
    Shape s = i % 2 ? Shape::disk({Rational(num(rng), 8), Rational(num(rng), 8)}, Rational(rad(rng), 8))
                    : triangle({Rational(num(rng), 4), 0}, {2, Rational(num(rng), 4)}, {Rational(num(rng), 8), 3});
    Rational r(ratio(rng), 4);
    auto pts = lattice_points(s, r);
    auto inv = lattice_points(inverse_shape(s), r);
    if (pts.empty()) {
      EXPECT_TRUE(inv.empty());
      continue;
    }
    EXPECT_EQ(inverse_neighborhood(Neighborhood(pts)), Neighborhood(inv));
  }
}

TEST(Inverse, Involution) {
  Shape disk = Shape::unit_disk();
  EXPECT_EQ(inverse_shape(disk), disk);
  EXPECT_EQ(discretize(inverse_shape(disk), Rational(29, 4)), discretize(disk, Rational(29, 4)));
  Shape cut = disk.cut({0, 1, 0});
  EXPECT_EQ(inverse_shape(inverse_shape(cut)), cut);
}

TEST(NonFlat, Examples) {
  EXPECT_TRUE(is_non_flat(Shape::unit_disk()).non_flat);
  Shape segment = Shape::polygon({{0, 0}, {1, 1}, {2, 2}});
  EXPECT_FALSE(is_non_flat(segment).non_flat);
  Shape mixed({Primitive{Disk{{0, 0}, 1}, {}}, Primitive{ConvexPolygon{{{3, 0}, {4, 0}, {5, 0}}}, {}}});
  EXPECT_FALSE(is_non_flat(mixed).non_flat);
  // a disk sliced to a sliver of its boundary tangent is flat
  EXPECT_FALSE(is_non_flat(Shape::unit_disk().cut({1, 0, 1})).non_flat);
  EXPECT_TRUE(is_non_flat(Shape::unit_disk().cut({0, 1, 0})).non_flat);
}

TEST(NonFlat, WitnessContainsQueryPoint) {
  Shape s = triangle({0, 0}, {4, 0}, {0, 2});
  for (Point2 q : {Point2{0, 0}, Point2{1, 1}, Point2{4, 0}, Point2{2, 1}}) {
    auto t = non_flat_witness(s, q);
    ASSERT_TRUE(t.has_value());
    EXPECT_NE(t->area2(), 0);
    for (const auto& v : {t->a, t->b, t->c}) EXPECT_TRUE(s.contains(v));
  }
  EXPECT_FALSE(non_flat_witness(s, {5, 5}).has_value());
}

TEST(Partition, HalfDisks) {
  Shape disk = Shape::unit_disk();
  auto [upper, lower] = split(disk, {0, 1, 0});
  for (int r : {1, 2, 5, 10}) EXPECT_TRUE(partition_check({upper, lower}, disk, r)) << r;
  EXPECT_TRUE(partition_check({disk}, disk, 3));
  Shape other = Shape::disk({Rational(1, 2), 0}, 1);
  EXPECT_FALSE(partition_check({disk, other}, Shape({disk.primitives()[0], other.primitives()[0]}), 4));
}

TEST(FindRatio, UnitDisk) {
  Shape disk = Shape::unit_disk();
  EXPECT_EQ(find_ratio_for_count(disk, 0), 1);
  Rational r1 = find_ratio_for_count(disk, 1);
  EXPECT_LE(r1, 1);
  EXPECT_EQ(r1, 1);
  EXPECT_EQ(find_ratio_for_count(disk, 10), 2);
  Rational r100 = find_ratio_for_count(disk, 100);
  EXPECT_EQ(r100, 6);
  EXPECT_LT(lattice_points(disk, r100 * Rational(16, 17)).size(), 100u);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> extra(0, 50);
  std::vector<Rational> checks{r100, 2 * r100};
  for (int i = 0; i < 10; ++i) checks.push_back(r100 + dyadic(extra(rng)));
  for (const auto& r : checks) EXPECT_GE(lattice_points(disk, r).size(), 100u);
  EXPECT_THROW(find_ratio_for_count(Shape::polygon({{0, 0}, {1, 0}, {2, 0}}), 3), FlatShape);
}

TEST(FindRatio, ThinCapHasNoGapsAbove) {
  Shape cap = Shape::disk({Rational(1, 8), Rational(-3, 8)}, Rational(5, 8)).cut({0, 1, Rational(7, 32)});
  for (std::size_t k : {1u, 5u}) {
    Rational r0 = find_ratio_for_count(cap, k);
    for (int i = 0; i <= 800; ++i) EXPECT_GE(lattice_points(cap, r0 + Rational(i, 8)).size(), k) << k << " " << i;
  }
}

TEST(LongestVector, Examples) {
  EXPECT_EQ(longest_vector(Shape::unit_disk()), (Point2{1, 0}));
  EXPECT_EQ(longest_vector(triangle({0, 0}, {3, 0}, {0, 1})), (Point2{3, 0}));
  EXPECT_EQ(longest_vector(Shape::disk({2, 0}, 1)), (Point2{3, 0}));
  EXPECT_THROW(longest_vector(Shape::polygon({{0, 0}, {1, 0}, {2, 0}})), FlatShape);
}

TEST(MaxOrthogonal, Examples) {
  EXPECT_EQ(max_orthogonal_vector(Shape::unit_disk(), {1, 0}), (Point2{0, 1}));
  EXPECT_EQ(max_orthogonal_vector(triangle({0, 0}, {4, 0}, {0, 2}), {4, 0}), (Point2{0, 2}));
  EXPECT_THROW(max_orthogonal_vector(Shape::unit_disk(), {0, 0}), ZeroVector);
  EXPECT_THROW(max_orthogonal_vector(Shape::polygon({{0, 0}, {1, 0}, {2, 0}}), {1, 0}), FlatShape);
}

TEST(Rational, ParseAndFormat) {
  EXPECT_EQ(parse_rational("7.25"), Rational(29, 4));
  EXPECT_EQ(parse_rational("-3/4"), Rational(-3, 4));
  EXPECT_EQ(parse_rational("1e-3"), Rational(1, 1000));
  EXPECT_EQ(format_rational(Rational(29, 4)), "7.25");
  EXPECT_EQ(format_rational(Rational(1, 3)), "1/3");
  EXPECT_THROW(parse_rational("abc"), ParseError);
}

TEST(ConvexNeighborhood, Examples) {
  EXPECT_TRUE(is_convex_neighborhood(Neighborhood::von_neumann(1)));
  EXPECT_TRUE(is_convex_neighborhood(Neighborhood::von_neumann(2)));
  EXPECT_TRUE(is_convex_neighborhood(Neighborhood::moore(1)));
  for (int r : {2, 5, 10}) EXPECT_TRUE(is_convex_neighborhood(discretize(Shape::unit_disk(), r)));
  EXPECT_TRUE(is_convex_neighborhood(discretize(triangle({0, 0}, {4, 1}, {1, 3}), 3)));
  EXPECT_TRUE(is_convex_neighborhood(Neighborhood({{1, 0}, {2, 0}, {3, 0}})));
  EXPECT_FALSE(is_convex_neighborhood(Neighborhood({{1, 0}, {3, 0}})));
  EXPECT_FALSE(is_convex_neighborhood(Neighborhood({{2, 0}, {-1, 0}, {0, 1}, {0, -1}})));
  EXPECT_FALSE(is_convex_neighborhood(Neighborhood({{3, 0}, {0, 3}, {1, 1}, {-1, -1}})));
  // the origin never counts against convexity
  EXPECT_TRUE(is_convex_neighborhood(Neighborhood({{-1, 0}, {1, 0}})));
}
