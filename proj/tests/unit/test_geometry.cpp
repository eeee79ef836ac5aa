#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "cpd/geometry.hpp"
#include "test_support.hpp"

using namespace cpd;
using namespace cpd::test;

TEST(Grid, UnitSquareHalfSpacing) {
  const PointCloud c = generate_uniform_grid(box2(0, 1), {}, 0.5, 2);
  ASSERT_EQ(c.size(), 4u);
  const std::vector<Vec3> expected{{0.25, 0.25, 0}, {0.75, 0.25, 0}, {0.25, 0.75, 0}, {0.75, 0.75, 0}};
  for (const Vec3& e : expected) {
    EXPECT_TRUE(std::any_of(c.positions.begin(), c.positions.end(), [&](const Vec3& p) { return (p - e).norm() < 1e-15; }));
  }
  for (double v : c.volumes) EXPECT_DOUBLE_EQ(v, 0.25);
  EXPECT_DOUBLE_EQ(c.total_volume(), 1.0);
  EXPECT_EQ(c.dim, 2);
  ASSERT_TRUE(c.spacing.has_value());
}

TEST(Grid, SquareWithCentralHole) {
  const Box hole = box2(0.3, 0.7);
  const PointCloud c = generate_uniform_grid(box2(0, 1), std::span(&hole, 1), 0.1, 2);
  // frozen: tests/oracles/frozen.json
  EXPECT_EQ(c.size(), 84u);
  EXPECT_NEAR(c.total_volume(), 0.84, 1e-12);
}

TEST(Grid, UnitCubeQuarterSpacing) {
  const PointCloud c = generate_uniform_grid(box3(0, 1), {}, 0.25, 3);
  EXPECT_EQ(c.size(), 64u);
  for (double v : c.volumes) EXPECT_DOUBLE_EQ(v, 0.015625);
}

TEST(Grid, VolumeClosureOverManyBoxes) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> cells(1, 9);
  for (int trial = 0; trial < 40; ++trial) {
    const int dim = trial % 2 ? 3 : 2;
    const double h = std::ldexp(1.0, -(trial % 4)) * 0.3;
    Box b;
    for (int k = 0; k < dim; ++k) {
      b.lo[k] = -0.7 * k;
      b.hi[k] = b.lo[k] + h * cells(rng);
    }
    const PointCloud c = generate_uniform_grid(b, {}, h, dim);
    EXPECT_NEAR(c.total_volume(), b.measure(dim), 1e-12 * b.measure(dim));
  }
}

TEST(Grid, NonConformingSpacingIsRejected) {
  EXPECT_EQ(code_of([] { generate_uniform_grid(box2(0, 1), {}, 0.3, 2); }), ErrorCode::non_conforming_domain);
}

TEST(Grid, HoleCoveringEverythingIsEmpty) {
  const Box hole = box2(0, 1);
  EXPECT_EQ(code_of([&] { generate_uniform_grid(box2(0, 1), std::span(&hole, 1), 0.25, 2); }), ErrorCode::empty_cloud);
}

TEST(PointCloudCsv, RoundTripAndDimension) {
  const Box hole = box2(0.25, 0.75);
  const PointCloud c = generate_uniform_grid(box2(0, 1), std::span(&hole, 1), 0.25, 2);
  std::stringstream s;
  write_point_cloud_csv(s, c);
  EXPECT_EQ(s.str().substr(0, s.str().find('\n')), "id,X1,X2,X3,V");
  const PointCloud back = read_point_cloud_csv(s);
  EXPECT_EQ(back.dim, 2);
  ASSERT_EQ(back.size(), c.size());
  for (std::size_t a = 0; a < c.size(); ++a) {
    EXPECT_EQ(back.positions[a], c.positions[a]);
    EXPECT_EQ(back.volumes[a], c.volumes[a]);
  }
  EXPECT_FALSE(back.spacing.has_value());
}

TEST(PointCloudCsv, RejectsNonPositiveVolume) {
  EXPECT_THROW(cloud_from_csv("0,0,0,0,0\n1,1,0,0,1\n", 2), Error);
}

TEST(Neighbors, CollinearTripleHasNoPairs) {
  const PointCloud c = cloud_from_csv("0,0,0,0,0.01\n1,0.1,0,0,0.01\n2,0.2,0,0,0.01\n", 2);
  NeighborOptions o;
  o.horizon = 0.5;
  o.enabled.two = true;
  const NeighborTable t = build_neighbor_table(c, [&] {
    NeighborOptions one = o;
    one.enabled.two = false;
    return one;
  }());
  EXPECT_EQ(t.bond_count(0), 2u);
  try {
    build_neighbor_table(c, o);
    FAIL() << "expected DegenerateNeighborhood";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_neighborhood);
    EXPECT_NE(e.point(), kNoPoint);
  }
}

TEST(Neighbors, UnitSquareCornersCountsAndVolumes) {
  const PointCloud c = unit_square_corners();
  const NeighborTable t = table_for(c, 2.0, {true, true, false});
  // frozen: tests/oracles/frozen.json
  for (std::size_t a = 0; a < 4; ++a) {
    EXPECT_EQ(t.bond_count(a), 3u);
    EXPECT_EQ(t.pair_count(a), 6u);
    EXPECT_DOUBLE_EQ(t.neighborhood_volume(a), 0.75);
    EXPECT_DOUBLE_EQ(t.v1(a), 0.25);
    EXPECT_DOUBLE_EQ(t.v2(a), 0.09375);
  }
}

TEST(Neighbors, HorizonBelowSpacingIsolatesPoints) {
  const PointCloud c = generate_uniform_grid(box2(0, 1), {}, 0.1, 2);
  EXPECT_EQ(code_of([&] { table_for(c, 0.05); }), ErrorCode::isolated_point);
}

TEST(Neighbors, ThreeNeighbourRejectedIn2D) {
  const PointCloud c = generate_uniform_grid(box2(0, 1), {}, 0.1, 2);
  EXPECT_EQ(code_of([&] { table_for(c, 0.3, {true, false, true}); }), ErrorCode::invalid_argument);
}

TEST(Neighbors, OneNeighbourIsMandatory) {
  const PointCloud c = generate_uniform_grid(box2(0, 1), {}, 0.1, 2);
  EXPECT_EQ(code_of([&] { table_for(c, 0.3, {false, true, false}); }), ErrorCode::invalid_argument);
}

TEST(Neighbors, CellListMatchesBruteForce) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    const int dim = trial % 2 ? 3 : 2;
    const std::size_t n = 100 + 40 * static_cast<std::size_t>(trial);
    std::vector<Vec3> pts(n);
    for (Vec3& p : pts) p = Vec3(u(rng), u(rng), dim == 3 ? u(rng) : 0.0) * (1.0 + trial);
    // Put some points exactly one horizon apart.
    const double h = 0.17 * (1.0 + trial);
    pts[1] = pts[0] + Vec3(h, 0, 0);
    const auto found = find_neighbors(pts, h);
    for (std::size_t a = 0; a < n; ++a) {
      std::vector<PointId> brute;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != a && within_horizon(pts[a], pts[i], h)) brute.push_back(static_cast<PointId>(i));
      }
      ASSERT_EQ(found[a], brute) << "point " << a << " trial " << trial;
    }
  }
}

namespace {

void expect_table_closure(const PointCloud& c, const NeighborTable& t) {
  const double h = t.horizon();
  for (std::size_t a = 0; a < c.size(); ++a) {
    const auto nb = t.neighbors(a);
    for (PointId i : nb) {
      const auto back = t.neighbors(i);
      EXPECT_TRUE(std::binary_search(back.begin(), back.end(), static_cast<PointId>(a)));
    }
    std::set<std::array<PointId, 2>> pairs(t.pairs(a).begin(), t.pairs(a).end());
    for (const auto& p : t.pairs(a)) {
      EXPECT_TRUE(pairs.contains({p[1], p[0]}));
      EXPECT_TRUE(within_horizon(c.positions[p[0]], c.positions[p[1]], h));
    }
    for (const auto& q : t.triplets(a)) {
      EXPECT_LT(q[0], q[1]);
      EXPECT_LT(q[1], q[2]);
      for (int r = 0; r < 3; ++r) {
        EXPECT_TRUE(within_horizon(c.positions[a], c.positions[q[r]], h));
        EXPECT_TRUE(within_horizon(c.positions[q[r]], c.positions[q[(r + 1) % 3]], h));
      }
    }
  }
}

}  // namespace

TEST(Neighbors, MembershipIsSymmetricAndPairsCloseUnderSwap) {
  const Box hole = box2(0.4, 0.6);
  const PointCloud c2 = generate_uniform_grid(box2(0, 1), std::span(&hole, 1), 0.1, 2);
  expect_table_closure(c2, table_for(c2, 0.25, {true, true, false}));
  const Box hole3 = box3(0.25, 0.5);
  const PointCloud c3 = generate_uniform_grid(box3(0, 1), std::span(&hole3, 1), 0.25, 3);
  expect_table_closure(c3, table_for(c3, 0.5, {true, true, true}));
}

TEST(Neighbors, TripletsNeedNonCoplanarSets) {
  // Four coplanar points around a centre: no triplet can contribute.
  const PointCloud c =
      cloud_from_csv("0,0,0,0,1\n1,1,0,0,1\n2,0,1,0,1\n3,1,1,0,1\n4,0.5,0.5,1,1\n", 3);
  const NeighborTable t = table_for(c, 2.0, {true, false, true});
  // Point 0: neighbours 1,2,3 are coplanar with it, so only sets with 4 count.
  for (const auto& q : t.triplets(0)) EXPECT_EQ(q[2], 4u);
  EXPECT_EQ(t.triplet_count(0), 6u * 3u);
}

TEST(Quadrature, IdentitiesHoldOnGrids) {
  const Box hole = box2(0.3, 0.7);
  for (bool with_hole : {false, true}) {
    const PointCloud c = generate_uniform_grid(box2(0, 1), with_hole ? std::span(&hole, 1) : std::span<const Box>{},
                                               0.05, 2);
    const QuadratureReport q = quadrature_fidelity_report(table_for(c, 0.15, {true, true, false}));
    EXPECT_LE(q.max_rel_err_of(Interaction::one), 1e-14);
    EXPECT_LE(q.max_rel_err_of(Interaction::two), 1e-14);
  }
  const Box hole3 = box3(0.25, 0.75);
  const PointCloud c3 = generate_uniform_grid(box3(0, 1), std::span(&hole3, 1), 0.125, 3);
  const QuadratureReport q3 = quadrature_fidelity_report(table_for(c3, 0.25, {true, true, true}));
  for (auto k : {Interaction::one, Interaction::two, Interaction::three}) EXPECT_LE(q3.max_rel_err_of(k), 1e-14);
}

TEST(Quadrature, OnlyEnabledIdentitiesAreReported) {
  const PointCloud c = generate_uniform_grid(box2(0, 1), {}, 0.1, 2);
  const QuadratureReport q = quadrature_fidelity_report(table_for(c, 0.25));
  for (const auto& chk : q.checks) EXPECT_EQ(chk.kind, Interaction::one);
  EXPECT_EQ(q.checks.size(), c.size());
}

TEST(Quadrature, DeletedPairIsDetected) {
  const PointCloud c = unit_square_corners();
  NeighborTable t = table_for(c, 2.0, {true, true, false});
  t.erase_pair_for_testing(2, 0);
  const QuadratureReport q = quadrature_fidelity_report(t);
  // frozen: tests/oracles/frozen.json, 1 / #N2
  EXPECT_NEAR(q.max_rel_err_of(Interaction::two), 1.0 / 6.0, 1e-14);
  bool found = false;
  for (const auto& chk : q.checks) {
    if (chk.kind == Interaction::two && chk.rel_err > 0.1) {
      EXPECT_EQ(chk.point, 2u);
      found = true;
    }
  }
  EXPECT_TRUE(found);
  std::stringstream s;
  write_quadrature_report_csv(s, q);
  EXPECT_EQ(s.str().substr(0, s.str().find('\n')), "point_id,check,lhs,rhs,rel_err");
}

TEST(Volumes, InteriorNeighbourhoodApproachesBall) {
  const double delta = 0.3;
  // Lattice counts fluctuate, so compare a coarse and a fine ratio only.
  double previous = 1.0;
  for (int ratio : {2, 8}) {
    const double h = delta / ratio;
    const double half = h * (ratio + 2.5);
    const PointCloud c = generate_uniform_grid(box3(-half, half), {}, h, 3);
    const NeighborTable t = table_for(c, delta);
    std::size_t centre = 0;
    for (std::size_t a = 0; a < c.size(); ++a) {
      if (c.positions[a].norm() < c.positions[centre].norm()) centre = a;
    }
    const double ball = 4.0 / 3.0 * std::numbers::pi * delta * delta * delta;
    const double err = std::abs(t.neighborhood_volume(centre) - ball) / ball;
    EXPECT_LT(err, previous);
    previous = err;
  }
  EXPECT_LT(previous, 0.02);
}
