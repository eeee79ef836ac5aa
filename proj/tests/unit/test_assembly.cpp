#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cpd/io.hpp"
#include "cpd/verify.hpp"
#include "test_support.hpp"

using namespace cpd;
using namespace cpd::test;

namespace {

PointCloud two_points() { return cloud_from_csv("0,0,0,0,0.5\n1,1,0,0,0.5\n", 2); }

Material one_only(double horizon) {
  Material m;
  m.horizon = horizon;
  return m;
}

struct Grid {
  PointCloud cloud;
  NeighborTable table;
  Material mat;
};

Grid grid2(double h, double ratio, InteractionFlags f, std::vector<Box> holes = {}) {
  Grid g;
  g.cloud = generate_uniform_grid(box2(0, 1), holes, h, 2);
  g.table = table_for(g.cloud, ratio * h, f);
  g.mat = Material{1.0, f.two ? 0.8 : 0.0, f.three ? 0.6 : 0.0, ratio * h, f};
  return g;
}

Grid grid3(double h, double ratio, InteractionFlags f) {
  Grid g;
  g.cloud = generate_uniform_grid(box3(0, 1), {}, h, 3);
  g.table = table_for(g.cloud, ratio * h, f);
  g.mat = Material{1.0, f.two ? 0.8 : 0.0, f.three ? 0.6 : 0.0, ratio * h, f};
  return g;
}

}  // namespace

TEST(Assembly, ReferenceIsStressFree) {
  for (auto mode : {AssemblyMode::collocation, AssemblyMode::variational}) {
    const Grid g = grid3(0.25, 2.0, {true, true, true});
    const AssembledSystem s = assemble(g.cloud, g.table, g.cloud.positions, g.mat, {mode}, false);
    EXPECT_LT(s.R.lpNorm<Eigen::Infinity>(), 1e-14);
    EXPECT_EQ(s.energy, 0.0);
  }
}

TEST(Assembly, CornerEnergyUnderUniformStretch) {
  const PointCloud c = unit_square_corners();
  const NeighborTable t = table_for(c, 2.0);
  std::vector<Vec3> x = c.positions;
  for (auto& p : x) p *= 1.1;
  // frozen: tests/oracles/frozen.json
  EXPECT_NEAR(total_energy(c, t, x, one_only(2.0)), 0.002133883476483184, 1e-17);
}

TEST(Assembly, TwoPointResidualInBothModes) {
  const PointCloud c = two_points();
  const NeighborTable t = table_for(c, 1.5);
  const std::vector<Vec3> x{Vec3::Zero(), Vec3(2, 0, 0)};
  const Material m = one_only(1.5);

  // frozen: tests/oracles/frozen.json
  EXPECT_DOUBLE_EQ(total_energy(c, t, x, m), 0.125);
  const Eigen::VectorXd rv = assemble_residual(c, t, x, m, {AssemblyMode::variational});
  Eigen::VectorXd expect_v(6);
  expect_v << -0.25, 0, 0, 0.25, 0, 0;
  EXPECT_LT((rv - expect_v).norm(), 1e-15);

  const Eigen::VectorXd rc = assemble_residual(c, t, x, m, {AssemblyMode::collocation});
  Eigen::VectorXd expect_c(6);
  expect_c << 0.5, 0, 0, -0.5, 0, 0;
  EXPECT_LT((rc - expect_c).norm(), 1e-15);
}

// Away from the boundary a uniform lattice gives every centre the same
// effective volumes, and the two residuals differ by the factor -V.
TEST(Assembly, ModesAgreeOnInteriorRows) {
  for (InteractionFlags f : {InteractionFlags{true, false, false}, InteractionFlags{true, true, false}}) {
    const Grid g = grid2(0.05, 2.0, f);
    std::vector<Vec3> x = g.cloud.positions;
    for (auto& p : x) p = Vec3(1.01 * p.x() + 0.003 * p.y() * p.y(), 0.995 * p.y(), 0.0);
    const Eigen::VectorXd rc = assemble_residual(g.cloud, g.table, x, g.mat, {AssemblyMode::collocation});
    const Eigen::VectorXd rv = assemble_residual(g.cloud, g.table, x, g.mat, {AssemblyMode::variational});
    const double margin = 2.0 * g.mat.horizon + 1e-9;
    int compared = 0;
    for (std::size_t a = 0; a < g.cloud.size(); ++a) {
      const Vec3& X = g.cloud.positions[a];
      if (X.x() < margin || X.x() > 1 - margin || X.y() < margin || X.y() > 1 - margin) continue;
      const Vec3 c = rc.segment<3>(3 * a), v = rv.segment<3>(3 * a);
      EXPECT_LT((v + g.cloud.volumes[a] * c).norm(), 1e-10 * g.cloud.volumes[a] * c.norm()) << "point " << a;
      ++compared;
    }
    EXPECT_GT(compared, 100);
  }
}

TEST(Assembly, GradientAndTangentMatchFiniteDifferences) {
  std::mt19937_64 rng(21);
  for (InteractionFlags f : {InteractionFlags{true, false, false}, InteractionFlags{true, true, false},
                             InteractionFlags{true, false, true}, InteractionFlags{true, true, true}}) {
    const RandomProblem p = random_problem({3, 18, 1.0, 2.0, 0.2, false, f}, rng);
    const std::vector<Vec3> x = random_state(p.cloud, 0.1, rng);
    for (auto mode : {AssemblyMode::variational, AssemblyMode::collocation}) {
      const DiscreteModel m = make_model(p.cloud, p.table, p.material, {mode}, 1.0);
      if (mode == AssemblyMode::variational) {
        const auto r = fd_gradient_check(m, x);
        EXPECT_TRUE(r.pass) << r.max_rel_err;
      }
      const auto k = fd_tangent_check(m, x);
      EXPECT_TRUE(k.pass) << k.max_rel_err;
    }
  }
}

TEST(Assembly, EnumerationsAgree) {
  std::mt19937_64 rng(22);
  const Grid g = grid3(0.25, 2.0, {true, true, true});
  const std::vector<Vec3> x = random_state(g.cloud, 0.02, rng);
  for (auto mode : {AssemblyMode::collocation, AssemblyMode::variational}) {
    const auto r = enumeration_check(g.cloud, g.table, x, g.mat, mode);
    EXPECT_TRUE(r.pass) << r.max_rel_err;
  }
}

TEST(Assembly, VariationalTangentIsSymmetric) {
  std::mt19937_64 rng(23);
  const Grid g = grid3(0.25, 2.0, {true, true, true});
  const std::vector<Vec3> x = random_state(g.cloud, 0.03, rng);
  const BlockCsr K = assemble_tangent(g.cloud, g.table, x, g.mat, {AssemblyMode::variational});
  EXPECT_LE(K.max_asymmetry(), 1e-10 * K.max_abs());
  const BlockCsr Kc = assemble_tangent(g.cloud, g.table, x, g.mat, {AssemblyMode::collocation});
  const auto pattern = symmetry_check(Kc, std::numeric_limits<double>::infinity());
  EXPECT_TRUE(pattern.pass) << pattern.note;
}

TEST(Assembly, CollocationForcesBalanceMoments) {
  std::mt19937_64 rng(24);
  const Grid g = grid3(0.25, 2.0, {true, true, true});
  const std::vector<Vec3> x = random_state(g.cloud, 0.05, rng);
  EXPECT_TRUE(angular_momentum_check(g.cloud, g.table, x, g.mat, Interaction::one, 1e-14).pass);
  EXPECT_TRUE(angular_momentum_check(g.cloud, g.table, x, g.mat, Interaction::two, 1e-12).pass);
  EXPECT_TRUE(angular_momentum_check(g.cloud, g.table, x, g.mat, Interaction::three, 1e-12).pass);
}

TEST(Assembly, RigidMotionInvariance) {
  std::mt19937_64 rng(25);
  const Grid g = grid3(0.25, 2.0, {true, true, true});
  const std::vector<Vec3> x = random_state(g.cloud, 0.05, rng, true);
  for (auto mode : {AssemblyMode::collocation, AssemblyMode::variational}) {
    const DiscreteModel m = make_model(g.cloud, g.table, g.mat, {mode}, 0.25);
    const auto t = translation_check(m, x, Vec3(0.5, -0.25, 0.125));
    EXPECT_TRUE(t.pass) << t.max_rel_err;
    const auto o = objectivity_check(m, x, rng);
    EXPECT_TRUE(o.pass) << o.max_rel_err;
  }
}

TEST(Assembly, PatternIsPointPlusHorizon) {
  const Grid g = grid2(0.1, 2.0, {true, true, false});
  const BlockCsr K = assemble_tangent(g.cloud, g.table, g.cloud.positions, g.mat);
  for (std::size_t a = 0; a < g.cloud.size(); ++a) {
    std::vector<PointId> expect(g.table.neighbors(a).begin(), g.table.neighbors(a).end());
    expect.push_back(static_cast<PointId>(a));
    std::sort(expect.begin(), expect.end());
    const auto cols = K.cols(a);
    EXPECT_TRUE(std::equal(cols.begin(), cols.end(), expect.begin(), expect.end())) << "row " << a;
  }
}

TEST(Assembly, RowsBesideAHoleAreSparser) {
  const Grid g = grid2(0.05, 3.0, {true, true, false}, {Box{Vec3(0.4, 0.4, 0), Vec3(0.6, 0.6, 0)}});
  std::vector<Vec3> x = g.cloud.positions;
  for (auto& p : x) p.x() *= 1.001;
  const BlockCsr K = assemble_tangent(g.cloud, g.table, x, g.mat);
  const auto nnz = K.scalar_row_nonzeros();
  const std::size_t beside = nearest_points(g.cloud, Vec3(0.375, 0.5, 0)).front();
  const std::size_t far = nearest_points(g.cloud, Vec3(0.175, 0.175, 0)).front();
  EXPECT_LT(nnz[3 * beside], nnz[3 * far]);
  EXPECT_LT(g.table.bond_count(beside), g.table.bond_count(far));
}

TEST(Assembly, SparsityCsv) {
  const Grid g = grid2(0.25, 2.0, {true, false, false});
  const BlockCsr K = assemble_tangent(g.cloud, g.table, g.cloud.positions, g.mat);
  std::ostringstream out;
  write_sparsity_csv(out, K);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "row,col,abs_value");
}

TEST(Assembly, CollapseNamesThePoint) {
  const PointCloud c = two_points();
  const NeighborTable t = table_for(c, 1.5);
  const std::vector<Vec3> x{Vec3::Zero(), Vec3::Zero()};
  try {
    assemble_residual(c, t, x, one_only(1.5));
    FAIL() << "expected a collapsed bond";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::collapsed_bond);
    EXPECT_NE(e.point(), kNoPoint);
  }
}
