#include <gtest/gtest.h>

#include <sstream>

#include "cpd/verify.hpp"
#include "test_support.hpp"

using namespace cpd;
using namespace cpd::test;

namespace {

RandomProblem pairs_problem(std::mt19937_64& rng) {
  RandomCloudSpec s;
  s.dim = 3;
  s.points = 16;
  s.enabled = {true, true, false};
  RandomProblem p = random_problem(s, rng);
  p.material.c2 = 5.0;
  return p;
}

}  // namespace

TEST(Oracles, PassOnTheLibraryAssembly) {
  std::mt19937_64 rng(31);
  const RandomProblem p = pairs_problem(rng);
  const std::vector<Vec3> x = random_state(p.cloud, 0.1, rng);
  const DiscreteModel m = make_model(p.cloud, p.table, p.material, {AssemblyMode::variational}, 1.0);
  EXPECT_TRUE(fd_gradient_check(m, x).pass);
  EXPECT_TRUE(fd_tangent_check(m, x).pass);
}

// A pair residual with its sign flipped no longer derives from the energy.
TEST(Oracles, FlippedPairSignIsCaught) {
  std::mt19937_64 rng(32);
  const RandomProblem p = pairs_problem(rng);
  const std::vector<Vec3> x = random_state(p.cloud, 0.1, rng);
  DiscreteModel m = make_model(p.cloud, p.table, p.material, {AssemblyMode::variational}, 1.0);
  m.residual = [&](std::span<const Vec3> y) {
    return Eigen::VectorXd(assemble_residual(p.cloud, p.table, y, p.material, {AssemblyMode::variational}) -
                           2.0 * assemble_residual_of(Interaction::two, p.cloud, p.table, y, p.material,
                                                      {AssemblyMode::variational}));
  };
  const VerificationReport r = fd_gradient_check(m, x);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.max_rel_err, 1e-2);
  EXPECT_FALSE(r.offending.empty());
}

// Dropping the second-neighbour block of the pair tangent breaks K = dR/dx.
TEST(Oracles, MissingPairTangentTermIsCaught) {
  std::mt19937_64 rng(33);
  const RandomProblem p = pairs_problem(rng);
  const std::vector<Vec3> x = random_state(p.cloud, 0.1, rng);
  const AssemblyOptions opt{AssemblyMode::collocation, Enumeration::ordered};
  DiscreteModel m = make_model(p.cloud, p.table, p.material, opt, 1.0);
  ASSERT_TRUE(fd_tangent_check(m, x).pass);
  m.tangent = [&](std::span<const Vec3> y) {
    BlockCsr K = assemble_tangent(p.cloud, p.table, y, p.material, opt);
    for (std::size_t a = 0; a < p.cloud.size(); ++a) {
      const double w = 2.0 * p.table.v2(a) * p.material.c2;
      for (const auto& pr : p.table.pairs(a)) {
        const Vec3 xi1 = y[pr[0]] - y[a], xi2 = y[pr[1]] - y[a];
        const double A = (p.cloud.positions[pr[0]] - p.cloud.positions[a])
                             .cross(p.cloud.positions[pr[1]] - p.cloud.positions[a])
                             .norm();
        const Mat3 jb = w * pair_tangent_terms(xi1, xi2, A).jb;
        K.at(a, pr[1]) -= jb;
        K.at(a, a) += jb;
      }
    }
    return K;
  };
  const VerificationReport r = fd_tangent_check(m, x);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.max_rel_err, 1e-3);
}

TEST(Oracles, RigidMotionChecksCatchAbsolutePositions) {
  std::mt19937_64 rng(34);
  const RandomProblem p = pairs_problem(rng);
  const std::vector<Vec3> x = random_state(p.cloud, 0.1, rng, true);
  DiscreteModel m = make_model(p.cloud, p.table, p.material, {AssemblyMode::variational}, 1.0);
  EXPECT_TRUE(translation_check(m, x, Vec3(0.5, -0.25, 0.125)).pass);
  EXPECT_TRUE(objectivity_check(m, x, rng).pass);
  const auto base = m.energy;
  m.energy = [base](std::span<const Vec3> y) { return base(y) + 1e-3 * y[0].squaredNorm(); };
  EXPECT_FALSE(translation_check(m, x, Vec3(0.5, -0.25, 0.125)).pass);
  EXPECT_FALSE(objectivity_check(m, x, rng).pass);
}

TEST(Oracles, QuadratureChecksReportCorruption) {
  const PointCloud c = unit_square_corners();
  NeighborTable t = table_for(c, 2.0, {true, true, false});
  auto ok = quadrature_checks(t);
  ASSERT_EQ(ok.size(), 2u);
  EXPECT_TRUE(ok[0].pass && ok[1].pass);
  t.erase_pair_for_testing(2, 0);
  auto bad = quadrature_checks(t);
  EXPECT_TRUE(bad[0].pass);
  EXPECT_FALSE(bad[1].pass);
  EXPECT_EQ(bad[1].offending, std::vector<std::size_t>{2});
}

TEST(Oracles, SymmetryCheckSeesValuesAndPattern) {
  std::mt19937_64 rng(35);
  const RandomProblem p = pairs_problem(rng);
  const std::vector<Vec3> x = random_state(p.cloud, 0.1, rng);
  const BlockCsr Kv = assemble_tangent(p.cloud, p.table, x, p.material, {AssemblyMode::variational});
  EXPECT_TRUE(symmetry_check(Kv).pass);
  BlockCsr broken = Kv;
  broken.at(0, p.table.neighbors(0)[0])(0, 1) += 1e-3 * Kv.max_abs();
  EXPECT_FALSE(symmetry_check(broken).pass);
}

TEST(Oracles, AngularMomentumOnRandomClouds) {
  std::mt19937_64 rng(36);
  RandomCloudSpec s;
  s.enabled = {true, true, true};
  s.points = 20;
  const RandomProblem p = random_problem(s, rng);
  const std::vector<Vec3> x = random_state(p.cloud, 0.2, rng);
  EXPECT_TRUE(angular_momentum_check(p.cloud, p.table, x, p.material, Interaction::one, 1e-14).pass);
  EXPECT_TRUE(angular_momentum_check(p.cloud, p.table, x, p.material, Interaction::two).pass);
  EXPECT_TRUE(angular_momentum_check(p.cloud, p.table, x, p.material, Interaction::three).pass);
}

TEST(Oracles, RandomCloudsAreUsable) {
  std::mt19937_64 rng(37);
  for (int dim : {2, 3}) {
    for (bool hole : {false, true}) {
      RandomCloudSpec s;
      s.dim = dim;
      s.points = dim == 2 ? 30 : 40;
      s.hole = hole;
      s.enabled = {true, true, dim == 3};
      const RandomProblem p = random_problem(s, rng);
      EXPECT_EQ(p.cloud.size(), static_cast<std::size_t>(s.points));
      for (std::size_t a = 0; a < p.cloud.size(); ++a) {
        EXPECT_GT(p.table.pair_count(a), 0u);
        if (dim == 3) {
          EXPECT_GT(p.table.triplet_count(a), 0u);
        } else {
          EXPECT_EQ(p.cloud.positions[a].z(), 0.0);
        }
      }
    }
  }
}

TEST(Oracles, DyadicStatesShiftExactly) {
  std::mt19937_64 rng(38);
  const PointCloud c = generate_uniform_grid(box3(0, 1), {}, 0.25, 3);
  for (const Vec3& p : random_state(c, 0.05, rng, true)) {
    const Vec3 q = p + Vec3(0.5, -0.25, 0.125);
    EXPECT_EQ(q - Vec3(0.5, -0.25, 0.125), p);
  }
}

TEST(Oracles, CsvHeader) {
  std::ostringstream out;
  const std::vector<VerificationReport> r{{"fd_gradient", 1e-9, 1e-6, true, {}, ""}};
  write_verification_csv(out, r);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "check,max_rel_err,tolerance,pass,offending");
}
