#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cpd/assembly.hpp"

namespace cpd {

struct VerificationReport {
  std::string check;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  /// Points whose rows or sums exceed the tolerance.
  std::vector<std::size_t> offending;
  std::string note;
};

/// The discrete problem as seen by the oracles. Tests swap single members
/// for deliberately broken versions.
struct DiscreteModel {
  std::function<double(std::span<const Vec3>)> energy;
  std::function<Eigen::VectorXd(std::span<const Vec3>)> residual;
  std::function<BlockCsr(std::span<const Vec3>)> tangent;
  /// Reference spacing; finite-difference steps are 1e-6 times this.
  double length_scale = 1.0;
};

/// Binds the library assembly. The cloud and table must outlive the model.
DiscreteModel make_model(const PointCloud& cloud, const NeighborTable& table, const Material& mat,
                         const AssemblyOptions& options, double length_scale);

/// R against fourth-order central differences of the energy, normwise relative error.
/// A state where both sides vanish passes without comparison.
VerificationReport fd_gradient_check(const DiscreteModel& model, std::span<const Vec3> x, double tolerance = 1e-6);

/// K against fourth-order central differences of R, column by column, normwise relative
/// error in the max norm.
VerificationReport fd_tangent_check(const DiscreteModel& model, std::span<const Vec3> x, double tolerance = 1e-6);

/// Per-point moment sum of the collocation force terms of one interaction
/// kind, relative to the sum of the term moments' magnitudes.
VerificationReport angular_momentum_check(const PointCloud& cloud, const NeighborTable& table,
                                          std::span<const Vec3> x, const Material& mat, Interaction kind,
                                          double tolerance = 1e-12);

/// Energy under rotations of the whole state about its centroid.
VerificationReport objectivity_check(const DiscreteModel& model, std::span<const Vec3> x, std::mt19937_64& rng,
                                     int rotations = 20, double tolerance = 1e-12);

/// Energy and residual under a rigid shift. With `tolerance` 0 the results
/// must be bitwise identical.
VerificationReport translation_check(const DiscreteModel& model, std::span<const Vec3> x, const Vec3& shift,
                                     double tolerance = 0.0);

/// Quadrature identities of every enabled interaction kind, one report each.
std::vector<VerificationReport> quadrature_checks(const NeighborTable& table, double tolerance = 1e-14);

/// max|K - K^T| against max|K|, plus a structural check of the pattern.
VerificationReport symmetry_check(const BlockCsr& K, double tolerance = 1e-10);

/// Ordered against unordered enumeration: R and K in the max norm relative
/// to the largest entry.
VerificationReport enumeration_check(const PointCloud& cloud, const NeighborTable& table, std::span<const Vec3> x,
                                     const Material& mat, AssemblyMode mode, double tolerance = 1e-14);

struct RandomCloudSpec {
  int dim = 3;
  int points = 20;
  double spacing = 1.0;
  /// Horizon as a multiple of the spacing.
  double horizon_ratio = 2.0;
  /// Jitter of each lattice site as a fraction of the spacing.
  double jitter = 0.2;
  /// Remove a box-shaped hole from the lattice before sampling.
  bool hole = false;
  InteractionFlags enabled;
};

struct RandomProblem {
  PointCloud cloud;
  NeighborTable table;
  Material material;
};

/// Jittered lattice points with varied volumes, resampled until every point
/// has a non-degenerate neighbourhood for the enabled interactions.
RandomProblem random_problem(const RandomCloudSpec& spec, std::mt19937_64& rng);

/// X plus a uniform perturbation of at most `scale` per component (in-plane
/// only for 2D clouds). With `dyadic` the result is rounded to multiples of
/// 2^-24 so that small dyadic shifts are exact.
std::vector<Vec3> random_state(const PointCloud& cloud, double scale, std::mt19937_64& rng, bool dyadic = false);

void write_verification_csv(std::ostream& out, std::span<const VerificationReport> reports);

}  // namespace cpd
