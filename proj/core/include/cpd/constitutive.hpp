#pragma once

#include <array>

#include "cpd/types.hpp"

namespace cpd {

/// Elastic coefficients and horizon. C1 has units energy/length^7, C2
/// energy/length^11 and C3 energy/length^15.
struct Material {
  double c1 = 1.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double horizon = 0.0;
  InteractionFlags enabled;

  /// Throws invalid_argument on C1 <= 0, negative C2/C3, non-positive horizon
  /// or a disabled one-neighbour interaction.
  void validate() const;
};

/// Spatial over material ratio below which a measure counts as collapsed.
inline constexpr double kCollapseRatio = 1e-12;

/// Material and spatial measures of one bond, pair or triplet. Unused slots
/// stay zero. `v` keeps its sign; the stretch uses |v|.
struct RelativeMeasures {
  Interaction kind = Interaction::one;
  std::array<Vec3, 3> material{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  std::array<Vec3, 3> spatial{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  double material_measure = 0.0;  // L, A or V
  double spatial_measure = 0.0;   // l, a or |v|
  Vec3 area = Vec3::Zero();       // xi' x xi''
  double v = 0.0;                 // (xi' x xi'') . xi'''

  double stretch() const { return spatial_measure / material_measure; }
};

RelativeMeasures measure_bond(const Vec3& Xi1, const Vec3& xi1);
RelativeMeasures measure_pair(const Vec3& Xi1, const Vec3& Xi2, const Vec3& xi1, const Vec3& xi2);
RelativeMeasures measure_triplet(const Vec3& Xi1, const Vec3& Xi2, const Vec3& Xi3, const Vec3& xi1,
                                 const Vec3& xi2, const Vec3& xi3);

/// 1/2 C_k M (S_k - 1)^2 with M the material measure of the set.
double energy_density(const RelativeMeasures& m, const Material& mat);

/// C1 (1/|Xi'| - 1/|xi'|) xi'.
Vec3 force_density_one(const Vec3& xi1, const Vec3& Xi1, double c1);

struct PairForce {
  Vec3 area_derivative;  // d psi2 / d(xi' x xi'')
  Vec3 pair_term;        // 2 xi'' x area_derivative
};
PairForce force_density_two(const Vec3& xi1, const Vec3& xi2, const Vec3& Xi1, const Vec3& Xi2, double c2);

struct TripletForce {
  double volume_derivative;  // d psi3 / dv
  Vec3 triplet_term;         // 3 (xi'' x xi''') volume_derivative
};
TripletForce force_density_three(const Vec3& xi1, const Vec3& xi2, const Vec3& xi3, const Vec3& Xi1,
                                 const Vec3& Xi2, const Vec3& Xi3, double c3);

// Kernels in bond-vector space used by the assembly. `gradient[r]` is the
// derivative of psi with respect to the r-th spatial bond vector and
// `hessian[r][s]` the second derivative with respect to bonds r and s. The
// material measure is passed in precomputed.

struct BondKernel {
  double psi;
  Vec3 gradient;
  Mat3 hessian;
};

struct PairKernel {
  double psi;
  std::array<Vec3, 2> gradient;
  std::array<std::array<Mat3, 2>, 2> hessian;
};

struct TripletKernel {
  double psi;
  std::array<Vec3, 3> gradient;
  std::array<std::array<Mat3, 3>, 3> hessian;
};

/// Throws CollapsedBond/Area/Volume when the spatial measure falls below
/// kCollapseRatio times the material one.
BondKernel bond_kernel(const Vec3& xi, double L, double c1, bool with_hessian);
PairKernel pair_kernel(const Vec3& xi1, const Vec3& xi2, double A, double c2, bool with_hessian);
TripletKernel triplet_kernel(const Vec3& xi1, const Vec3& xi2, const Vec3& xi3, double V, double c3,
                             bool with_hessian);

/// Energy only, same collapse checks.
double bond_energy(const Vec3& xi, double L, double c1);
double pair_energy(const Vec3& xi1, const Vec3& xi2, double A, double c2);
double triplet_energy(const Vec3& xi1, const Vec3& xi2, const Vec3& xi3, double V, double c3);

/// Tangent terms written the way the collocation equations state them, per
/// ordered set and without coefficient or volume factor. `ib` multiplies the
/// Kronecker delta on the first neighbour, `jb` the second, `kb` the third.
struct PairTangentTerms {
  Mat3 ib;
  Mat3 jb;
};
struct TripletTangentTerms {
  Mat3 ib;
  Mat3 jb;
  Mat3 kb;
};
PairTangentTerms pair_tangent_terms(const Vec3& xi1, const Vec3& xi2, double A);
TripletTangentTerms triplet_tangent_terms(const Vec3& xi1, const Vec3& xi2, const Vec3& xi3, double V);

}  // namespace cpd
