#include "cpd/constitutive.hpp"

#include <cmath>

#include "cpd/error.hpp"

namespace cpd {

void Material::validate() const {
  if (!enabled.one) throw Error(ErrorCode::invalid_argument, "one-neighbour interactions must be enabled");
  if (!(c1 > 0.0)) throw Error(ErrorCode::invalid_argument, "C1 must be positive");
  if (!(c2 >= 0.0) || !(c3 >= 0.0)) throw Error(ErrorCode::invalid_argument, "C2 and C3 must be non-negative");
  if (!(horizon > 0.0)) throw Error(ErrorCode::invalid_argument, "horizon must be positive");
}

namespace {

void require_reference(double measure, const char* what) {
  if (!(measure > 0.0) || !std::isfinite(measure)) {
    throw Error(ErrorCode::degenerate_reference, std::string("material ") + what + " is not positive");
  }
}

void check_bond(double l, double L) {
  if (!(l > kCollapseRatio * L)) throw Error(ErrorCode::collapsed_bond, "spatial bond length collapsed");
}
void check_area(double a, double A) {
  if (!(a > kCollapseRatio * A)) throw Error(ErrorCode::collapsed_area, "spatial triangle collapsed");
}
void check_volume(double v, double V) {
  if (!(std::abs(v) > kCollapseRatio * V)) {
    throw Error(ErrorCode::collapsed_volume, "spatial tetrahedron collapsed");
  }
}

double half_penalty(double c, double M, double m) {
  const double s = m / M - 1.0;
  return 0.5 * c * M * s * s;
}

}  // namespace

RelativeMeasures measure_bond(const Vec3& Xi1, const Vec3& xi1) {
  RelativeMeasures m;
  m.kind = Interaction::one;
  m.material[0] = Xi1;
  m.spatial[0] = xi1;
  m.material_measure = Xi1.norm();
  m.spatial_measure = xi1.norm();
  return m;
}

RelativeMeasures measure_pair(const Vec3& Xi1, const Vec3& Xi2, const Vec3& xi1, const Vec3& xi2) {
  RelativeMeasures m;
  m.kind = Interaction::two;
  m.material = {Xi1, Xi2, Vec3::Zero()};
  m.spatial = {xi1, xi2, Vec3::Zero()};
  m.area = xi1.cross(xi2);
  m.material_measure = Xi1.cross(Xi2).norm();
  m.spatial_measure = m.area.norm();
  return m;
}

RelativeMeasures measure_triplet(const Vec3& Xi1, const Vec3& Xi2, const Vec3& Xi3, const Vec3& xi1,
                                 const Vec3& xi2, const Vec3& xi3) {
  RelativeMeasures m;
  m.kind = Interaction::three;
  m.material = {Xi1, Xi2, Xi3};
  m.spatial = {xi1, xi2, xi3};
  m.area = xi1.cross(xi2);
  m.v = m.area.dot(xi3);
  m.material_measure = std::abs(Xi1.cross(Xi2).dot(Xi3));
  m.spatial_measure = std::abs(m.v);
  return m;
}

double energy_density(const RelativeMeasures& m, const Material& mat) {
  const double c = m.kind == Interaction::one ? mat.c1 : m.kind == Interaction::two ? mat.c2 : mat.c3;
  require_reference(m.material_measure, "measure");
  return half_penalty(c, m.material_measure, m.spatial_measure);
}

Vec3 force_density_one(const Vec3& xi1, const Vec3& Xi1, double c1) {
  const double L = Xi1.norm();
  require_reference(L, "bond length");
  const double l = xi1.norm();
  check_bond(l, L);
  return c1 * (1.0 / L - 1.0 / l) * xi1;
}

PairForce force_density_two(const Vec3& xi1, const Vec3& xi2, const Vec3& Xi1, const Vec3& Xi2,
                            double c2) {
  const double A = Xi1.cross(Xi2).norm();
  require_reference(A, "area");
  const Vec3 area = xi1.cross(xi2);
  const double a = area.norm();
  check_area(a, A);
  PairForce f;
  f.area_derivative = c2 * (1.0 / A - 1.0 / a) * area;
  f.pair_term = 2.0 * xi2.cross(f.area_derivative);
  return f;
}

TripletForce force_density_three(const Vec3& xi1, const Vec3& xi2, const Vec3& xi3, const Vec3& Xi1,
                                 const Vec3& Xi2, const Vec3& Xi3, double c3) {
  const double V = std::abs(Xi1.cross(Xi2).dot(Xi3));
  require_reference(V, "volume");
  const double v = xi1.cross(xi2).dot(xi3);
  check_volume(v, V);
  TripletForce f;
  f.volume_derivative = c3 * (1.0 / V - 1.0 / std::abs(v)) * v;
  f.triplet_term = 3.0 * f.volume_derivative * xi2.cross(xi3);
  return f;
}

double bond_energy(const Vec3& xi, double L, double c1) {
  const double l = xi.norm();
  check_bond(l, L);
  return half_penalty(c1, L, l);
}

double pair_energy(const Vec3& xi1, const Vec3& xi2, double A, double c2) {
  const double a = xi1.cross(xi2).norm();
  check_area(a, A);
  return half_penalty(c2, A, a);
}

double triplet_energy(const Vec3& xi1, const Vec3& xi2, const Vec3& xi3, double V, double c3) {
  const double v = xi1.cross(xi2).dot(xi3);
  check_volume(v, V);
  return half_penalty(c3, V, std::abs(v));
}

BondKernel bond_kernel(const Vec3& xi, double L, double c1, bool with_hessian) {
  const double l = xi.norm();
  check_bond(l, L);
  const double c = 1.0 / L - 1.0 / l;
  BondKernel k;
  k.psi = half_penalty(c1, L, l);
  k.gradient = c1 * c * xi;
  if (with_hessian) {
    k.hessian = (c1 / (l * l * l)) * (xi * xi.transpose());
    k.hessian.diagonal().array() += c1 * c;
  }
  return k;
}

PairKernel pair_kernel(const Vec3& xi1, const Vec3& xi2, double A, double c2, bool with_hessian) {
  const double a = xi1.cross(xi2).norm();
  check_area(a, A);
  const double c = 1.0 / A - 1.0 / a;
  const double d11 = xi1.dot(xi1);
  const double d22 = xi2.dot(xi2);
  const double d12 = xi1.dot(xi2);
  // a^2 = d11 d22 - d12^2, so grad_r a = w_r / a.
  const Vec3 w1 = d22 * xi1 - d12 * xi2;
  const Vec3 w2 = d11 * xi2 - d12 * xi1;

  PairKernel k;
  k.psi = half_penalty(c2, A, a);
  k.gradient = {c2 * c * w1, c2 * c * w2};
  if (with_hessian) {
    const double g = c2 / (a * a * a);
    const double cc = c2 * c;
    Mat3 h11 = g * (w1 * w1.transpose()) - cc * (xi2 * xi2.transpose());
    h11.diagonal().array() += cc * d22;
    Mat3 h22 = g * (w2 * w2.transpose()) - cc * (xi1 * xi1.transpose());
    h22.diagonal().array() += cc * d11;
    // d w1 / d xi2 = 2 xi1 xi2^T - xi2 xi1^T - d12 I
    Mat3 h12 = g * (w1 * w2.transpose()) + cc * (2.0 * xi1 * xi2.transpose() - xi2 * xi1.transpose());
    h12.diagonal().array() -= cc * d12;
    k.hessian[0][0] = h11;
    k.hessian[0][1] = h12;
    k.hessian[1][0] = h12.transpose();
    k.hessian[1][1] = h22;
  }
  return k;
}

TripletKernel triplet_kernel(const Vec3& xi1, const Vec3& xi2, const Vec3& xi3, double V, double c3,
                             bool with_hessian) {
  const Vec3 n1 = xi2.cross(xi3);
  const Vec3 n2 = xi3.cross(xi1);
  const Vec3 n3 = xi1.cross(xi2);
  const double v = n1.dot(xi1);
  check_volume(v, V);
  const double s = c3 * (v / V - (v > 0.0 ? 1.0 : -1.0));

  TripletKernel k;
  k.psi = half_penalty(c3, V, std::abs(v));
  k.gradient = {s * n1, s * n2, s * n3};
  if (with_hessian) {
    const std::array<const Vec3*, 3> n{&n1, &n2, &n3};
    const double g = c3 / V;
    for (int r = 0; r < 3; ++r) {
      for (int q = 0; q < 3; ++q) k.hessian[r][q] = g * (*n[r]) * n[q]->transpose();
    }
    // d n_r / d xi_s is +-skew of the remaining bond.
    const Mat3 s1 = s * skew(xi1);
    const Mat3 s2 = s * skew(xi2);
    const Mat3 s3 = s * skew(xi3);
    k.hessian[0][1] -= s3;
    k.hessian[0][2] += s2;
    k.hessian[1][0] += s3;
    k.hessian[1][2] -= s1;
    k.hessian[2][0] -= s2;
    k.hessian[2][1] += s1;
  }
  return k;
}

PairTangentTerms pair_tangent_terms(const Vec3& xi1, const Vec3& xi2, double A) {
  const double a = xi1.cross(xi2).norm();
  check_area(a, A);
  const double inv_a3 = 1.0 / (a * a * a);
  const double d = 1.0 / a - 1.0 / A;
  const Mat3 I = Mat3::Identity();
  const Vec3 w = xi2.dot(xi2) * xi1 - xi2.dot(xi1) * xi2;
  const Vec3 u = xi1.dot(xi2) * xi1 - xi1.dot(xi1) * xi2;

  PairTangentTerms t;
  t.ib = inv_a3 * (w * w.transpose()) + d * (xi2 * xi2.transpose() - xi2.dot(xi2) * I);
  t.jb = inv_a3 * ((-w) * u.transpose()) +
         d * (xi2 * xi1.transpose() + xi2.dot(xi1) * I - 2.0 * xi1 * xi2.transpose());
  return t;
}

TripletTangentTerms triplet_tangent_terms(const Vec3& xi1, const Vec3& xi2, const Vec3& xi3, double V) {
  const Vec3 n1 = xi2.cross(xi3);
  const double v = n1.dot(xi1);
  check_volume(v, V);
  const double absV = std::abs(V);
  const double f = (1.0 / absV - 1.0 / std::abs(v)) * v;
  // (eps . u) y = y x u, i.e. eps . u = -skew(u)
  const Mat3 eps3 = -skew(xi3);
  const Mat3 eps2 = -skew(xi2);

  TripletTangentTerms t;
  t.ib = n1 * n1.transpose() / absV;
  t.jb = f * eps3 + n1 * xi3.cross(xi1).transpose() / absV;
  t.kb = -f * eps2 + n1 * xi1.cross(xi2).transpose() / absV;
  return t;
}

}  // namespace cpd
