#include "cpd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Geometry>

#include "cpd/error.hpp"

namespace cpd {

namespace {

double rel_diff(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

void finalize(VerificationReport& r) { r.pass = r.max_rel_err <= r.tolerance; }

Eigen::MatrixXd dense(const BlockCsr& K) { return Eigen::MatrixXd(K.to_sparse()); }

// Five-point central difference. Near-collapsed sets have large third
// derivatives, which the plain two-point stencil does not resolve at 1e-6.
template <class T>
T fourth_order(const T& p2, const T& p1, const T& m1, const T& m2, double h) {
  return T(((m2 - p2) + 8.0 * (p1 - m1)) / (12.0 * h));
}

}  // namespace

DiscreteModel make_model(const PointCloud& cloud, const NeighborTable& table, const Material& mat,
                         const AssemblyOptions& options, double length_scale) {
  DiscreteModel m;
  m.energy = [&cloud, &table, mat](std::span<const Vec3> x) { return total_energy(cloud, table, x, mat); };
  m.residual = [&cloud, &table, mat, options](std::span<const Vec3> x) {
    return assemble_residual(cloud, table, x, mat, options);
  };
  m.tangent = [&cloud, &table, mat, options](std::span<const Vec3> x) {
    return assemble_tangent(cloud, table, x, mat, options);
  };
  m.length_scale = length_scale;
  return m;
}

VerificationReport fd_gradient_check(const DiscreteModel& model, std::span<const Vec3> x, double tolerance) {
  VerificationReport rep;
  rep.check = "fd_gradient";
  rep.tolerance = tolerance;
  const Eigen::VectorXd R = model.residual(x);
  const double rmax = R.cwiseAbs().maxCoeff();
  if (rmax == 0.0) {
    rep.note = "residual vanishes identically; comparison skipped";
    return rep;
  }
  const double h = 1e-6 * model.length_scale;
  std::vector<Vec3> xp(x.begin(), x.end());
  Eigen::VectorXd fd(R.size());
  for (Eigen::Index d = 0; d < R.size(); ++d) {
    double& v = xp[static_cast<std::size_t>(d / 3)][d % 3];
    const double keep = v;
    auto at = [&](double step) {
      v = keep + step;
      return model.energy(xp);
    };
    fd[d] = fourth_order(at(2 * h), at(h), at(-h), at(-2 * h), h);
    v = keep;
  }
  const Eigen::VectorXd err = (R - fd).cwiseAbs();
  const double scale = std::max(rmax, fd.cwiseAbs().maxCoeff());
  rep.max_rel_err = err.maxCoeff() / scale;
  for (Eigen::Index d = 0; d < err.size(); d += 3) {
    if (err.segment<3>(d).maxCoeff() > tolerance * scale) rep.offending.push_back(static_cast<std::size_t>(d / 3));
  }
  finalize(rep);
  return rep;
}

VerificationReport fd_tangent_check(const DiscreteModel& model, std::span<const Vec3> x, double tolerance) {
  VerificationReport rep;
  rep.check = "fd_tangent";
  rep.tolerance = tolerance;
  const Eigen::MatrixXd K = dense(model.tangent(x));
  const double h = 1e-6 * model.length_scale;
  std::vector<Vec3> xp(x.begin(), x.end());
  Eigen::MatrixXd fd(K.rows(), K.cols());
  for (Eigen::Index d = 0; d < K.cols(); ++d) {
    double& v = xp[static_cast<std::size_t>(d / 3)][d % 3];
    const double keep = v;
    auto at = [&](double step) {
      v = keep + step;
      return Eigen::VectorXd(model.residual(xp));
    };
    fd.col(d) = fourth_order(at(2 * h), at(h), at(-h), at(-2 * h), h);
    v = keep;
  }
  const double scale = std::max(K.cwiseAbs().maxCoeff(), fd.cwiseAbs().maxCoeff());
  if (scale == 0.0) {
    rep.note = "tangent vanishes identically";
    return rep;
  }
  const Eigen::MatrixXd err = (K - fd).cwiseAbs();
  rep.max_rel_err = err.maxCoeff() / scale;
  for (Eigen::Index r = 0; r < err.rows(); r += 3) {
    if (err.middleRows(r, 3).maxCoeff() > tolerance * scale) rep.offending.push_back(static_cast<std::size_t>(r / 3));
  }
  finalize(rep);
  return rep;
}

VerificationReport angular_momentum_check(const PointCloud& cloud, const NeighborTable& table,
                                          std::span<const Vec3> x, const Material& mat, Interaction kind,
                                          double tolerance) {
  VerificationReport rep;
  rep.tolerance = tolerance;
  rep.check = kind == Interaction::one   ? "angular_momentum_one"
              : kind == Interaction::two ? "angular_momentum_two"
                                         : "angular_momentum_three";
  const auto& X = cloud.positions;
  for (std::size_t a = 0; a < cloud.size(); ++a) {
    Vec3 moment = Vec3::Zero();
    double scale = 0.0;
    auto add = [&](const Vec3& arm, const Vec3& force) {
      moment += arm.cross(force);
      scale += arm.norm() * force.norm();
    };
    if (kind == Interaction::one) {
      for (PointId i : table.neighbors(a)) {
        const Vec3 xi = x[i] - x[a];
        add(xi, table.v1(a) * force_density_one(xi, X[i] - X[a], mat.c1));
      }
    } else if (kind == Interaction::two) {
      for (const auto& p : table.pairs(a)) {
        const Vec3 xi1 = x[p[0]] - x[a];
        const Vec3 xi2 = x[p[1]] - x[a];
        add(xi1, table.v2(a) * force_density_two(xi1, xi2, X[p[0]] - X[a], X[p[1]] - X[a], mat.c2).pair_term);
      }
    } else {
      static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
      for (const auto& t : table.triplets(a)) {
        for (const auto& p : perms) {
          const PointId i = t[p[0]], j = t[p[1]], k = t[p[2]];
          const Vec3 xi1 = x[i] - x[a];
          const TripletForce f = force_density_three(xi1, x[j] - x[a], x[k] - x[a], X[i] - X[a], X[j] - X[a],
                                                     X[k] - X[a], mat.c3);
          add(xi1, table.v3(a) * f.triplet_term);
        }
      }
    }
    if (scale == 0.0) continue;
    const double rel = moment.norm() / scale;
    rep.max_rel_err = std::max(rep.max_rel_err, rel);
    if (rel > tolerance) rep.offending.push_back(a);
  }
  finalize(rep);
  return rep;
}

VerificationReport objectivity_check(const DiscreteModel& model, std::span<const Vec3> x, std::mt19937_64& rng,
                                     int rotations, double tolerance) {
  VerificationReport rep;
  rep.check = "objectivity";
  rep.tolerance = tolerance;
  const double e0 = model.energy(x);
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : x) c += p;
  c /= static_cast<double>(x.size());
  std::normal_distribution<double> normal;
  std::vector<Vec3> y(x.size());
  for (int r = 0; r < rotations; ++r) {
    Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
    q.normalize();
    const Mat3 Q = q.toRotationMatrix();
    for (std::size_t a = 0; a < x.size(); ++a) y[a] = Q * (x[a] - c) + c;
    rep.max_rel_err = std::max(rep.max_rel_err, rel_diff(model.energy(y), e0));
  }
  finalize(rep);
  return rep;
}

VerificationReport translation_check(const DiscreteModel& model, std::span<const Vec3> x, const Vec3& shift,
                                     double tolerance) {
  VerificationReport rep;
  rep.check = "translation";
  rep.tolerance = tolerance;
  std::vector<Vec3> y(x.begin(), x.end());
  for (Vec3& p : y) p += shift;
  const double e0 = model.energy(x);
  const double e1 = model.energy(y);
  const Eigen::VectorXd r0 = model.residual(x);
  const Eigen::VectorXd r1 = model.residual(y);
  double err = rel_diff(e0, e1);
  const double rscale = std::max(r0.cwiseAbs().maxCoeff(), r1.cwiseAbs().maxCoeff());
  const double rdiff = (r0 - r1).cwiseAbs().maxCoeff();
  if (rdiff != 0.0) err = std::max(err, rdiff / rscale);
  rep.max_rel_err = err;
  finalize(rep);
  return rep;
}

std::vector<VerificationReport> quadrature_checks(const NeighborTable& table, double tolerance) {
  const QuadratureReport q = quadrature_fidelity_report(table);
  std::vector<VerificationReport> out;
  const Interaction kinds[] = {Interaction::one, Interaction::two, Interaction::three};
  const bool on[] = {table.enabled().one, table.enabled().two, table.enabled().three};
  const char* names[] = {"quadrature_one", "quadrature_two", "quadrature_three"};
  for (int k = 0; k < 3; ++k) {
    if (!on[k]) continue;
    VerificationReport rep;
    rep.check = names[k];
    rep.tolerance = tolerance;
    rep.max_rel_err = q.max_rel_err_of(kinds[k]);
    for (const auto& c : q.checks) {
      if (c.kind == kinds[k] && c.rel_err > tolerance) rep.offending.push_back(c.point);
    }
    finalize(rep);
    out.push_back(std::move(rep));
  }
  return out;
}

VerificationReport symmetry_check(const BlockCsr& K, double tolerance) {
  VerificationReport rep;
  rep.check = "tangent_symmetry";
  rep.tolerance = tolerance;
  const double scale = K.max_abs();
  rep.max_rel_err = scale > 0.0 ? K.max_asymmetry() / scale : 0.0;
  finalize(rep);
  // Pattern: every stored block (a,b) needs a stored (b,a).
  for (std::size_t a = 0; a < K.block_rows(); ++a) {
    for (PointId b : K.cols(a)) {
      const auto back = K.cols(b);
      if (!std::binary_search(back.begin(), back.end(), static_cast<PointId>(a))) {
        rep.pass = false;
        rep.offending.push_back(a);
        rep.note = "pattern not symmetric";
        break;
      }
    }
  }
  return rep;
}

VerificationReport enumeration_check(const PointCloud& cloud, const NeighborTable& table, std::span<const Vec3> x,
                                     const Material& mat, AssemblyMode mode, double tolerance) {
  VerificationReport rep;
  rep.check = mode == AssemblyMode::variational ? "enumeration_variational" : "enumeration_collocation";
  rep.tolerance = tolerance;
  const AssembledSystem o = assemble(cloud, table, x, mat, {mode, Enumeration::ordered}, true);
  const AssembledSystem u = assemble(cloud, table, x, mat, {mode, Enumeration::unordered}, true);
  const double rs = o.R.cwiseAbs().maxCoeff();
  double err = rs > 0.0 ? (o.R - u.R).cwiseAbs().maxCoeff() / rs : 0.0;
  const Eigen::SparseMatrix<double> ko = o.K.to_sparse();
  const Eigen::SparseMatrix<double> ku = u.K.to_sparse();
  const double ks = o.K.max_abs();
  if (ks > 0.0) {
    const Eigen::SparseMatrix<double> diff = ko - ku;
    double m = 0.0;
    for (Eigen::Index c = 0; c < diff.outerSize(); ++c) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(diff, c); it; ++it) m = std::max(m, std::abs(it.value()));
    }
    err = std::max(err, m / ks);
  }
  rep.max_rel_err = err;
  finalize(rep);
  return rep;
}

RandomProblem random_problem(const RandomCloudSpec& spec, std::mt19937_64& rng) {
  if (spec.dim != 2 && spec.dim != 3) throw Error(ErrorCode::invalid_argument, "dim must be 2 or 3");
  if (spec.points < 4) throw Error(ErrorCode::invalid_argument, "at least four points are required");
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> vol(0.7, 1.3);
  std::uniform_real_distribution<double> coef(0.5, 2.0);

  // Lattice large enough to hold the requested points after the hole.
  int side = 2;
  std::vector<std::array<int, 3>> sites;
  for (;; ++side) {
    sites.clear();
    const int nz = spec.dim == 3 ? side : 1;
    const double lo = side / 3.0 - 0.5, hi = 2.0 * side / 3.0 - 0.5;
    for (int k = 0; k < nz; ++k) {
      for (int j = 0; j < side; ++j) {
        for (int i = 0; i < side; ++i) {
          const bool inside = i > lo && i < hi && j > lo && j < hi && (spec.dim == 2 || (k > lo && k < hi));
          if (spec.hole && inside) continue;
          sites.push_back({i, j, k});
        }
      }
    }
    if (static_cast<int>(sites.size()) >= spec.points) break;
  }
  sites.resize(static_cast<std::size_t>(spec.points));

  for (int attempt = 0; attempt < 200; ++attempt) {
    RandomProblem p;
    p.cloud.dim = spec.dim;
    p.cloud.spacing = spec.spacing;
    for (const auto& s : sites) {
      Vec3 q(s[0], s[1], spec.dim == 3 ? s[2] : 0.0);
      for (int k = 0; k < spec.dim; ++k) q[k] += spec.jitter * unit(rng);
      p.cloud.positions.push_back(spec.spacing * q);
      p.cloud.volumes.push_back(std::pow(spec.spacing, spec.dim) * vol(rng));
    }
    p.cloud.tags.assign(p.cloud.size(), BoundaryTag::interior);
    p.cloud.bounds.lo = p.cloud.positions.front();
    p.cloud.bounds.hi = p.cloud.positions.front();
    for (const Vec3& q : p.cloud.positions) {
      p.cloud.bounds.lo = p.cloud.bounds.lo.cwiseMin(q);
      p.cloud.bounds.hi = p.cloud.bounds.hi.cwiseMax(q);
    }
    p.material.enabled = spec.enabled;
    p.material.horizon = spec.horizon_ratio * spec.spacing;
    p.material.c1 = coef(rng);
    p.material.c2 = spec.enabled.two ? coef(rng) : 0.0;
    p.material.c3 = spec.enabled.three ? coef(rng) : 0.0;
    NeighborOptions opt;
    opt.horizon = p.material.horizon;
    opt.enabled = spec.enabled;
    try {
      p.table = make_neighbor_table(p.cloud, opt);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::isolated_point || e.code() == ErrorCode::degenerate_neighborhood) continue;
      throw;
    }
    return p;
  }
  throw Error(ErrorCode::degenerate_neighborhood, "could not sample a non-degenerate random cloud");
}

std::vector<Vec3> random_state(const PointCloud& cloud, double scale, std::mt19937_64& rng, bool dyadic) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Vec3> x = cloud.positions;
  const double grain = std::ldexp(1.0, -24);
  for (Vec3& p : x) {
    for (int k = 0; k < cloud.dim; ++k) {
      p[k] += scale * unit(rng);
      if (dyadic) p[k] = std::round(p[k] / grain) * grain;
    }
  }
  return x;
}

void write_verification_csv(std::ostream& out, std::span<const VerificationReport> reports) {
  out << "check,max_rel_err,tolerance,pass,offending\n";
  out.precision(6);
  for (const auto& r : reports) {
    out << r.check << ',' << std::scientific << r.max_rel_err << ',' << r.tolerance << std::defaultfloat << ','
        << (r.pass ? "true" : "false") << ',';
    for (std::size_t k = 0; k < r.offending.size(); ++k) out << (k ? ";" : "") << r.offending[k];
    out << '\n';
  }
}

}  // namespace cpd
