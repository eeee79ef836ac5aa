#include "cpd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpd/error.hpp"

namespace cpd {

PointCloud tag_boundary_layers(PointCloud cloud, double thickness, int axis, bool tag_lateral) {
  if (!(thickness > 0.0)) throw Error(ErrorCode::invalid_argument, "layer thickness must be positive");
  if (axis < 0 || axis >= cloud.dim) throw Error(ErrorCode::invalid_argument, "extension axis out of range");
  const Box& b = cloud.bounds;
  auto check = [&](int k) {
    if (2.0 * thickness >= b.extent(k)) {
      throw Error(ErrorCode::layer_overlap, "boundary layers of thickness " + std::to_string(thickness) +
                                                " overlap across an extent of " + std::to_string(b.extent(k)));
    }
  };
  check(axis);
  if (tag_lateral) {
    for (int k = 0; k < cloud.dim; ++k) {
      if (k != axis) check(k);
    }
  }
  cloud.tags.assign(cloud.size(), BoundaryTag::interior);
  for (std::size_t a = 0; a < cloud.size(); ++a) {
    const Vec3& p = cloud.positions[a];
    if (p[axis] - b.lo[axis] < thickness) {
      cloud.tags[a] = BoundaryTag::layer_left;
    } else if (b.hi[axis] - p[axis] < thickness) {
      cloud.tags[a] = BoundaryTag::layer_right;
    } else if (tag_lateral) {
      for (int k = 0; k < cloud.dim; ++k) {
        if (k != axis && (p[k] - b.lo[k] < thickness || b.hi[k] - p[k] < thickness)) {
          cloud.tags[a] = BoundaryTag::layer_other;
        }
      }
    }
  }
  return cloud;
}

void LoadProgram::validate(std::size_t n_dofs) const {
  if (n_increments < 1) throw Error(ErrorCode::invalid_argument, "at least one increment is required");
  if (!(tolerance > 0.0)) throw Error(ErrorCode::invalid_argument, "tolerance must be positive");
  if (max_iterations < 1) throw Error(ErrorCode::invalid_argument, "max_iterations must be at least 1");
  for (const auto& p : prescribed) {
    if (p.dof >= n_dofs) throw Error(ErrorCode::invalid_argument, "prescribed DOF out of range");
  }
}

std::vector<PrescribedDof> extension_dirichlet(const PointCloud& cloud, const ExtensionSpec& spec) {
  const int ax = spec.axis;
  if (ax < 0 || ax >= cloud.dim) throw Error(ErrorCode::invalid_argument, "extension axis out of range");
  const double lo = cloud.bounds.lo[ax];
  const double length = cloud.bounds.extent(ax);
  std::vector<int> lateral;
  for (int k = 0; k < cloud.dim; ++k) {
    if (k != ax) lateral.push_back(k);
  }

  std::vector<PrescribedDof> out;
  std::vector<std::size_t> left;
  bool any_right = false;
  for (std::size_t a = 0; a < cloud.size(); ++a) {
    const BoundaryTag tag = cloud.tags[a];
    if (tag != BoundaryTag::layer_left && tag != BoundaryTag::layer_right) continue;
    const double X = cloud.positions[a][ax];
    double u = 0.0;
    if (spec.style == LoadStyle::affine) {
      u = spec.extension * (X - lo);
    } else if (tag == BoundaryTag::layer_right) {
      u = spec.extension * length;
    }
    out.push_back({3 * a + static_cast<std::size_t>(ax), u});
    if (spec.lateral == LateralMode::clamped) {
      for (int k : lateral) out.push_back({3 * a + static_cast<std::size_t>(k), 0.0});
    }
    if (tag == BoundaryTag::layer_left) left.push_back(a);
    any_right = any_right || tag == BoundaryTag::layer_right;
  }
  if (left.empty() || !any_right) {
    throw Error(ErrorCode::invalid_argument, "extension needs points in both boundary layers");
  }

  if (spec.lateral == LateralMode::free) {
    // Pin the layer point nearest the lateral centre, and in 3D one more
    // point of its row against rotation about the axis.
    const Vec3 centre = 0.5 * (cloud.bounds.lo + cloud.bounds.hi);
    auto lateral_dist2 = [&](std::size_t a) {
      double d = 0.0;
      for (int k : lateral) d += std::pow(cloud.positions[a][k] - centre[k], 2);
      return d;
    };
    std::size_t p = left.front();
    for (std::size_t a : left) {
      if (lateral_dist2(a) < lateral_dist2(p)) p = a;
    }
    for (int k : lateral) out.push_back({3 * p + static_cast<std::size_t>(k), 0.0});
    if (cloud.dim == 3) {
      const int l1 = lateral[0];
      const int l2 = lateral[1];
      const Vec3& P = cloud.positions[p];
      std::size_t q = p;
      double best = 0.0;
      for (std::size_t a : left) {
        const Vec3& Q = cloud.positions[a];
        if (Q[ax] != P[ax] || Q[l2] != P[l2]) continue;
        const double d = std::abs(Q[l1] - P[l1]);
        if (d > best) {
          best = d;
          q = a;
        }
      }
      if (q == p) throw Error(ErrorCode::invalid_argument, "cannot pin rotation: layer row has a single point");
      out.push_back({3 * q + static_cast<std::size_t>(l2), 0.0});
    }
  }

  if (cloud.dim == 2) {
    for (std::size_t a = 0; a < cloud.size(); ++a) out.push_back({3 * a + 2, 0.0});
  }

  // Later entries win on duplicates (clamped lateral plus the 2D z rule).
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.dof < y.dof; });
  std::vector<PrescribedDof> unique;
  for (const auto& d : out) {
    if (!unique.empty() && unique.back().dof == d.dof) {
      unique.back() = d;
    } else {
      unique.push_back(d);
    }
  }
  return unique;
}

bool NewtonLog::converged() const {
  return !increments.empty() &&
         std::all_of(increments.begin(), increments.end(), [](const auto& i) { return i.converged; });
}

SystemAssembler make_assembler(const PointCloud& cloud, const NeighborTable& table, const Material& mat,
                               const AssemblyOptions& options) {
  return [&cloud, &table, mat, options](std::span<const Vec3> x, bool with_tangent, AssembledSystem& out) {
    assemble(cloud, table, x, mat, options, with_tangent, out);
  };
}

namespace {

bool collapse(ErrorCode c) {
  return c == ErrorCode::collapsed_bond || c == ErrorCode::collapsed_area || c == ErrorCode::collapsed_volume;
}

}  // namespace

Eigen::VectorXd newton_solve(const SystemAssembler& assembler, State& state, const NewtonOptions& options,
                             IncrementLog& log, LinearSolver* linear) {
  LinearSolver local_solver;
  LinearSolver& ls = linear ? *linear : local_solver;
  std::size_t n_free = 0;
  const std::vector<long> free_index = state.free_index(&n_free);
  std::vector<std::size_t> free_dofs;
  free_dofs.reserve(n_free);
  for (std::size_t d = 0; d < state.dofs(); ++d) {
    if (free_index[d] >= 0) free_dofs.push_back(d);
  }

  AssembledSystem sys;
  Eigen::VectorXd Rf(static_cast<Eigen::Index>(n_free));
  double r1 = 0.0;
  log.iterations.clear();
  log.converged = false;

  for (int k = 1;; ++k) {
    try {
      assembler(state.x, true, sys);
    } catch (const Error& e) {
      if (!collapse(e.code())) throw;
      throw Error(ErrorCode::step_degeneracy, "Newton step degenerated: " + e.detail(), e.point());
    }
    for (std::size_t f = 0; f < n_free; ++f) Rf[static_cast<Eigen::Index>(f)] = sys.R[static_cast<Eigen::Index>(free_dofs[f])];
    const double r = Rf.norm();
    if (!std::isfinite(r)) throw Error(ErrorCode::step_degeneracy, "residual is not finite");
    if (k == 1) r1 = r;
    const double normalized = r1 > 0.0 ? r / r1 : 0.0;
    log.iterations.push_back({k, r, normalized});
    if (r1 == 0.0 || normalized <= options.tolerance) {
      log.converged = true;
      return sys.R;
    }
    if (k >= options.max_iterations) {
      throw Error(ErrorCode::non_convergence, "no convergence after " + std::to_string(k) +
                                                  " iterations (normalized residual " +
                                                  std::to_string(normalized) + ")");
    }
    const Eigen::SparseMatrix<double> Kff = sys.K.to_sparse(free_index, n_free);
    Eigen::VectorXd dx;
    try {
      dx = ls.solve(Kff, -Rf, options.symmetric);
    } catch (const Error& e) {
      const long col = ls.breakdown_column();
      const std::size_t point =
          col >= 0 && static_cast<std::size_t>(col) < n_free ? free_dofs[static_cast<std::size_t>(col)] / 3 : kNoPoint;
      throw Error(ErrorCode::singular_tangent, e.detail(), point);
    }
    log.linear_solver = ls.last_method();
    for (std::size_t f = 0; f < n_free; ++f) state.dof(free_dofs[f]) += dx[static_cast<Eigen::Index>(f)];
  }
}

IncrementalResult run_incremental(const PointCloud& cloud, const NeighborTable& table, const Material& mat,
                                  const LoadProgram& program, const IncrementalOptions& options,
                                  NewtonLog* partial) {
  State state = State::reference(cloud);
  program.validate(state.dofs());
  for (const auto& p : program.prescribed) state.prescribe(p.dof, cloud.positions[p.dof / 3][p.dof % 3]);

  const SystemAssembler assembler = make_assembler(cloud, table, mat, options.assembly);
  NewtonOptions nopt;
  nopt.tolerance = program.tolerance;
  nopt.max_iterations = program.max_iterations;
  nopt.symmetric = options.assembly.mode == AssemblyMode::variational;
  LinearSolver linear;

  IncrementalResult result;
  NewtonLog& log = result.log;
  int counter = 0;
  int outer = 0;

  auto set_targets = [&](double lambda) {
    for (const auto& p : program.prescribed) {
      state.prescribed_value[p.dof] = cloud.positions[p.dof / 3][p.dof % 3] + lambda * p.displacement;
    }
    state.apply_prescribed();
  };

  std::function<void(double, double, int)> step = [&](double l0, double l1, int depth) {
    const std::vector<Vec3> saved = state.x;
    set_targets(l1);
    IncrementLog inc;
    inc.increment = ++counter;
    inc.load_factor = l1;
    try {
      result.residual = newton_solve(assembler, state, nopt, inc, &linear);
    } catch (const Error& e) {
      log.increments.push_back(inc);
      const bool retry = e.code() == ErrorCode::non_convergence || e.code() == ErrorCode::step_degeneracy ||
                         e.code() == ErrorCode::singular_tangent;
      if (program.bisection && retry && depth < program.max_bisections) {
        state.x = saved;
        const double mid = 0.5 * (l0 + l1);
        step(l0, mid, depth + 1);
        step(mid, l1, depth + 1);
        return;
      }
      if (partial) *partial = log;
      throw Error(e.code(), "increment " + std::to_string(outer) + ": " + e.detail(), e.point());
    }
    log.increments.push_back(inc);
    if (options.on_increment) options.on_increment(inc, state);
  };

  for (outer = 1; outer <= program.n_increments; ++outer) {
    step(static_cast<double>(outer - 1) / program.n_increments, static_cast<double>(outer) / program.n_increments,
         0);
  }
  result.energy = total_energy(cloud, table, state.x, mat);
  result.state = std::move(state);
  if (partial) *partial = log;
  return result;
}

}  // namespace cpd
