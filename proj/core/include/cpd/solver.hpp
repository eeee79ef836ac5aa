#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cpd/assembly.hpp"
#include "cpd/linear_solver.hpp"

namespace cpd {

/// Tags points closer than `thickness` to the faces normal to `axis` as
/// layer_left / layer_right. With `tag_lateral` the remaining faces get
/// layer_other. Throws LayerOverlap when opposing layers would meet, i.e.
/// 2 * thickness >= extent along a tagged axis.
PointCloud tag_boundary_layers(PointCloud cloud, double thickness, int axis = 0, bool tag_lateral = false);

/// Final displacement of one prescribed scalar DOF (3a + k).
struct PrescribedDof {
  std::size_t dof = 0;
  double displacement = 0.0;
};

struct LoadProgram {
  std::vector<PrescribedDof> prescribed;
  int n_increments = 1;
  double tolerance = 1e-12;
  int max_iterations = 20;
  /// Halve a failed increment and retry, at most `max_bisections` deep.
  bool bisection = false;
  int max_bisections = 6;

  void validate(std::size_t n_dofs) const;
};

enum class LoadStyle {
  /// u = e (X - X_min) along the axis on both layers.
  affine,
  /// Left layer held, right layer moved by e L.
  translate,
};

enum class LateralMode {
  /// Lateral DOFs free apart from the pins that remove rigid motions.
  free,
  /// Lateral DOFs of both layers held at zero.
  clamped,
};

struct ExtensionSpec {
  int axis = 0;
  double extension = 1e-3;
  LoadStyle style = LoadStyle::translate;
  LateralMode lateral = LateralMode::free;
};

/// Dirichlet data for a uniaxial extension of a tagged cloud. 2D clouds get
/// every out-of-plane DOF held at zero.
std::vector<PrescribedDof> extension_dirichlet(const PointCloud& cloud, const ExtensionSpec& spec);

struct NewtonIteration {
  int iteration = 0;
  double residual_norm = 0.0;
  double normalized = 0.0;
};

struct IncrementLog {
  int increment = 0;
  double load_factor = 0.0;
  std::vector<NewtonIteration> iterations;
  bool converged = false;
  std::string linear_solver;
};

struct NewtonLog {
  std::vector<IncrementLog> increments;
  bool converged() const;
};

using SystemAssembler = std::function<void(std::span<const Vec3> x, bool with_tangent, AssembledSystem& out)>;

SystemAssembler make_assembler(const PointCloud& cloud, const NeighborTable& table, const Material& mat,
                               const AssemblyOptions& options);

struct NewtonOptions {
  double tolerance = 1e-12;
  int max_iterations = 20;
  /// Whether the reduced tangent may be treated as symmetric.
  bool symmetric = true;
};

/// Newton iteration on the free DOFs of `state`, whose prescribed DOFs must
/// already hold their targets. The iteration count is the number of residual
/// evaluations. `log` is filled as the iteration proceeds, so it is complete
/// up to the failure when an exception escapes. Returns the final residual.
Eigen::VectorXd newton_solve(const SystemAssembler& assembler, State& state, const NewtonOptions& options,
                             IncrementLog& log, LinearSolver* linear = nullptr);

struct IncrementalOptions {
  AssemblyOptions assembly;
  /// Called after every converged increment.
  std::function<void(const IncrementLog&, const State&)> on_increment;
};

struct IncrementalResult {
  State state;
  NewtonLog log;
  /// Full residual at the final state; prescribed entries are reactions.
  Eigen::VectorXd residual;
  double energy = 0.0;
};

/// Ramps the prescribed displacements linearly over the increments, each
/// starting from the previous converged state. Failures carry the increment
/// index in their message; `partial`, when given, receives the log so far.
IncrementalResult run_incremental(const PointCloud& cloud, const NeighborTable& table, const Material& mat,
                                  const LoadProgram& program, const IncrementalOptions& options = {},
                                  NewtonLog* partial = nullptr);

}  // namespace cpd
