#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cpd/block_sparse.hpp"
#include "cpd/constitutive.hpp"
#include "cpd/geometry.hpp"

namespace cpd {

/// Spatial positions plus Dirichlet data, one entry per scalar DOF 3a+k.
struct State {
  std::vector<Vec3> x;
  std::vector<std::uint8_t> prescribed;
  std::vector<double> prescribed_value;

  static State reference(const PointCloud& cloud);

  std::size_t points() const { return x.size(); }
  std::size_t dofs() const { return 3 * x.size(); }
  double& dof(std::size_t d) { return x[d / 3][static_cast<Eigen::Index>(d % 3)]; }
  double dof(std::size_t d) const { return x[d / 3][static_cast<Eigen::Index>(d % 3)]; }
  bool is_prescribed(std::size_t d) const { return prescribed[d] != 0; }

  void prescribe(std::size_t d, double value);
  void release(std::size_t d);
  /// Writes every prescribed value into x.
  void apply_prescribed();
  /// Index of each DOF in the free-DOF numbering, or -1 when prescribed.
  std::vector<long> free_index(std::size_t* n_free = nullptr) const;
};

struct AssemblyOptions {
  AssemblyMode mode = AssemblyMode::variational;
  Enumeration enumeration = Enumeration::unordered;
};

struct AssembledSystem {
  Eigen::VectorXd R;
  BlockCsr K;
  double energy = 0.0;
  bool has_tangent = false;
};

/// Total stored energy over the stored ordered sets of every point.
double total_energy(const PointCloud& cloud, const NeighborTable& table, std::span<const Vec3> x,
                    const Material& mat, Enumeration enumeration = Enumeration::unordered);

Eigen::VectorXd assemble_residual(const PointCloud& cloud, const NeighborTable& table,
                                  std::span<const Vec3> x, const Material& mat,
                                  const AssemblyOptions& options = {});

BlockCsr assemble_tangent(const PointCloud& cloud, const NeighborTable& table, std::span<const Vec3> x,
                          const Material& mat, const AssemblyOptions& options = {});

/// Residual, energy and (optionally) tangent in one pass. A non-empty
/// `system.K` with the table's pattern is reused.
void assemble(const PointCloud& cloud, const NeighborTable& table, std::span<const Vec3> x,
              const Material& mat, const AssemblyOptions& options, bool with_tangent,
              AssembledSystem& system);

AssembledSystem assemble(const PointCloud& cloud, const NeighborTable& table, std::span<const Vec3> x,
                         const Material& mat, const AssemblyOptions& options, bool with_tangent);

/// Residual restricted to one interaction kind (collocation or variational),
/// used by diagnostics.
Eigen::VectorXd assemble_residual_of(Interaction kind, const PointCloud& cloud, const NeighborTable& table,
                                     std::span<const Vec3> x, const Material& mat,
                                     const AssemblyOptions& options = {});

}  // namespace cpd
