#pragma once

#include <memory>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace cpd {

/// Sparse direct solver for the reduced Newton systems. Symmetric systems
/// go to a supernodal Cholesky first, then to LDL^T, then to LU with partial
/// pivoting; unsymmetric systems go straight to LU. The symbolic analysis is
/// reused while the sparsity pattern does not change.
class LinearSolver {
 public:
  LinearSolver();
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  /// Solves A x = b. Throws SingularTangent when every factorization fails;
  /// the message names the breakdown column when it is known and
  /// `breakdown_column()` returns it (or -1).
  Eigen::VectorXd solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b, bool symmetric);

  /// Name of the factorization that produced the last solution.
  const std::string& last_method() const { return method_; }
  long breakdown_column() const { return breakdown_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string method_;
  long breakdown_ = -1;
};

}  // namespace cpd
