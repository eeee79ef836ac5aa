#include "cpd/linear_solver.hpp"

#include <regex>

#include <Eigen/CholmodSupport>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "cpd/error.hpp"

namespace cpd {

struct LinearSolver::Impl {
  // Indefinite tangents are expected; the fallbacks handle them quietly.
  Impl() { llt.cholmod().print = 0; }

  Eigen::CholmodSupernodalLLT<Eigen::SparseMatrix<double>> llt;
  Eigen::Index rows = -1;
  Eigen::Index nnz = -1;
  bool analyzed = false;
};

LinearSolver::LinearSolver() : impl_(std::make_unique<Impl>()) {}
LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

namespace {

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

long first_number(const std::string& text) {
  static const std::regex number("([0-9]+)");
  std::smatch m;
  if (std::regex_search(text, m, number)) return std::stol(m[1]);
  return -1;
}

}  // namespace

Eigen::VectorXd LinearSolver::solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                                    bool symmetric) {
  breakdown_ = -1;
  if (A.rows() == 0) {
    method_ = "empty";
    return Eigen::VectorXd();
  }

  if (symmetric) {
    auto& llt = impl_->llt;
    if (!impl_->analyzed || impl_->rows != A.rows() || impl_->nnz != A.nonZeros()) {
      llt.analyzePattern(A);
      impl_->rows = A.rows();
      impl_->nnz = A.nonZeros();
      impl_->analyzed = true;
    }
    llt.factorize(A);
    if (llt.info() == Eigen::Success) {
      Eigen::VectorXd x = llt.solve(b);
      if (llt.info() == Eigen::Success && finite(x)) {
        method_ = "cholmod-llt";
        return x;
      }
    }
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() == Eigen::Success) {
      Eigen::VectorXd x = ldlt.solve(b);
      const bool nonzero_pivots = (ldlt.vectorD().array() != 0.0).all();
      if (nonzero_pivots && finite(x)) {
        method_ = "ldlt";
        return x;
      }
    }
  }

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) {
    breakdown_ = first_number(lu.lastErrorMessage());
    throw Error(ErrorCode::singular_tangent, "LU factorization failed: " + lu.lastErrorMessage());
  }
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !finite(x)) {
    throw Error(ErrorCode::singular_tangent, "LU solve produced a non-finite solution");
  }
  method_ = "lu";
  return x;
}

}  // namespace cpd
