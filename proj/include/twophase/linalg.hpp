#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <functional>
#include <memory>
#include <stdexcept>

#include "twophase/assembly.hpp"

namespace twophase {

/// Reusable sparse Cholesky (LDL^T) factorization of a symmetric positive
/// definite matrix. Immutable after construction; concurrent solves are safe.
class SpdFactor {
 public:
  explicit SpdFactor(const SparseMatrix& A) : dim_(A.rows()) {
    if (A.rows() != A.cols())
      throw std::invalid_argument("factorize_spd: matrix must be square");
    if (dim_ == 0) return;
    ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>();
    ldlt_->compute(A);
    if (ldlt_->info() != Eigen::Success)
      throw std::runtime_error("factorize_spd: factorization failed");
    const Eigen::VectorXd d = ldlt_->vectorD();
    const double dmax = d.maxCoeff();
    const double dmin = d.minCoeff();
    if (!(dmin > 0.0) || dmin <= 1e-13 * dmax)
      throw std::runtime_error("factorize_spd: matrix is not positive definite");
  }

  Eigen::Index dim() const { return dim_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    if (rhs.size() != dim_)
      throw std::invalid_argument("solve_with_factor: dimension mismatch");
    if (dim_ == 0) return Eigen::VectorXd();
    return ldlt_->solve(rhs);
  }

 private:
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
  Eigen::Index dim_ = 0;
};

inline SpdFactor factorize_spd(const SparseMatrix& A) { return SpdFactor(A); }

inline Eigen::VectorXd solve_with_factor(const SpdFactor& factor,
                                         const Eigen::VectorXd& rhs) {
  return factor.solve(rhs);
}

enum class CgStatus { Converged, MaxIterations, IndefiniteOperator };

struct CgResult {
  Eigen::VectorXd x;  // best iterate (also on failure)
  double relative_residual = 0.0;
  int iterations = 0;
  CgStatus status = CgStatus::Converged;
};

/// Matrix-free conjugate gradients for an SPD operator. Reports indefinite
/// breakdown when a search direction has nonpositive curvature.
inline CgResult cg_solve(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
    const Eigen::VectorXd& rhs, double tol, int maxit) {
  if (!(tol > 0.0)) throw std::invalid_argument("cg_solve: tol must be positive");

  CgResult res;
  res.x = Eigen::VectorXd::Zero(rhs.size());
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return res;

  Eigen::VectorXd r = rhs;
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  for (int it = 1; it <= maxit; ++it) {
    const Eigen::VectorXd Ap = apply(p);
    const double curvature = p.dot(Ap);
    if (!(curvature > 0.0)) {
      res.iterations = it;
      res.relative_residual = r.norm() / rhs_norm;
      res.status = CgStatus::IndefiniteOperator;
      return res;
    }
    const double alpha = rr / curvature;
    res.x += alpha * p;
    r -= alpha * Ap;
    const double rr_next = r.squaredNorm();
    res.iterations = it;
    res.relative_residual = std::sqrt(rr_next) / rhs_norm;
    if (res.relative_residual <= tol) {
      res.status = CgStatus::Converged;
      return res;
    }
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  res.status = CgStatus::MaxIterations;
  return res;
}

}  // namespace twophase
