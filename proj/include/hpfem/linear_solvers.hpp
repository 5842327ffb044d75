#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hpfem {

/// Cholesky factor of a small dense SPD matrix. A pivot counts as non-positive when it
/// falls below `relative_pivot_tol` times the original diagonal entry of its row.
class DenseCholesky {
 public:
  explicit DenseCholesky(const Eigen::MatrixXd& a, double relative_pivot_tol = 1e-13);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  const Eigen::MatrixXd& factor() const noexcept { return l_; }

 private:
  Eigen::MatrixXd l_;
};

/// Dense solve (order <= 64). Throws SingularSystemError on a non-positive pivot.
Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

struct PcgReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients to relative residual `tol` within 10 N
/// iterations; throws ConvergenceError otherwise.
Eigen::VectorXd solve_spd(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a, const Eigen::VectorXd& b,
                          PcgReport* report = nullptr, double tol = 1e-12);

}  // namespace hpfem
