#include "hpfem/linear_solvers.hpp"

#include <cmath>
#include <string>

#include <Eigen/IterativeLinearSolvers>

#include "hpfem/errors.hpp"

namespace hpfem {

DenseCholesky::DenseCholesky(const Eigen::MatrixXd& a, double relative_pivot_tol) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw InvalidArgument("Cholesky: matrix is not square");
  l_ = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j) - l_.row(j).head(j).squaredNorm();
    if (!(pivot > relative_pivot_tol * std::abs(a(j, j))) || !(pivot > 0.0))
      throw SingularSystemError("Cholesky: non-positive pivot at row " + std::to_string(j), static_cast<int>(j),
                                pivot);
    const double ljj = std::sqrt(pivot);
    l_(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i)
      l_(i, j) = (a(i, j) - l_.row(i).head(j).dot(l_.row(j).head(j))) / ljj;
  }
}

Eigen::VectorXd DenseCholesky::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd y = l_.triangularView<Eigen::Lower>().solve(b);
  return l_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  if (a.rows() > 64) throw InvalidArgument("dense solve_spd: order exceeds 64");
  if (b.size() != a.rows()) throw InvalidArgument("solve_spd: size mismatch");
  return DenseCholesky(a).solve(b);
}

Eigen::VectorXd solve_spd(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a, const Eigen::VectorXd& b,
                          PcgReport* report, double tol) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.size() != n) throw InvalidArgument("solve_spd: size mismatch");
  if (n == 0) return Eigen::VectorXd();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(a.coeff(i, i) > 0.0))
      throw SingularSystemError("PCG: non-positive diagonal entry " + std::to_string(i), static_cast<int>(i),
                                a.coeff(i, i));
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double, Eigen::RowMajor>, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(static_cast<Eigen::Index>(10 * n));
  cg.compute(a);
  Eigen::VectorXd x = cg.solve(b);
  const double bnorm = b.norm();
  const double rel = bnorm > 0.0 ? (b - a * x).norm() / bnorm : 0.0;
  if (report) {
    report->iterations = static_cast<int>(cg.iterations());
    report->relative_residual = rel;
  }
  // The recursively updated residual can drift below the true one, so the latter is checked too.
  if (cg.info() != Eigen::Success || rel > 10.0 * tol)
    throw ConvergenceError("PCG did not reach the requested tolerance", rel, static_cast<int>(cg.iterations()));
  return x;
}

}  // namespace hpfem
