#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hpfem/shape_basis.hpp"

namespace hpfem {

/// 1D constraint coefficients for a subinterval I = [a, b] of [-1, 1]:
///   psi_i restricted to I = sum_j b[i][j] * (psi_j o F_I^{-1}),   F_I(t) = alpha t + beta.
/// Entries vanish for j >= 2, j > i; the 2x2 vertex block is full.
class CoeffTable1D {
 public:
  CoeffTable1D(double a, double b, int max_degree);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  int max_degree() const noexcept { return p_; }

  double operator()(int i, int j) const {
    return table_[static_cast<std::size_t>(i) * static_cast<std::size_t>(p_ + 1) + static_cast<std::size_t>(j)];
  }

 private:
  double& at(int i, int j) {
    return table_[static_cast<std::size_t>(i) * static_cast<std::size_t>(p_ + 1) + static_cast<std::size_t>(j)];
  }

  double a_, b_, alpha_, beta_;
  int p_;
  std::vector<double> table_;
};

/// Builds the table by the recursion formulas; throws InvalidArgument for a >= b,
/// an interval outside [-1, 1] or p > kMaxDegree.
CoeffTable1D coeffs_1d(double a, double b, int max_degree);

/// Shared, cached table. Safe to call concurrently.
std::shared_ptr<const CoeffTable1D> cached_coeffs_1d(double a, double b, int max_degree);

/// Multi-dimensional constraint coefficient b^T_{ij} = prod_k b^{I_k}_{i_k, j_k}.
double coeff_tensor(const MultiIndex& i, const MultiIndex& j,
                    std::span<const CoeffTable1D* const> tables);

/// Matrix B for child T_i of the refinement of [-1,1]^d with respect to z:
/// entry (iota(k), iota(l)) = b^{T_i}_{kl}, both indices over {0..p_max}^d.
struct ChildBMatrix {
  MultiIndex child_index;
  int p_max = 0;
  Eigen::MatrixXd matrix;
};

ChildBMatrix child_b_matrix(const MultiIndex& child, int p_max, std::span<const double> z);

}  // namespace hpfem
