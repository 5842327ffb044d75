#pragma once

#include <functional>
#include <optional>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hpfem/fe_space.hpp"
#include "hpfem/mesh.hpp"
#include "hpfem/shape_basis.hpp"

namespace hpfem {

/// a(v,w) = int eps grad v . grad w + kappa v w,   b(v) = int f v.
struct ProblemForms {
  double diffusion = 1.0;
  double reaction = 0.0;
  std::function<double(const Point&)> source = [](const Point&) { return 1.0; };
  /// Optional per-cell 1D rule (on [-1,1], used in every axis) for the load integrals.
  /// Returning nullopt selects the default Gauss rule.
  std::function<std::optional<QuadRule>(const Box& cell, int p_frame)> load_rule;
};

/// Cell matrix and load vector over the frame functions zeta_l = psi_{iota^{-1}(l+1)} o F^{-1}.
struct LocalCellMatrices {
  int p_frame = 0;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

/// Uses the tensor-product factorisation for axis-parallel boxes, quadrature otherwise.
LocalCellMatrices local_matrices(const ProblemForms& forms, const ElementGeometry& cell, int p_frame);

/// Plain quadrature with the full multilinear map (any transformed hexahedron).
LocalCellMatrices local_matrices_quadrature(const ProblemForms& forms, const ElementGeometry& cell, int p_frame);

/// Load vector only.
Eigen::VectorXd local_load(const ProblemForms& forms, const ElementGeometry& cell, int p_frame);

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct GlobalSystem {
  SparseMatrix A;
  Eigen::VectorXd b;
};

/// A = sum_Q C_Q A_Q C_Q^T and b = sum_Q C_Q b_Q over the leaves. Cells are processed
/// in parallel with `threads` workers; the result does not depend on the thread count.
GlobalSystem assemble_global(const HpSpace& space, const ProblemForms& forms, int threads = 1);

/// u^T A u.
double energy_norm_sq(const SparseMatrix& A, const Eigen::VectorXd& u);

/// ||u_W||^2 of a Galerkin solution as 2 b^T x - x^T A x; agrees with x^T A x for the
/// exact solution and is less sensitive to solver error.
double galerkin_energy_sq(const GlobalSystem& sys, const Eigen::VectorXd& x);

}  // namespace hpfem
