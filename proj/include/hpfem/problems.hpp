#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hpfem/assembly.hpp"
#include "hpfem/fe_space.hpp"
#include "hpfem/mesh.hpp"

namespace hpfem {

/// Energy ||u||^2 of the exact solution of -Laplace u = 1 on the unit square (series value).
inline constexpr double kPoisson2dEnergySq = 0.035144253738788451;

struct ProblemSpec {
  std::string name;
  int dim = 1;
  ProblemForms forms;
  Mesh mesh;
  std::vector<int> degrees;  ///< by element id
  SpaceOptions space_options;
  std::optional<double> energy_sq;          ///< ||u||^2 of the exact solution
  std::function<double(double)> exact_u;    ///< 1D pointwise exact solution, if known
  std::function<double(double)> exact_du;
  bool singular_at_origin = false;          ///< exact derivative blows up at x = 0
};

/// -eps u'' + u = 1 on (0,1), u(0) = u(1) = 0; four linear elements.
ProblemSpec problem_singular_perturbation(double epsilon);

/// -u'' = (3/16) x^(-5/4) on (0,1) with u = x^(3/4) - x; four linear elements.
ProblemSpec problem_boundary_singularity();

/// -Laplace u = 1 on (0,1)^2, u = 0 on the boundary; 4 x 4 bilinear elements.
ProblemSpec problem_poisson_2d();

/// sp1d | sing1d | poisson2d; throws InvalidArgument otherwise.
ProblemSpec make_problem(const std::string& name, double epsilon = 1e-5);

/// (2/pi)^6 sum over odd k, l <= kmax of 1 / (k^2 l^2 (k^2 + l^2)).
double poisson2d_series_energy(int kmax = 8001);

/// ||u - u_W||^2 = ||u||^2 - ||u_W||^2 (Galerkin orthogonality); clamped at 0 within 1e-12.
/// Throws UnsupportedOperation when the problem has no reference energy.
double exact_error_from_energy(const ProblemSpec& problem, double galerkin_energy_sq);

/// Same quantity for a coefficient vector (assembles the system internally).
double exact_error(const HpSpace& space, const Eigen::VectorXd& u, const ProblemSpec& problem);

/// 1D only: composite quadrature of eps (u' - u_W')^2 + kappa (u - u_W)^2 against the
/// pointwise exact solution.
double exact_error_direct(const HpSpace& space, const Eigen::VectorXd& u, const ProblemSpec& problem);

}  // namespace hpfem
