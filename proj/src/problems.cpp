#include "hpfem/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hpfem/errors.hpp"
#include "hpfem/linear_solvers.hpp"

namespace hpfem {

namespace {

std::vector<int> linear_degrees(const Mesh& m) { return std::vector<int>(static_cast<std::size_t>(m.num_elements()), 1); }

}  // namespace

ProblemSpec problem_singular_perturbation(double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("singular perturbation: epsilon must be positive");
  ProblemSpec p;
  p.name = "sp1d";
  p.dim = 1;
  p.forms.diffusion = epsilon;
  p.forms.reaction = 1.0;
  p.forms.source = [](const Point&) { return 1.0; };
  p.mesh = Mesh::uniform(1, 4);
  p.degrees = linear_degrees(p.mesh);
  const double c = 1.0 / std::sqrt(epsilon);
  const double ec = std::exp(-c);
  // Written with decaying exponentials only, so large c cannot overflow.
  p.exact_u = [c, ec](double x) { return 1.0 - (std::exp(-c * (1.0 - x)) + std::exp(-c * x)) / (1.0 + ec); };
  p.exact_du = [c, ec](double x) { return -c * (std::exp(-c * (1.0 - x)) - std::exp(-c * x)) / (1.0 + ec); };
  p.energy_sq = 1.0 - 2.0 * (1.0 - ec) / (c * (1.0 + ec));
  return p;
}

ProblemSpec problem_boundary_singularity() {
  ProblemSpec p;
  p.name = "sing1d";
  p.dim = 1;
  p.forms.diffusion = 1.0;
  p.forms.reaction = 0.0;
  p.forms.source = [](const Point& x) { return 0.1875 * std::pow(x[0], -1.25); };
  // f * psi behaves like x^(-1/4) on the cell at the origin; x = s^4 makes that polynomial.
  p.forms.load_rule = [](const Box& cell, int p_frame) -> std::optional<QuadRule> {
    if (cell.lo[0] == 0.0) return power_graded_rule(std::min(64, 2 * p_frame + 6), 4);
    return gauss_rule(std::min(64, p_frame + 13));
  };
  p.mesh = Mesh::uniform(1, 4);
  p.degrees = linear_degrees(p.mesh);
  p.exact_u = [](double x) { return std::pow(x, 0.75) - x; };
  p.exact_du = [](double x) { return 0.75 * std::pow(x, -0.25) - 1.0; };
  p.energy_sq = 0.125;
  p.singular_at_origin = true;
  return p;
}

ProblemSpec problem_poisson_2d() {
  ProblemSpec p;
  p.name = "poisson2d";
  p.dim = 2;
  p.forms.diffusion = 1.0;
  p.forms.reaction = 0.0;
  p.forms.source = [](const Point&) { return 1.0; };
  p.mesh = Mesh::uniform(2, 4);
  p.degrees = linear_degrees(p.mesh);
  p.energy_sq = kPoisson2dEnergySq;
  return p;
}

ProblemSpec make_problem(const std::string& name, double epsilon) {
  if (name == "sp1d") return problem_singular_perturbation(epsilon);
  if (name == "sing1d") return problem_boundary_singularity();
  if (name == "poisson2d") return problem_poisson_2d();
  throw InvalidArgument("unknown problem '" + name + "' (expected sp1d, sing1d or poisson2d)");
}

double poisson2d_series_energy(int kmax) {
  if (kmax < 1) throw InvalidArgument("poisson2d_series_energy: kmax must be positive");
  long double total = 0.0L;
  // Smallest terms first.
  for (int k = kmax - (kmax % 2 == 0 ? 1 : 0); k >= 1; k -= 2) {
    const long double k2 = static_cast<long double>(k) * k;
    long double row = 0.0L;
    for (int l = kmax - (kmax % 2 == 0 ? 1 : 0); l >= 1; l -= 2) {
      const long double l2 = static_cast<long double>(l) * l;
      row += 1.0L / (k2 * l2 * (k2 + l2));
    }
    total += row;
  }
  const long double c = 2.0L / std::numbers::pi_v<long double>;
  return static_cast<double>(c * c * c * c * c * c * total);
}

double exact_error_from_energy(const ProblemSpec& problem, double galerkin_energy_sq) {
  if (!problem.energy_sq) throw UnsupportedOperation("exact_error: problem '" + problem.name + "' has no reference");
  const double e = *problem.energy_sq - galerkin_energy_sq;
  return (e < 0.0 && e >= -1e-12) ? 0.0 : e;
}

double exact_error(const HpSpace& space, const Eigen::VectorXd& u, const ProblemSpec& problem) {
  const GlobalSystem sys = assemble_global(space, problem.forms);
  return exact_error_from_energy(problem, galerkin_energy_sq(sys, u));
}

double exact_error_direct(const HpSpace& space, const Eigen::VectorXd& u, const ProblemSpec& problem) {
  if (space.dim() != 1 || !problem.exact_u || !problem.exact_du)
    throw UnsupportedOperation("exact_error_direct: needs a 1D problem with a pointwise exact solution");
  const double eps = problem.forms.diffusion;
  const double kappa = problem.forms.reaction;
  // Panels no wider than a few layer widths sqrt(eps).
  const double layer = std::sqrt(eps);
  long double total = 0.0L;
  for (int leaf : space.leaves()) {
    const Box& box = space.mesh().element(leaf).box;
    const int p = space.degree(leaf);
    std::vector<std::pair<double, double>> panels;  // reference sub-intervals
    QuadRule rule;
    if (problem.singular_at_origin && box.lo[0] == 0.0) {
      rule = power_graded_rule(std::min(64, 2 * p + 12), 4);
      panels.emplace_back(-1.0, 1.0);
    } else {
      rule = gauss_rule(std::min(64, p + 20));
      const int n = std::clamp(static_cast<int>(std::ceil(box.width(0) / (4.0 * layer))), 1, 4000);
      for (int s = 0; s < n; ++s) panels.emplace_back(-1.0 + 2.0 * s / n, -1.0 + 2.0 * (s + 1) / n);
    }
    const double jac = 0.5 * box.width(0);
    for (const auto& [a, b] : panels) {
      const QuadRule pr = map_rule(rule, a, b);
      long double sum = 0.0L;
      for (std::size_t q = 0; q < pr.size(); ++q) {
        const double t = pr.nodes[q];
        const double x = box.lo[0] + (t + 1.0) * jac;
        const FeValue fe = eval_fe(space, u, leaf, std::span<const double>(&t, 1));
        const double de = problem.exact_du(x) - fe.gradient[0];
        const double e = problem.exact_u(x) - fe.value;
        sum += pr.weights[q] * (eps * de * de + kappa * e * e);
      }
      total += sum * jac;
    }
  }
  return static_cast<double>(total);
}

}  // namespace hpfem
