#include <cmath>

#include "doctest.h"
#include "hpfem/adaptivity.hpp"
#include "hpfem/errors.hpp"
#include "hpfem/linear_solvers.hpp"
#include "hpfem/problems.hpp"
#include "test_util.hpp"

using namespace hpfem;
using doctest::Approx;

namespace {

double second_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
}

// Energy of the exact 1D solution by composite Gauss panels on [a, 1] plus an analytic or
// graded treatment supplied by the caller near 0.
double composite_energy(const ProblemSpec& p, double a, int panels) {
  std::vector<double> x, w;
  testutil::golub_welsch(20, x, w);
  double s = 0.0;
  // geometric panels from a to 1
  const double ratio = std::pow(1.0 / a, 1.0 / panels);
  double lo = a;
  for (int k = 0; k < panels; ++k) {
    const double hi = lo * ratio;
    for (std::size_t q = 0; q < x.size(); ++q) {
      const double t = lo + 0.5 * (x[q] + 1) * (hi - lo);
      const double du = p.exact_du(t), u = p.exact_u(t);
      s += w[q] * 0.5 * (hi - lo) * (p.forms.diffusion * du * du + p.forms.reaction * u * u);
    }
    lo = hi;
  }
  return s;
}

ProblemSpec poisson_toy() {
  ProblemSpec p;
  p.name = "toy";
  p.mesh = Mesh::uniform(1, 2);
  p.degrees = {1, 1};
  p.energy_sq = 1.0 / 12;
  p.exact_u = [](double x) { return 0.5 * x * (1 - x); };
  p.exact_du = [](double x) { return 0.5 - x; };
  return p;
}

}  // namespace

TEST_CASE("singularly perturbed problem") {
  const ProblemSpec p = problem_singular_perturbation(1e-5);
  CHECK(p.dim == 1);
  CHECK(p.mesh.num_leaves() == 4);
  CHECK(p.forms.diffusion == 1e-5);
  CHECK(p.forms.reaction == 1.0);
  CHECK(std::abs(p.exact_u(0.0)) < 1e-15);
  CHECK(std::abs(p.exact_u(1.0)) < 1e-15);
  CHECK(std::abs(p.exact_u(0.5) - 1.0) < 1e-10);
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const ProblemSpec q = problem_singular_perturbation(eps);
    for (double x : {0.1, 0.3, 0.77}) {
      const double h = 1e-4 * std::sqrt(eps);
      CHECK(-eps * second_difference(q.exact_u, x, h) + q.exact_u(x) == Approx(1.0).epsilon(1e-5));
      CHECK(q.exact_du(x) == Approx((q.exact_u(x + h) - q.exact_u(x - h)) / (2 * h)).epsilon(1e-6));
    }
    // stored closed-form energy against graded composite quadrature of the exact solution
    const double near0 = composite_energy(q, 1e-12, 400);
    CHECK(*q.energy_sq == Approx(near0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(problem_singular_perturbation(0.0), InvalidArgument);
}

TEST_CASE("singularly perturbed energy matches a fine Galerkin approximation") {
  const ProblemSpec q = problem_singular_perturbation(1e-3);
  const HpSpace s = HpSpace::build(Mesh::uniform(1, 64), std::vector<int>(64, 8));
  const GlobalSystem sys = assemble_global(s, q.forms);
  const double e = galerkin_energy_sq(sys, solve_spd(sys.A, sys.b));
  CHECK(e <= *q.energy_sq + 1e-14);
  CHECK(std::abs(e - *q.energy_sq) < 1e-7);
}

TEST_CASE("boundary singularity problem") {
  const ProblemSpec p = problem_boundary_singularity();
  CHECK(p.mesh.num_leaves() == 4);
  CHECK(p.singular_at_origin);
  CHECK(*p.energy_sq == 0.125);
  CHECK(std::abs(p.exact_u(1.0)) < 1e-15);
  CHECK(p.exact_du(1e-8) == Approx(74.0));
  CHECK(p.exact_du(1e-12) > p.exact_du(1e-8));
  for (double x : {0.01, 0.2, 0.6, 0.95}) {
    const double h = 1e-4 * x;
    CHECK(-second_difference(p.exact_u, x, h) == Approx(p.forms.source({x, 0.0})).epsilon(1e-5));
    CHECK(p.forms.source({x, 0.0}) == Approx(3.0 / 16 * std::pow(x, -1.25)));
  }
  // (3/4 x^-1/4 - 1)^2 integrates to 9/8 - 2 + 1 via x = s^4
  std::vector<double> gx, gw;
  testutil::golub_welsch(20, gx, gw);
  double e = 0.0;
  for (std::size_t q = 0; q < gx.size(); ++q) {
    const double s = 0.5 * (gx[q] + 1), x = std::pow(s, 4);
    e += gw[q] * 0.5 * 4 * s * s * s * std::pow(p.exact_du(x), 2);
  }
  CHECK(e == Approx(0.125).epsilon(1e-13));
}

TEST_CASE("singular load integrals on the first cell") {
  const ProblemSpec p = problem_boundary_singularity();
  for (double h : {0.25, 0.125, 1.0 / 1024, 1.0 / (1 << 20)}) {
    const ElementGeometry cell = box_geometry(Box{1, {0.0, 0.0}, {h, 0.0}});
    const Eigen::VectorXd b = local_load(p.forms, cell, 4);
    // int f * x/h = h^(-1/4)/4 and int f * 2x(x-h)/h^2 = -(2/7) h^(-1/4)
    CHECK(b[1] == Approx(0.25 * std::pow(h, -0.25)).epsilon(1e-10));
    CHECK(b[2] == Approx(-2.0 / 7 * std::pow(h, -0.25)).epsilon(1e-10));
  }
  // away from 0 the default rule is used and the integrand is smooth
  const ElementGeometry cell = box_geometry(Box{1, {0.25, 0.0}, {0.5, 0.0}});
  const Eigen::VectorXd b = local_load(p.forms, cell, 1);
  // int_{1/4}^{1/2} (3/16) x^{-5/4} (x - 1/4) * 4 dx
  const double exact = 0.75 * (4 * (std::pow(0.5, 0.75) - std::pow(0.25, 0.75)) / 3) -
                       0.75 * 0.25 * (-4) * (std::pow(0.5, -0.25) - std::pow(0.25, -0.25));
  CHECK(b[1] == Approx(exact).epsilon(1e-12));
}

TEST_CASE("2D Poisson reference energy") {
  const ProblemSpec p = problem_poisson_2d();
  CHECK(p.mesh.num_leaves() == 16);
  CHECK(*p.energy_sq == 0.035144253738788451);
  CHECK(std::abs(poisson2d_series_energy() - kPoisson2dEnergySq) < 1e-12);
  // truncation at 2001 leaves a tail bounded by 2 (2/pi)^6 (pi^2/8) / (6 * 2001^3)
  const double tail = 2 * std::pow(2 / M_PI, 6) * (M_PI * M_PI / 8) / (6 * std::pow(2001.0, 3));
  const double s2001 = poisson2d_series_energy(2001);
  CHECK(s2001 < kPoisson2dEnergySq);
  CHECK(kPoisson2dEnergySq - s2001 < tail);
}

TEST_CASE("2D Poisson solutions are symmetric") {
  const ProblemSpec p = problem_poisson_2d();
  const HpSpace s = HpSpace::build(p.mesh, std::vector<int>(16, 3));
  const GlobalSystem sys = assemble_global(s, p.forms);
  const Eigen::VectorXd u = solve_spd(sys.A, sys.b);
  for (int k = 0; k < 20; ++k) {
    const Point a{testutil::uniform(0, 1), testutil::uniform(0, 1)}, b{a[1], a[0]};
    auto value = [&](const Point& x) {
      const int leaf = *s.mesh().locate(x);
      const Box& bx = s.mesh().element(leaf).box;
      const std::vector<double> xh{2 * (x[0] - bx.lo[0]) / bx.width(0) - 1, 2 * (x[1] - bx.lo[1]) / bx.width(1) - 1};
      return eval_fe(s, u, leaf, xh).value;
    };
    CHECK(std::abs(value(a) - value(b)) < 1e-10);
  }
}

TEST_CASE("exact error") {
  const ProblemSpec toy = poisson_toy();
  const HpSpace s = HpSpace::build(toy.mesh, toy.degrees);
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, 0.125);
  CHECK(exact_error(s, u, toy) == Approx(1.0 / 48).epsilon(1e-13));
  CHECK(exact_error_direct(s, u, toy) == Approx(1.0 / 48).epsilon(1e-12));
  CHECK(exact_error_from_energy(toy, 1.0 / 16) == Approx(1.0 / 48));
  CHECK(exact_error_from_energy(toy, 1.0 / 12 + 5e-13) == 0.0);

  const HpSpace quad = HpSpace::build(toy.mesh, {2, 2});
  const GlobalSystem sys = assemble_global(quad, toy.forms);
  const Eigen::VectorXd uq = solve_spd(sys.A, sys.b);
  CHECK(std::abs(exact_error(quad, uq, toy)) < 1e-12);
  CHECK(std::abs(exact_error_direct(quad, uq, toy)) < 1e-12);

  ProblemSpec none = toy;
  none.energy_sq.reset();
  CHECK_THROWS_AS(exact_error(s, u, none), UnsupportedOperation);
}

TEST_CASE("orthogonality and direct error paths agree on adaptive runs") {
  for (const ProblemSpec& p : {problem_singular_perturbation(1e-3), problem_singular_perturbation(1e-5),
                               problem_boundary_singularity()}) {
    AdaptConfig cfg;
    cfg.max_iterations = 15;
    int checked = 0;
    adapt_loop(p, cfg, [&](const IterationRecord& rec, const HpSpace& s, const Eigen::VectorXd& u) {
      CHECK(std::abs(rec.error_sq - exact_error_direct(s, u, p)) < 1e-8);
      ++checked;
    });
    CHECK(checked == 16);
  }
}

TEST_CASE("problem factory") {
  CHECK(make_problem("sp1d", 1e-3).forms.diffusion == 1e-3);
  CHECK(make_problem("sing1d").name == "sing1d");
  CHECK(make_problem("poisson2d").dim == 2);
  CHECK_THROWS_AS(make_problem("heat3d"), InvalidArgument);
}
