#include <cmath>

#include "doctest.h"
#include "hpfem/errors.hpp"
#include "hpfem/shape_basis.hpp"
#include "test_util.hpp"

using namespace hpfem;
using doctest::Approx;

TEST_CASE("legendre values") {
  CHECK(legendre_eval(0, 0.3) == 1.0);
  CHECK(legendre_eval(1, 0.5) == 0.5);
  CHECK(legendre_eval(3, 0.5) == Approx(-0.4375).epsilon(1e-15));
  for (int j = 0; j <= 12; ++j) CHECK(legendre_eval(j, -1.0) == Approx(j % 2 ? -1.0 : 1.0).epsilon(1e-14));
}

TEST_CASE("legendre recursion agrees with the explicit binomial sum") {
  for (int j = 0; j <= 15; ++j)
    for (int s = 0; s < 10; ++s) {
      const double t = testutil::uniform(-1.0, 1.0);
      CHECK(std::abs(legendre_eval(j, t) - testutil::legendre_explicit(j, t)) < 1e-12);
    }
}

TEST_CASE("legendre orthogonality") {
  for (int i = 0; i <= 12; ++i)
    for (int j = 0; j <= 12; ++j) {
      const QuadRule& r = gauss_rule(std::max(i, j) + 1);
      double s = 0.0;
      for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * legendre_eval(i, r.nodes[q]) * legendre_eval(j, r.nodes[q]);
      const double expected = i == j ? 2.0 / (2 * j + 1) : 0.0;
      CHECK(std::abs(s - expected) < 1e-12);
    }
}

TEST_CASE("integrated legendre functions") {
  CHECK(psi_eval(0, -1.0) == 1.0);
  CHECK(psi_eval(0, 1.0) == 0.0);
  CHECK(psi_eval(2, 0.0) == Approx(-0.5).epsilon(1e-15));
  for (int j = 2; j <= 12; ++j) {
    CHECK(std::abs(psi_eval(j, -1.0)) < 1e-14);
    CHECK(std::abs(psi_eval(j, 1.0)) < 1e-14);
  }
  SUBCASE("closed form equals the defining integral") {
    for (int j = 0; j <= 12; ++j)
      for (int s = 0; s < 5; ++s) {
        const double t = testutil::uniform(-1.0, 1.0);
        CHECK(std::abs(psi_eval(j, t) - testutil::psi_by_integration(j, t)) < 1e-12);
      }
  }
}

TEST_CASE("psi derivatives") {
  CHECK(psi_deriv(0, 0.7) == -0.5);
  CHECK(psi_deriv(1, 0.7) == 0.5);
  for (int s = 0; s < 10; ++s) {
    const double t = testutil::uniform(-1.0, 1.0);
    CHECK(psi_deriv(2, t) == Approx(t).epsilon(1e-14));
  }
  const double h = 1e-6;
  for (int j : {0, 1, 3, 5, 8, 12})
    for (int s = 0; s < 20; ++s) {
      const double t = testutil::uniform(-0.99, 0.99);
      const double fd = (psi_eval(j, t + h) - psi_eval(j, t - h)) / (2 * h);
      CHECK(std::abs(psi_deriv(j, t) - fd) < 1e-7);
    }
}

TEST_CASE("psi_all matches single evaluations") {
  std::vector<double> v(16), d(16);
  for (int s = 0; s < 10; ++s) {
    const double t = testutil::uniform(-1.0, 1.0);
    psi_all(15, t, v, d);
    for (int j = 0; j <= 15; ++j) {
      CHECK(v[j] == Approx(psi_eval(j, t)).epsilon(1e-13));
      CHECK(d[j] == Approx(psi_deriv(j, t)).epsilon(1e-13));
    }
  }
}

TEST_CASE("tensor shape functions") {
  const std::vector<double> corner{-1.0, -1.0};
  CHECK(psi_tensor_eval({0, 0}, corner).value == 1.0);
  const std::vector<double> origin{0.0, 0.0};
  CHECK(psi_tensor_eval({2, 2}, origin).value == Approx(0.25));
  const double h = 1e-6;
  for (int s = 0; s < 20; ++s) {
    const MultiIndex j{testutil::uniform_int(0, 6), testutil::uniform_int(0, 6)};
    std::vector<double> x{testutil::uniform(-0.99, 0.99), testutil::uniform(-0.99, 0.99)};
    const TensorValue tv = psi_tensor_eval(j, x);
    for (int k = 0; k < 2; ++k) {
      auto xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const double fd = (psi_tensor_eval(j, xp).value - psi_tensor_eval(j, xm).value) / (2 * h);
      CHECK(std::abs(tv.gradient[k] - fd) < 1e-7);
    }
  }
}

TEST_CASE("gauss rules") {
  CHECK(gauss_rule(1).nodes[0] == 0.0);
  CHECK(gauss_rule(1).weights[0] == 2.0);
  const QuadRule& g2 = gauss_rule(2);
  CHECK(g2.nodes[0] == Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(g2.nodes[1] == Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(g2.weights[0] == Approx(1.0).epsilon(1e-15));
  const QuadRule& g3 = gauss_rule(3);
  CHECK(std::abs(g3.nodes[1]) < 1e-15);
  CHECK(g3.nodes[2] == Approx(std::sqrt(0.6)).epsilon(1e-15));
  CHECK(g3.weights[1] == Approx(8.0 / 9.0).epsilon(1e-15));
  CHECK(g3.weights[0] == Approx(5.0 / 9.0).epsilon(1e-15));
  CHECK_THROWS_AS(gauss_rule(0), InvalidArgument);
  CHECK_THROWS_AS(gauss_rule(65), InvalidArgument);
}

TEST_CASE("gauss rules agree with the Jacobi-matrix eigenvalue construction") {
  for (int n : {4, 7, 12, 20, 40, 64}) {
    const QuadRule& r = gauss_rule(n);
    std::vector<double> x, w;
    testutil::golub_welsch(n, x, w);
    for (int q = 0; q < n; ++q) {
      CHECK(std::abs(r.nodes[q] - x[q]) < 1e-13);
      CHECK(std::abs(r.weights[q] - w[q]) < 1e-13);
    }
  }
  for (int n : {4, 7, 10}) {
    const QuadRule& r = gauss_rule(n);
    for (std::size_t q = 0; q < r.size(); ++q) CHECK(std::abs(testutil::legendre_explicit(n, r.nodes[q])) < 1e-13);
  }
}

TEST_CASE("gauss rule invariants and exactness") {
  for (int n = 1; n <= 64; ++n) {
    const QuadRule& r = gauss_rule(n);
    double s = 0.0;
    for (double w : r.weights) {
      CHECK(w > 0.0);
      s += w;
    }
    CHECK(s == Approx(2.0).epsilon(1e-14));
    for (std::size_t q = 1; q < r.size(); ++q) CHECK(r.nodes[q] > r.nodes[q - 1]);
  }
  for (int n = 1; n <= 20; ++n) {
    const QuadRule& r = gauss_rule(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.nodes[q], k);
      const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
      CHECK(std::abs(s - exact) < 1e-13);
    }
  }
}

TEST_CASE("graded and power-graded rules") {
  const QuadRule g = graded_gauss_rule(0.15, 12, 8);
  double s = 0.0;
  for (double w : g.weights) s += w;
  CHECK(s == Approx(2.0).epsilon(1e-14));
  // (t+1)^(-1/4) becomes a polynomial in s under t = -1 + 2 s^4.
  const QuadRule p = power_graded_rule(10, 4);
  double integral = 0.0;
  for (std::size_t q = 0; q < p.size(); ++q) integral += p.weights[q] * std::pow(p.nodes[q] + 1.0, -0.25) * (1.0 - p.nodes[q]);
  const double exact = 2.0 * std::pow(2.0, 0.75) / 0.75 - std::pow(2.0, 1.75) / 1.75;
  CHECK(std::abs(integral - exact) < 1e-13);
  const QuadRule m = map_rule(gauss_rule(3), 0.0, 2.0);
  CHECK(m.weights[0] + m.weights[1] + m.weights[2] == Approx(2.0));
  CHECK_THROWS_AS(graded_gauss_rule(1.5, 3, 4), InvalidArgument);
}

TEST_CASE("multi-index") {
  const MultiIndex j{2, 3, 1};
  CHECK(j.dim() == 3);
  CHECK(j.order() == 6);
  CHECK(j.max_entry() == 3);
  CHECK(MultiIndex({1, 2, 1}).dominated_by(j));
  CHECK_FALSE(MultiIndex({3, 0, 0}).dominated_by(j));
}
