#include "hpfem/shape_basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "hpfem/errors.hpp"

namespace hpfem {

int MultiIndex::order() const noexcept {
  int sum = 0;
  for (int e : entries_) sum += e;
  return sum;
}

int MultiIndex::max_entry() const noexcept {
  int m = 0;
  for (int e : entries_) m = std::max(m, e);
  return m;
}

bool MultiIndex::dominated_by(const MultiIndex& other) const {
  if (other.dim() != dim()) throw InvalidArgument("MultiIndex::dominated_by: dimension mismatch");
  for (int k = 0; k < dim(); ++k)
    if ((*this)[k] > other[k]) return false;
  return true;
}

double legendre_eval(int j, double t) {
  if (j < 0) throw InvalidArgument("legendre_eval: negative degree");
  if (j == 0) return 1.0;
  double prev = 1.0;
  double cur = t;
  for (int k = 2; k <= j; ++k) {
    const double next = ((2.0 * k - 1.0) * t * cur - (k - 1.0) * prev) / k;
    prev = cur;
    cur = next;
  }
  return cur;
}

double psi_eval(int j, double t) {
  if (j < 0) throw InvalidArgument("psi_eval: negative degree");
  if (j == 0) return 0.5 * (1.0 - t);
  if (j == 1) return 0.5 * (1.0 + t);
  return (legendre_eval(j, t) - legendre_eval(j - 2, t)) / (2.0 * j - 1.0);
}

double psi_deriv(int j, double t) {
  if (j < 0) throw InvalidArgument("psi_deriv: negative degree");
  if (j == 0) return -0.5;
  if (j == 1) return 0.5;
  return legendre_eval(j - 1, t);
}

void psi_all(int p, double t, std::span<double> values, std::span<double> derivs) {
  if (p < 0) throw InvalidArgument("psi_all: negative degree");
  std::array<double, kMaxDegree + 2> leg{};
  if (p > kMaxDegree + 1) throw InvalidArgument("psi_all: degree above kMaxDegree + 1");
  leg[0] = 1.0;
  if (p >= 1) leg[1] = t;
  for (int k = 2; k <= p; ++k) leg[k] = ((2.0 * k - 1.0) * t * leg[k - 1] - (k - 1.0) * leg[k - 2]) / k;

  if (!values.empty()) {
    values[0] = 0.5 * (1.0 - t);
    if (p >= 1) values[1] = 0.5 * (1.0 + t);
    for (int k = 2; k <= p; ++k) values[k] = (leg[k] - leg[k - 2]) / (2.0 * k - 1.0);
  }
  if (!derivs.empty()) {
    derivs[0] = -0.5;
    if (p >= 1) derivs[1] = 0.5;
    for (int k = 2; k <= p; ++k) derivs[k] = leg[k - 1];
  }
}

TensorValue psi_tensor_eval(const MultiIndex& j, std::span<const double> x) {
  const int d = j.dim();
  if (d < 1 || static_cast<int>(x.size()) != d)
    throw InvalidArgument("psi_tensor_eval: dimension mismatch");
  std::vector<double> val(d), der(d);
  for (int k = 0; k < d; ++k) {
    val[k] = psi_eval(j[k], x[k]);
    der[k] = psi_deriv(j[k], x[k]);
  }
  TensorValue out;
  out.value = 1.0;
  for (double v : val) out.value *= v;
  out.gradient.assign(d, 1.0);
  for (int k = 0; k < d; ++k)
    for (int m = 0; m < d; ++m) out.gradient[k] *= (m == k) ? der[m] : val[m];
  return out;
}

namespace {

QuadRule compute_gauss_rule(int n) {
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      // L_n'(x) = n (x L_n - L_{n-1}) / (x^2 - 1)
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // refresh the derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  // Newton from the cosine guesses yields decreasing nodes
  std::reverse(rule.nodes.begin(), rule.nodes.end());
  std::reverse(rule.weights.begin(), rule.weights.end());
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const QuadRule& gauss_rule(int n) {
  if (n < 1 || n > 64) throw InvalidArgument("gauss_rule: point count must lie in [1, 64], got " + std::to_string(n));
  static std::array<QuadRule, 65> cache;
  static std::array<std::once_flag, 65> flags;
  std::call_once(flags[n], [n] { cache[n] = compute_gauss_rule(n); });
  return cache[n];
}

QuadRule map_rule(const QuadRule& rule, double a, double b) {
  QuadRule out;
  out.nodes.reserve(rule.size());
  out.weights.reserve(rule.size());
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    out.nodes.push_back(mid + half * rule.nodes[q]);
    out.weights.push_back(half * rule.weights[q]);
  }
  return out;
}

QuadRule graded_gauss_rule(double ratio, int panels, int points_per_panel) {
  if (!(ratio > 0.0 && ratio < 1.0) || panels < 1)
    throw InvalidArgument("graded_gauss_rule: need 0 < ratio < 1 and panels >= 1");
  const QuadRule& base = gauss_rule(points_per_panel);
  std::vector<double> breaks{-1.0};
  for (int k = panels - 1; k >= 0; --k) breaks.push_back(-1.0 + 2.0 * std::pow(ratio, k));
  QuadRule out;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const QuadRule panel = map_rule(base, breaks[s], breaks[s + 1]);
    out.nodes.insert(out.nodes.end(), panel.nodes.begin(), panel.nodes.end());
    out.weights.insert(out.weights.end(), panel.weights.begin(), panel.weights.end());
  }
  return out;
}

}  // namespace hpfem

namespace hpfem {

QuadRule power_graded_rule(int points, int power) {
  if (power < 1) throw InvalidArgument("power_graded_rule: power must be positive");
  const QuadRule& base = gauss_rule(points);
  QuadRule out;
  for (std::size_t q = 0; q < base.size(); ++q) {
    const double s = 0.5 * (base.nodes[q] + 1.0);
    out.nodes.push_back(-1.0 + 2.0 * std::pow(s, power));
    out.weights.push_back(base.weights[q] * power * std::pow(s, power - 1));
  }
  return out;
}

}  // namespace hpfem
