#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace hpfem {

/// Largest polynomial degree accepted anywhere in the library.
inline constexpr int kMaxDegree = 30;

/// Quadrature rule on the reference interval [-1, 1].
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// A d-tuple of nonnegative integers (polynomial degrees per axis, child indices, ...).
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(int dim, int fill = 0) : entries_(static_cast<std::size_t>(dim), fill) {}
  MultiIndex(std::initializer_list<int> entries) : entries_(entries) {}
  explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {}

  int dim() const noexcept { return static_cast<int>(entries_.size()); }
  int order() const noexcept;
  int max_entry() const noexcept;

  int& operator[](int k) { return entries_[static_cast<std::size_t>(k)]; }
  int operator[](int k) const { return entries_[static_cast<std::size_t>(k)]; }

  std::span<const int> entries() const noexcept { return entries_; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  /// Componentwise j_k <= other_k.
  bool dominated_by(const MultiIndex& other) const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<int> entries_;
};

/// Legendre polynomial L_j(t) by the three-term (Bonnet) recursion.
double legendre_eval(int j, double t);

/// Integrated Legendre shape function psi_j: the two hats for j < 2, internal modes otherwise.
double psi_eval(int j, double t);

/// d/dt psi_j(t); equals L_{j-1}(t) for j >= 2.
double psi_deriv(int j, double t);

/// Fills values[j] = psi_j(t) and derivs[j] = psi_j'(t) for j = 0..p in one sweep.
/// Either span may be empty to skip it; otherwise it must hold p+1 entries.
void psi_all(int p, double t, std::span<double> values, std::span<double> derivs);

struct TensorValue {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Tensor-product function prod_k psi_{j_k}(x_k) and its gradient on [-1,1]^d.
TensorValue psi_tensor_eval(const MultiIndex& j, std::span<const double> x);

/// n-point Gauss-Legendre rule on [-1, 1], 1 <= n <= 64. Rules are cached.
const QuadRule& gauss_rule(int n);

/// Composite Gauss rule on [-1, 1] whose panels shrink geometrically towards t = -1:
/// the panel boundaries are -1 + 2*ratio^k, k = 0..panels-1, plus the innermost panel
/// [-1, -1 + 2*ratio^(panels-1)].
QuadRule graded_gauss_rule(double ratio, int panels, int points_per_panel);

/// Gauss rule in s on [0,1] pulled back through t = -1 + 2 s^power. Integrands with an
/// algebraic endpoint singularity (t+1)^(k/power - 1) become polynomial in s.
QuadRule power_graded_rule(int points, int power);

/// The rule mapped from [-1, 1] onto [a, b] (weights scaled by (b-a)/2).
QuadRule map_rule(const QuadRule& rule, double a, double b);

}  // namespace hpfem
