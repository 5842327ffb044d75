#include "hpfem/constraint_coeffs.hpp"

#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "hpfem/errors.hpp"
#include "hpfem/mesh.hpp"

namespace hpfem {

CoeffTable1D::CoeffTable1D(double a, double b, int max_degree)
    : a_(a), b_(b), alpha_(0.5 * (b - a)), beta_(0.5 * (a + b)), p_(max_degree) {
  if (!(a < b)) throw InvalidArgument("constraint coefficients: degenerate interval, need a < b");
  if (a < -1.0 || b > 1.0) throw InvalidArgument("constraint coefficients: interval must lie in [-1,1]");
  if (max_degree < 0 || max_degree > kMaxDegree)
    throw InvalidArgument("constraint coefficients: degree " + std::to_string(max_degree) + " out of range");
  table_.assign(static_cast<std::size_t>(p_ + 1) * static_cast<std::size_t>(p_ + 1), 0.0);

  const double al = alpha_;
  const double be = beta_;
  // Out-of-range reads (column i+1 of row i) are zero by item (v).
  auto get = [&](int i, int j) { return (j > p_ || i < 0) ? 0.0 : (*this)(i, j); };

  at(0, 0) = 0.5 * (1.0 + al - be);
  if (p_ == 0) return;
  at(1, 0) = 0.5 * (1.0 - al + be);
  at(0, 1) = 0.5 * (1.0 - al - be);
  at(1, 1) = 0.5 * (1.0 + al + be);
  if (p_ == 1) return;
  at(2, 0) = 0.5 * ((al - be) * (al - be) - 1.0);
  at(2, 1) = 0.5 * ((al + be) * (al + be) - 1.0);
  at(2, 2) = al * al;

  for (int i = 3; i <= p_; ++i) {
    const double di = i;
    const double s = 2.0 * i - 3.0;
    const double t = i - 3.0;
    at(i, i) = al * get(i - 1, i - 1);
    at(i, 0) = (s * (be - al) * get(i - 1, 0) - t * get(i - 2, 0)) / di;
    at(i, 1) = (s * (al + be) * get(i - 1, 1) - t * get(i - 2, 1)) / di;
    at(i, 2) = (s * (al * (0.2 * get(i - 1, 3) - (get(i - 1, 0) - get(i - 1, 1))) + be * get(i - 1, 2)) -
                t * get(i - 2, 2)) / di;
    if (i >= 4)
      at(i, i - 1) = s / di * ((i - 1.0) / (2.0 * i - 5.0) * al * get(i - 1, i - 2) + be * get(i - 1, i - 1));
    for (int j = 3; j <= i - 2; ++j) {
      const double dj = j;
      at(i, j) = (s * (al * (dj / (2.0 * j - 3.0) * get(i - 1, j - 1) + (dj - 1.0) / (2.0 * j + 1.0) * get(i - 1, j + 1)) +
                       be * get(i - 1, j)) -
                  t * get(i - 2, j)) / di;
    }
  }
}

CoeffTable1D coeffs_1d(double a, double b, int max_degree) { return CoeffTable1D(a, b, max_degree); }

std::shared_ptr<const CoeffTable1D> cached_coeffs_1d(double a, double b, int max_degree) {
  static std::mutex mutex;
  static std::map<std::pair<std::pair<double, double>, int>, std::shared_ptr<const CoeffTable1D>> cache;
  const auto key = std::make_pair(std::make_pair(a, b), max_degree);
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto table = std::make_shared<const CoeffTable1D>(a, b, max_degree);
  cache.emplace(key, table);
  return table;
}

double coeff_tensor(const MultiIndex& i, const MultiIndex& j, std::span<const CoeffTable1D* const> tables) {
  const int d = i.dim();
  if (j.dim() != d || static_cast<int>(tables.size()) != d)
    throw InvalidArgument("coeff_tensor: dimension mismatch");
  double v = 1.0;
  for (int k = 0; k < d; ++k) {
    const CoeffTable1D& t = *tables[static_cast<std::size_t>(k)];
    if (i[k] > t.max_degree() || j[k] > t.max_degree())
      throw InvalidArgument("coeff_tensor: table degree too small");
    v *= t(i[k], j[k]);
    if (v == 0.0) return 0.0;
  }
  return v;
}

ChildBMatrix child_b_matrix(const MultiIndex& child, int p_max, std::span<const double> z) {
  const int d = child.dim();
  const Box sub = reference_child(child, z);
  std::vector<std::shared_ptr<const CoeffTable1D>> owned;
  std::vector<const CoeffTable1D*> tables;
  for (int k = 0; k < d; ++k) {
    owned.push_back(cached_coeffs_1d(sub.lo[k], sub.hi[k], p_max));
    tables.push_back(owned.back().get());
  }
  int m = 1;
  for (int k = 0; k < d; ++k) m *= p_max + 1;
  ChildBMatrix out;
  out.child_index = child;
  out.p_max = p_max;
  out.matrix = Eigen::MatrixXd::Zero(m, m);
  for (int r = 1; r <= m; ++r) {
    const MultiIndex kk = iota_inverse(r, d, p_max);
    for (int c = 1; c <= m; ++c) {
      const MultiIndex ll = iota_inverse(c, d, p_max);
      out.matrix(r - 1, c - 1) = coeff_tensor(kk, ll, tables);
    }
  }
  return out;
}

}  // namespace hpfem
