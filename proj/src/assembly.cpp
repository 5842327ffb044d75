#include "hpfem/assembly.hpp"

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "hpfem/errors.hpp"

namespace hpfem {

namespace {

struct Reference1D {
  Eigen::MatrixXd stiffness;  // int psi_i' psi_j' over [-1,1]
  Eigen::MatrixXd mass;       // int psi_i psi_j over [-1,1]
};

const Reference1D& reference_1d(int p) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<Reference1D>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[p];
  if (!slot) {
    slot = std::make_unique<Reference1D>();
    slot->stiffness = Eigen::MatrixXd::Zero(p + 1, p + 1);
    slot->mass = Eigen::MatrixXd::Zero(p + 1, p + 1);
    const QuadRule& rule = gauss_rule(p + 3);
    std::vector<double> v(static_cast<std::size_t>(p + 1)), dv(static_cast<std::size_t>(p + 1));
    for (std::size_t q = 0; q < rule.size(); ++q) {
      psi_all(p, rule.nodes[q], v, dv);
      for (int i = 0; i <= p; ++i)
        for (int j = 0; j <= p; ++j) {
          slot->stiffness(i, j) += rule.weights[q] * dv[i] * dv[j];
          slot->mass(i, j) += rule.weights[q] * v[i] * v[j];
        }
    }
  }
  return *slot;
}

std::optional<Box> as_box(const ElementGeometry& g) {
  Box b;
  b.dim = g.dim;
  for (int k = 0; k < g.dim; ++k) {
    b.lo[k] = g.vertices.front()[k];
    b.hi[k] = g.vertices.back()[k];
  }
  const ElementGeometry expected = box_geometry(b);
  for (std::size_t v = 0; v < g.vertices.size(); ++v)
    for (int k = 0; k < g.dim; ++k)
      if (expected.vertices[v][k] != g.vertices[v][k]) return std::nullopt;
  for (int k = 0; k < g.dim; ++k)
    if (!(b.hi[k] > b.lo[k])) return std::nullopt;
  return b;
}

Box bounding_box(const ElementGeometry& g) {
  Box b;
  b.dim = g.dim;
  for (int k = 0; k < g.dim; ++k) {
    b.lo[k] = b.hi[k] = g.vertices.front()[k];
    for (const Point& v : g.vertices) {
      b.lo[k] = std::min(b.lo[k], v[k]);
      b.hi[k] = std::max(b.hi[k], v[k]);
    }
  }
  return b;
}

QuadRule load_rule_for(const ProblemForms& forms, const Box& cell, int p_frame) {
  if (forms.load_rule)
    if (auto r = forms.load_rule(cell, p_frame)) return *r;
  return gauss_rule(p_frame + 3);
}

int frame_size(int dim, int p) { return dim == 1 ? p + 1 : (p + 1) * (p + 1); }

}  // namespace

Eigen::VectorXd local_load(const ProblemForms& forms, const ElementGeometry& cell, int p_frame) {
  const int d = cell.dim;
  const int n1 = p_frame + 1;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(frame_size(d, p_frame));
  const auto box = as_box(cell);
  const QuadRule rule = load_rule_for(forms, box ? *box : bounding_box(cell), p_frame);
  const std::size_t nq = rule.size();
  std::vector<double> vx(static_cast<std::size_t>(n1)), vy(static_cast<std::size_t>(n1));
  if (d == 1) {
    for (std::size_t q = 0; q < nq; ++q) {
      const double t = rule.nodes[q];
      const MappedPoint mp = element_map(cell, std::span<const double>(&t, 1));
      psi_all(p_frame, t, vx, {});
      const double w = rule.weights[q] * std::abs(mp.det) * forms.source(mp.x);
      for (int i = 0; i <= p_frame; ++i) b[i] += w * vx[i];
    }
    return b;
  }
  for (std::size_t qy = 0; qy < nq; ++qy) {
    psi_all(p_frame, rule.nodes[qy], vy, {});
    for (std::size_t qx = 0; qx < nq; ++qx) {
      const double t[2] = {rule.nodes[qx], rule.nodes[qy]};
      const MappedPoint mp = element_map(cell, t);
      psi_all(p_frame, t[0], vx, {});
      const double w = rule.weights[qx] * rule.weights[qy] * std::abs(mp.det) * forms.source(mp.x);
      for (int j2 = 0; j2 < n1; ++j2)
        for (int j1 = 0; j1 < n1; ++j1) b[j1 + n1 * j2] += w * vx[j1] * vy[j2];
    }
  }
  return b;
}

LocalCellMatrices local_matrices_quadrature(const ProblemForms& forms, const ElementGeometry& cell, int p_frame) {
  const int d = cell.dim;
  const int m = frame_size(d, p_frame);
  const int n1 = p_frame + 1;
  LocalCellMatrices out;
  out.p_frame = p_frame;
  out.A = Eigen::MatrixXd::Zero(m, m);
  const QuadRule& rule = gauss_rule(p_frame + 3);
  std::vector<double> vx(static_cast<std::size_t>(n1)), dx(static_cast<std::size_t>(n1)),
      vy(static_cast<std::size_t>(n1), 1.0), dy(static_cast<std::size_t>(n1), 0.0);
  Eigen::VectorXd val(m);
  Eigen::MatrixXd grad(d, m);
  const std::size_t ny = d == 1 ? 1 : rule.size();
  for (std::size_t qy = 0; qy < ny; ++qy) {
    if (d == 2) psi_all(p_frame, rule.nodes[qy], vy, dy);
    for (std::size_t qx = 0; qx < rule.size(); ++qx) {
      psi_all(p_frame, rule.nodes[qx], vx, dx);
      const double t[2] = {rule.nodes[qx], d == 2 ? rule.nodes[qy] : 0.0};
      const MappedPoint mp = element_map(cell, std::span<const double>(t, static_cast<std::size_t>(d)));
      const double w = rule.weights[qx] * (d == 2 ? rule.weights[qy] : 1.0) * std::abs(mp.det);
      const Eigen::MatrixXd jinv_t = mp.jacobian.topLeftCorner(d, d).inverse().transpose();
      for (int j2 = 0; j2 < (d == 2 ? n1 : 1); ++j2)
        for (int j1 = 0; j1 < n1; ++j1) {
          const int l = j1 + n1 * j2;
          val[l] = vx[j1] * vy[j2];
          Eigen::VectorXd gref(d);
          gref[0] = dx[j1] * vy[j2];
          if (d == 2) gref[1] = vx[j1] * dy[j2];
          grad.col(l) = jinv_t * gref;
        }
      out.A.noalias() += w * (forms.diffusion * grad.transpose() * grad + forms.reaction * val * val.transpose());
    }
  }
  out.A = 0.5 * (out.A + out.A.transpose());
  out.b = local_load(forms, cell, p_frame);
  return out;
}

LocalCellMatrices local_matrices(const ProblemForms& forms, const ElementGeometry& cell, int p_frame) {
  const auto box = as_box(cell);
  if (!box) return local_matrices_quadrature(forms, cell, p_frame);
  const int d = cell.dim;
  const Reference1D& ref = reference_1d(p_frame);
  const int n1 = p_frame + 1;
  LocalCellMatrices out;
  out.p_frame = p_frame;
  if (d == 1) {
    const double h = box->width(0);
    out.A = forms.diffusion * (2.0 / h) * ref.stiffness + forms.reaction * (h / 2.0) * ref.mass;
  } else {
    const double hx = box->width(0), hy = box->width(1);
    const double kx = forms.diffusion * (2.0 / hx) * (hy / 2.0);
    const double ky = forms.diffusion * (hx / 2.0) * (2.0 / hy);
    const double mm = forms.reaction * (hx / 2.0) * (hy / 2.0);
    const int m = n1 * n1;
    out.A.resize(m, m);
    for (int i2 = 0; i2 < n1; ++i2)
      for (int i1 = 0; i1 < n1; ++i1)
        for (int j2 = 0; j2 < n1; ++j2)
          for (int j1 = 0; j1 < n1; ++j1)
            out.A(i1 + n1 * i2, j1 + n1 * j2) = kx * ref.stiffness(i1, j1) * ref.mass(i2, j2) +
                                                ky * ref.mass(i1, j1) * ref.stiffness(i2, j2) +
                                                mm * ref.mass(i1, j1) * ref.mass(i2, j2);
  }
  out.b = local_load(forms, cell, p_frame);
  return out;
}

GlobalSystem assemble_global(const HpSpace& space, const ProblemForms& forms, int threads) {
  const std::vector<int>& leaves = space.leaves();
  std::vector<std::vector<Eigen::Triplet<double>>> trips(leaves.size());
  std::vector<std::vector<std::pair<int, double>>> loads(leaves.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < leaves.size(); k = next++) {
      const int leaf = leaves[k];
      const ElementDofs& ed = space.element_dofs(leaf);
      const LocalCellMatrices lm = local_matrices(forms, space.mesh().element(leaf).geometry(), ed.p_frame);
      const Eigen::MatrixXd ca = ed.coeffs * lm.A;
      const Eigen::MatrixXd a = ca * ed.coeffs.transpose();
      const Eigen::VectorXd b = ed.coeffs * lm.b;
      auto& t = trips[k];
      for (std::size_t r = 0; r < ed.dofs.size(); ++r) {
        loads[k].emplace_back(ed.dofs[r], b[static_cast<Eigen::Index>(r)]);
        for (std::size_t c = 0; c < ed.dofs.size(); ++c)
          t.emplace_back(ed.dofs[r], ed.dofs[c], a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
      }
    }
  };
  const int nthreads = std::max(1, threads);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  GlobalSystem sys;
  const int n = space.num_dofs();
  sys.b = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> all;
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    all.insert(all.end(), trips[k].begin(), trips[k].end());
    for (const auto& [i, v] : loads[k]) sys.b[i] += v;
  }
  sys.A.resize(n, n);
  sys.A.setFromTriplets(all.begin(), all.end());
  return sys;
}

double energy_norm_sq(const SparseMatrix& A, const Eigen::VectorXd& u) {
  if (A.rows() != u.size()) throw InvalidArgument("energy_norm_sq: size mismatch");
  return u.dot(A * u);
}

double galerkin_energy_sq(const GlobalSystem& sys, const Eigen::VectorXd& x) {
  return 2.0 * sys.b.dot(x) - energy_norm_sq(sys.A, x);
}

}  // namespace hpfem
