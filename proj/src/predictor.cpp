#include "hpfem/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <tuple>

#include "hpfem/constraint_coeffs.hpp"
#include "hpfem/errors.hpp"
#include "hpfem/linear_solvers.hpp"

namespace hpfem {

namespace {

int frame_size(int dim, int p) {
  int m = 1;
  for (int k = 0; k < dim; ++k) m *= p + 1;
  return m;
}

// B-matrices of the midpoint refinement, shared between all predictions.
const Eigen::MatrixXd& midpoint_b_matrix(int dim, int flat_child, int p_frame) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, std::unique_ptr<Eigen::MatrixXd>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{dim, flat_child, p_frame}];
  if (!slot) {
    const std::vector<double> z(static_cast<std::size_t>(dim), 0.0);
    slot = std::make_unique<Eigen::MatrixXd>(child_b_matrix(child_tuple(flat_child, dim), p_frame, z).matrix);
  }
  return *slot;
}

// All tuples in {lo..hi}^r, first component fastest.
std::vector<MultiIndex> tuple_range(int r, int lo, int hi) {
  std::vector<MultiIndex> out;
  if (hi < lo) return r == 0 ? std::vector<MultiIndex>{MultiIndex(0)} : out;
  MultiIndex cur(r, lo);
  while (true) {
    out.push_back(cur);
    int k = 0;
    while (k < r && cur[k] == hi) cur[k++] = lo;
    if (k == r) break;
    ++cur[k];
  }
  return out;
}

// Multi-index j(i, p): p on the oriented axes of the node, 1 - i_k elsewhere.
MultiIndex hp_local_index(const InternalNode& n, const MultiIndex& child, const MultiIndex& p) {
  MultiIndex j(child.dim());
  for (int k = 0; k < child.dim(); ++k) j[k] = 1 - child[k];
  for (int m = 0; m < n.dim(); ++m) j[n.orientation[static_cast<std::size_t>(m)] - 1] = p[m];
  return j;
}

}  // namespace

std::string EnrichmentCatalog::label() const {
  if (kind == EnrichmentKind::P) return "p";
  std::string s = "hp";
  for (int p : child_degrees) s += "_" + std::to_string(p);
  return s;
}

EnrichmentCatalog build_p_catalog(int element, int dim, int p_q, PVariant variant) {
  if (dim < 1 || dim > kMaxMeshDim) throw InvalidArgument("build_p_catalog: dimension must be 1 or 2");
  if (p_q < 1 || p_q + 1 > kMaxDegree) throw InvalidArgument("build_p_catalog: degree overflow");
  EnrichmentCatalog cat;
  cat.kind = EnrichmentKind::P;
  cat.element = element;
  cat.dim = dim;
  cat.p_q = p_q;
  cat.p_frame = p_q + 1;
  cat.z.assign(static_cast<std::size_t>(dim), 0.0);
  for (const MultiIndex& j : tuple_range(dim, 2, p_q + 1))
    if (variant == PVariant::Full || j.max_entry() == p_q + 1) cat.p_indices.push_back(j);
  const int l = static_cast<int>(cat.p_indices.size());
  const int m = frame_size(dim, cat.p_frame);
  for (int c = 0; c < (1 << dim); ++c) {
    const Eigen::MatrixXd& b = midpoint_b_matrix(dim, c, cat.p_frame);
    Eigen::MatrixXd d(l, m);
    for (int r = 0; r < l; ++r) d.row(r) = b.row(index_iota(cat.p_indices[static_cast<std::size_t>(r)], cat.p_frame) - 1);
    cat.d_matrices.push_back(std::move(d));
  }
  return cat;
}

EnrichmentCatalog build_hp_catalog(int element, int dim, const std::vector<int>& child_degrees) {
  if (dim < 1 || dim > kMaxMeshDim) throw InvalidArgument("build_hp_catalog: dimension must be 1 or 2");
  if (static_cast<int>(child_degrees.size()) != (1 << dim))
    throw InvalidArgument("build_hp_catalog: need one degree per child");
  for (int p : child_degrees)
    if (p < 1 || p > kMaxDegree) throw InvalidArgument("build_hp_catalog: child degree out of range");
  EnrichmentCatalog cat;
  cat.kind = EnrichmentKind::Hp;
  cat.element = element;
  cat.dim = dim;
  cat.child_degrees = child_degrees;
  cat.p_frame = *std::max_element(child_degrees.begin(), child_degrees.end());
  cat.p_q = cat.p_frame;
  cat.z.assign(static_cast<std::size_t>(dim), 0.0);
  for (const InternalNode& n : internal_nodes(dim)) {
    int pn = kMaxDegree;
    for (const MultiIndex& i : incident_children(n, dim)) pn = std::min(pn, child_degrees[static_cast<std::size_t>(child_flat_index(i))]);
    for (const MultiIndex& p : tuple_range(n.dim(), 2, pn)) cat.hp_functions.push_back({n, p});
  }
  const int l = static_cast<int>(cat.hp_functions.size());
  const int m = frame_size(dim, cat.p_frame);
  for (int c = 0; c < (1 << dim); ++c) cat.d_matrices.push_back(Eigen::MatrixXd::Zero(l, m));
  for (int r = 0; r < l; ++r) {
    const auto& f = cat.hp_functions[static_cast<std::size_t>(r)];
    for (const MultiIndex& i : incident_children(f.node, dim))
      cat.d_matrices[static_cast<std::size_t>(child_flat_index(i))](r, index_iota(hp_local_index(f.node, i, f.degrees), cat.p_frame) - 1) = 1.0;
  }
  return cat;
}

TensorValue eval_enrichment(const EnrichmentCatalog& cat, int index, std::span<const double> xhat) {
  if (index < 0 || index >= cat.size()) throw InvalidArgument("eval_enrichment: index out of range");
  const int d = cat.dim;
  if (cat.kind == EnrichmentKind::P) return psi_tensor_eval(cat.p_indices[static_cast<std::size_t>(index)], xhat);
  MultiIndex child(d);
  std::vector<double> t(static_cast<std::size_t>(d));
  std::vector<double> scale(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    const double zk = cat.z[static_cast<std::size_t>(k)];
    child[k] = xhat[static_cast<std::size_t>(k)] >= zk ? 1 : 0;
    const double lo = child[k] ? zk : -1.0;
    const double hi = child[k] ? 1.0 : zk;
    scale[static_cast<std::size_t>(k)] = 2.0 / (hi - lo);
    t[static_cast<std::size_t>(k)] = (xhat[static_cast<std::size_t>(k)] - lo) * scale[static_cast<std::size_t>(k)] - 1.0;
  }
  const auto& f = cat.hp_functions[static_cast<std::size_t>(index)];
  TensorValue out;
  out.gradient.assign(static_cast<std::size_t>(d), 0.0);
  for (int k = 0; k < f.node.dim(); ++k)
    if (child[f.node.orientation[static_cast<std::size_t>(k)] - 1] != f.node.location[static_cast<std::size_t>(k)])
      return out;
  out = psi_tensor_eval(hp_local_index(f.node, child, f.degrees), t);
  for (int k = 0; k < d; ++k) out.gradient[static_cast<std::size_t>(k)] *= scale[static_cast<std::size_t>(k)];
  return out;
}

LocalSystem assemble_local_system(const HpSpace& space, const Eigen::VectorXd& u, int leaf,
                                  const EnrichmentCatalog& cat, const ProblemForms& forms,
                                  double global_energy_sq) {
  const int d = space.dim();
  if (cat.dim != d) throw InvalidArgument("assemble_local_system: catalog dimension mismatch");
  if (cat.element != leaf) throw InvalidArgument("assemble_local_system: catalog belongs to another element");
  if (u.size() != space.num_dofs()) throw InvalidArgument("assemble_local_system: coefficient length mismatch");
  const int pw = std::max(cat.p_frame, space.degree(leaf));
  const ElementDofs ed = space.restriction(leaf, pw);

  const auto [u_loc, u_tilde] = project_local(space, u, leaf);
  const Eigen::VectorXd w_loc = frame_coefficients(ed, u_loc);
  const Eigen::VectorXd w_tilde = frame_coefficients(ed, u_tilde);

  const std::vector<ElementGeometry> children = refine_element(space.mesh().element(leaf).geometry(), cat.z);
  const int l = cat.size();
  LocalSystem sys;
  sys.A = Eigen::MatrixXd::Zero(l, l);
  sys.c = Eigen::VectorXd::Zero(l);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(l);
  double b_loc = 0.0;
  const bool midpoint = std::all_of(cat.z.begin(), cat.z.end(), [](double v) { return v == 0.0; });
  for (int c = 0; c < (1 << d); ++c) {
    const Eigen::MatrixXd bmat =
        midpoint ? midpoint_b_matrix(d, c, pw) : child_b_matrix(child_tuple(c, d), pw, cat.z).matrix;
    Eigen::MatrixXd dm = cat.d_matrices[static_cast<std::size_t>(c)];
    if (cat.p_frame != pw) {
      Eigen::MatrixXd wide(l, bmat.cols());
      for (int r = 0; r < l; ++r) wide.row(r) = reframe(dm.row(r).transpose(), d, cat.p_frame, pw).transpose();
      dm = std::move(wide);
    }
    const LocalCellMatrices lm = local_matrices(forms, children[static_cast<std::size_t>(c)], pw);
    const Eigen::VectorXd child_tilde = bmat.transpose() * w_tilde;
    const Eigen::VectorXd child_loc = bmat.transpose() * w_loc;
    const Eigen::MatrixXd da = dm * lm.A;
    sys.A.noalias() += da * dm.transpose();
    sys.c.noalias() += da * child_tilde;
    b.noalias() += dm * lm.b;
    sys.u_loc_norm_sq += child_loc.dot(lm.A * child_loc);
    b_loc += child_loc.dot(lm.b);
  }
  sys.A = 0.5 * (sys.A + sys.A.transpose());
  sys.delta = b_loc - sys.u_loc_norm_sq;
  sys.a00 = global_energy_sq - sys.u_loc_norm_sq - 2.0 * sys.delta;
  sys.rhs = b - sys.c;
  return sys;
}

Prediction predicted_reduction(const LocalSystem& sys) {
  const Eigen::Index l = sys.A.rows();
  Prediction out;
  try {
    if (sys.a00 <= 1e-14) {
      out.y = DenseCholesky(sys.A).solve(sys.rhs);
      out.eps = 0.0;
    } else {
      Eigen::MatrixXd m(l + 1, l + 1);
      m(0, 0) = sys.a00;
      m.block(1, 0, l, 1) = sys.c;
      m.block(0, 1, 1, l) = sys.c.transpose();
      m.bottomRightCorner(l, l) = sys.A;
      Eigen::VectorXd r(l + 1);
      r[0] = sys.delta;
      r.tail(l) = sys.rhs;
      const Eigen::VectorXd x = DenseCholesky(m).solve(r);
      out.eps = x[0];
      out.y = x.tail(l);
    }
  } catch (const SingularSystemError& e) {
    throw DependentEnrichmentError(std::string("enrichment functions are linearly dependent: ") + e.what());
  }
  out.delta_e_sq = out.y.dot(sys.rhs) - sys.u_loc_norm_sq + out.eps * sys.delta;
  return out;
}

EnrichmentChoice best_enrichment(const HpSpace& space, const Eigen::VectorXd& u, int leaf, const ProblemForms& forms,
                                 double global_energy_sq, const PredictorConfig& config) {
  const int d = space.dim();
  const int pq = space.degree(leaf);
  std::vector<EnrichmentCatalog> catalogs;
  if (pq < config.p_cap && pq + 1 <= kMaxDegree) catalogs.push_back(build_p_catalog(leaf, d, pq, config.p_variant));
  if (space.mesh().element(leaf).level >= space.mesh().max_level()) {
    // no further bisection possible
  } else if (d == 1) {
    for (int p0 = 1; p0 <= pq; ++p0) catalogs.push_back(build_hp_catalog(leaf, 1, {p0, pq + 1 - p0}));
  } else {
    catalogs.push_back(build_hp_catalog(leaf, d, std::vector<int>(static_cast<std::size_t>(1 << d), pq)));
  }
  EnrichmentChoice choice;
  choice.element = leaf;
  for (const EnrichmentCatalog& cat : catalogs) {
    CandidateResult r;
    r.kind = cat.kind;
    r.child_degrees = cat.child_degrees;
    r.label = cat.label();
    try {
      r.delta_e_sq = predicted_reduction(assemble_local_system(space, u, leaf, cat, forms, global_energy_sq)).delta_e_sq;
      r.valid = std::isfinite(r.delta_e_sq);
    } catch (const DependentEnrichmentError&) {
      r.valid = false;
    }
    if (r.valid && (!choice.valid || r.delta_e_sq > choice.delta_e_sq)) {
      choice.valid = true;
      choice.kind = r.kind;
      choice.child_degrees = r.child_degrees;
      choice.delta_e_sq = r.delta_e_sq;
    }
    choice.candidates.push_back(std::move(r));
  }
  return choice;
}

void write_prediction_csv(std::ostream& out, const std::vector<EnrichmentChoice>& choices, bool header) {
  if (header) out << "element,candidate,delta_e_sq\n";
  const auto old = out.precision(17);
  for (const EnrichmentChoice& ch : choices)
    for (const CandidateResult& c : ch.candidates)
      out << ch.element << ',' << c.label << ',' << (c.valid ? c.delta_e_sq : std::nan("")) << '\n';
  out.precision(old);
}

}  // namespace hpfem
