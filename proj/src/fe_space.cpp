#include "hpfem/fe_space.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <tuple>

#include "hpfem/constraint_coeffs.hpp"
#include "hpfem/errors.hpp"

namespace hpfem {

const char* to_string(DofKind kind) {
  switch (kind) {
    case DofKind::Vertex: return "vertex";
    case DofKind::EdgeMode: return "edge";
    case DofKind::Interior: return "interior";
  }
  return "?";
}

namespace {

using Sparse = std::map<int, double>;  // dof -> weight

void axpy(Sparse& acc, double w, const Sparse& x) {
  if (w == 0.0) return;
  for (const auto& [dof, v] : x) acc[dof] += w * v;
}

int frame_size(int dim, int p) {
  int m = 1;
  for (int k = 0; k < dim; ++k) m *= p + 1;
  return m;
}

// Collects per-dof coefficient rows for one leaf.
struct RowCollector {
  int m;
  std::map<int, Eigen::VectorXd> rows;

  void add(const Sparse& expansion, int slot) {
    for (const auto& [dof, w] : expansion) {
      auto it = rows.find(dof);
      if (it == rows.end()) it = rows.emplace(dof, Eigen::VectorXd::Zero(m)).first;
      it->second[slot] += w;
    }
  }

  ElementDofs finish(int p_frame) const {
    ElementDofs ed;
    ed.p_frame = p_frame;
    ed.coeffs.resize(static_cast<Eigen::Index>(rows.size()), m);
    Eigen::Index r = 0;
    for (const auto& [dof, row] : rows) {
      ed.dofs.push_back(dof);
      ed.coeffs.row(r++) = row.transpose();
    }
    return ed;
  }
};

}  // namespace

HpSpace HpSpace::build(Mesh mesh, std::vector<int> degrees, SpaceOptions options) {
  HpSpace s;
  s.mesh_ = std::move(mesh);
  s.degrees_ = std::move(degrees);
  s.options_ = options;
  if (static_cast<int>(s.degrees_.size()) < s.mesh_.num_elements())
    throw InvalidArgument("build_space: degree vector shorter than element count");
  s.leaves_ = s.mesh_.leaves();
  for (int id : s.leaves_) {
    const int p = s.degrees_[static_cast<std::size_t>(id)];
    if (p < 1 || p > kMaxDegree) throw InvalidArgument("build_space: leaf degree out of range");
  }
  s.element_dofs_.assign(static_cast<std::size_t>(s.mesh_.num_elements()), ElementDofs{});
  if (s.mesh_.dim() == 1) {
    s.build_1d();
  } else {
    if (!s.mesh_.is_one_irregular()) throw InvalidArgument("build_space: mesh is not 1-irregular");
    s.build_2d();
  }
  return s;
}

void HpSpace::build_1d() {
  // Vertices are identified by their coordinate on the finest level grid.
  int lmax = 0;
  for (int id : leaves_) lmax = std::max(lmax, mesh_.element(id).level);
  const std::int64_t n_fine = static_cast<std::int64_t>(mesh_.root_cells_per_axis()) << lmax;
  auto lo_key = [&](const Element& e) { return e.coords[0] << (lmax - e.level); };
  auto hi_key = [&](const Element& e) { return (e.coords[0] + 1) << (lmax - e.level); };

  std::map<std::int64_t, int> vertex_dof;
  for (int id : leaves_)
    for (std::int64_t key : {lo_key(mesh_.element(id)), hi_key(mesh_.element(id))}) vertex_dof.emplace(key, -1);
  for (auto& [key, dof] : vertex_dof) {
    if (options_.dirichlet && (key == 0 || key == n_fine)) continue;
    dof = static_cast<int>(dofs_.size());
    dofs_.push_back({DofKind::Vertex, -1, 1});
  }
  std::vector<int> sorted = leaves_;
  std::sort(sorted.begin(), sorted.end(),
            [&](int a, int b) { return lo_key(mesh_.element(a)) < lo_key(mesh_.element(b)); });
  for (int id : sorted) {
    const Element& e = mesh_.element(id);
    const int p = degrees_[static_cast<std::size_t>(id)];
    RowCollector rc{p + 1, {}};
    const int v0 = vertex_dof.at(lo_key(e));
    const int v1 = vertex_dof.at(hi_key(e));
    if (v0 >= 0) rc.add({{v0, 1.0}}, 0);
    if (v1 >= 0) rc.add({{v1, 1.0}}, 1);
    for (int j = 2; j <= p; ++j) {
      const int dof = static_cast<int>(dofs_.size());
      dofs_.push_back({DofKind::Interior, id, j});
      rc.add({{dof, 1.0}}, j);
    }
    element_dofs_[static_cast<std::size_t>(id)] = rc.finish(p);
  }
}

namespace {

using VertexKey = std::pair<std::int64_t, std::int64_t>;

// Mesh edge on the finest integer grid: runs along `along` at fixed coordinate `fixed`
// of the other axis, from `lo` to `hi`. The canonical direction is increasing coordinate.
struct EdgeKey {
  int along;
  std::int64_t fixed, lo, hi;
  auto operator<=>(const EdgeKey&) const = default;

  VertexKey point(std::int64_t t) const { return along == 0 ? VertexKey{t, fixed} : VertexKey{fixed, t}; }
  VertexKey start() const { return point(lo); }
  VertexKey end() const { return point(hi); }
  VertexKey mid() const { return point((lo + hi) / 2); }
};

struct IntBox {
  std::int64_t lo[2], hi[2];
};

// Side s of a box: 0 bottom, 1 top, 2 left, 3 right.
EdgeKey side_edge(const IntBox& b, int s) {
  if (s < 2) return {0, s == 0 ? b.lo[1] : b.hi[1], b.lo[0], b.hi[0]};
  return {1, s == 2 ? b.lo[0] : b.hi[0], b.lo[1], b.hi[1]};
}

// Local 2D slot of mode j on side s (j = 0, 1 give the side's endpoints).
MultiIndex side_slot(int s, int j) {
  switch (s) {
    case 0: return {j, 0};
    case 1: return {j, 1};
    case 2: return {0, j};
    default: return {1, j};
  }
}

enum class SideKind { Boundary, Regular, Slave, Master };

struct SideInfo {
  SideKind kind;
  EdgeKey master;  // edge carrying the dofs for this side
  int half = 0;    // slave sides: 0 lower half of the master, 1 upper half
};

}  // namespace

void HpSpace::build_2d() {
  int lmax = 0;
  for (int id : leaves_) lmax = std::max(lmax, mesh_.element(id).level);
  const std::int64_t n_fine = static_cast<std::int64_t>(mesh_.root_cells_per_axis()) << lmax;

  auto int_box = [&](int id) {
    const Element& e = mesh_.element(id);
    IntBox b;
    for (int k = 0; k < 2; ++k) {
      b.lo[k] = e.coords[k] << (lmax - e.level);
      b.hi[k] = (e.coords[k] + 1) << (lmax - e.level);
    }
    return b;
  };
  auto on_boundary = [&](const VertexKey& v) {
    return v.first == 0 || v.second == 0 || v.first == n_fine || v.second == n_fine;
  };

  // Classify every side of every leaf.
  std::map<int, std::array<SideInfo, 4>> sides;
  std::map<EdgeKey, int> edge_degree;
  std::map<VertexKey, EdgeKey> hanging;  // hanging vertex -> master edge
  for (int id : leaves_) {
    const Element& e = mesh_.element(id);
    const IntBox b = int_box(id);
    const int p = degrees_[static_cast<std::size_t>(id)];
    std::array<SideInfo, 4> info;
    for (int s = 0; s < 4; ++s) {
      const int normal = s < 2 ? 1 : 0;
      const int side = s % 2;
      const EdgeKey own = side_edge(b, s);
      const auto n1 = mesh_.leaf_across(id, normal, side, 0.25);
      SideInfo si{SideKind::Regular, own, 0};
      if (!n1) {
        si.kind = SideKind::Boundary;
      } else {
        const Element& n = mesh_.element(*n1);
        if (n.level < e.level) {
          // The neighbor's face on the opposite side is the master edge.
          si.kind = SideKind::Slave;
          si.master = side_edge(int_box(*n1), normal == 1 ? (side == 0 ? 1 : 0) : (side == 0 ? 3 : 2));
          si.half = own.lo == si.master.lo ? 0 : 1;
        } else if (n.level > e.level) {
          si.kind = SideKind::Master;
          hanging[own.mid()] = own;
        }
      }
      auto [it, fresh] = edge_degree.emplace(si.master, p);
      if (!fresh) it->second = std::min(it->second, p);
      info[static_cast<std::size_t>(s)] = si;
    }
    sides.emplace(id, info);
  }
  hanging_vertices_ = static_cast<int>(hanging.size());

  // Global numbering: vertices, edge modes, interior modes.
  std::map<VertexKey, int> vertex_dof;
  for (int id : leaves_) {
    const IntBox b = int_box(id);
    for (int v = 0; v < 4; ++v) {
      const VertexKey key{(v & 1) ? b.hi[0] : b.lo[0], (v & 2) ? b.hi[1] : b.lo[1]};
      if (hanging.count(key)) continue;
      vertex_dof.emplace(key, -1);
    }
  }
  for (auto& [key, dof] : vertex_dof) {
    if (options_.dirichlet && on_boundary(key)) continue;
    dof = static_cast<int>(dofs_.size());
    dofs_.push_back({DofKind::Vertex, -1, 1});
  }
  std::map<EdgeKey, int> edge_first_dof;  // dof of mode 2
  for (const auto& [edge, deg] : edge_degree) {
    const bool boundary_edge = (edge.fixed == 0 || edge.fixed == n_fine);
    if (options_.dirichlet && boundary_edge) continue;
    if (deg < 2) continue;
    edge_first_dof[edge] = static_cast<int>(dofs_.size());
    for (int j = 2; j <= deg; ++j) dofs_.push_back({DofKind::EdgeMode, -1, j});
  }

  // Expansion of vertex values and edge traces into global dofs.
  std::map<VertexKey, Sparse> vertex_memo;
  std::function<Sparse(const VertexKey&)> vertex_expansion;
  auto edge_trace = [&](const EdgeKey& edge, int i) -> Sparse {
    if (i == 0) return vertex_expansion(edge.start());
    if (i == 1) return vertex_expansion(edge.end());
    auto it = edge_first_dof.find(edge);
    if (it == edge_first_dof.end()) return {};
    return {{it->second + i - 2, 1.0}};
  };
  vertex_expansion = [&](const VertexKey& v) -> Sparse {
    if (auto m = vertex_memo.find(v); m != vertex_memo.end()) return m->second;
    Sparse out;
    if (auto h = hanging.find(v); h != hanging.end()) {
      const EdgeKey& edge = h->second;
      const int deg = edge_degree.at(edge);
      for (int i = 0; i <= deg; ++i) axpy(out, psi_eval(i, 0.0), edge_trace(edge, i));
    } else {
      const int dof = vertex_dof.at(v);
      if (dof >= 0) out[dof] = 1.0;
    }
    vertex_memo.emplace(v, out);
    return out;
  };

  const auto half_table = [&](int half, int deg) {
    return cached_coeffs_1d(half == 0 ? -1.0 : 0.0, half == 0 ? 0.0 : 1.0, deg);
  };

  for (int id : leaves_) {
    const IntBox b = int_box(id);
    const int p = degrees_[static_cast<std::size_t>(id)];
    RowCollector rc{(p + 1) * (p + 1), {}};
    auto slot = [&](const MultiIndex& j) { return index_iota(j, p) - 1; };

    for (int v = 0; v < 4; ++v) {
      const VertexKey key{(v & 1) ? b.hi[0] : b.lo[0], (v & 2) ? b.hi[1] : b.lo[1]};
      rc.add(vertex_expansion(key), slot({v & 1, (v >> 1) & 1}));
    }
    const auto& info = sides.at(id);
    for (int s = 0; s < 4; ++s) {
      const SideInfo& si = info[static_cast<std::size_t>(s)];
      const int deg = edge_degree.at(si.master);
      if (si.kind == SideKind::Slave) {
        const auto table = half_table(si.half, deg);
        for (int j = 2; j <= std::min(p, deg); ++j) {
          Sparse acc;
          for (int i = j; i <= deg; ++i) axpy(acc, (*table)(i, j), edge_trace(si.master, i));
          rc.add(acc, slot(side_slot(s, j)));
        }
      } else {
        for (int j = 2; j <= deg; ++j) rc.add(edge_trace(si.master, j), slot(side_slot(s, j)));
      }
    }
    for (int j2 = 2; j2 <= p; ++j2)
      for (int j1 = 2; j1 <= p; ++j1) {
        const int dof = static_cast<int>(dofs_.size());
        dofs_.push_back({DofKind::Interior, id, std::max(j1, j2)});
        rc.add({{dof, 1.0}}, slot({j1, j2}));
      }
    element_dofs_[static_cast<std::size_t>(id)] = rc.finish(p);
  }
}

const ElementDofs& HpSpace::element_dofs(int leaf) const {
  if (leaf < 0 || leaf >= mesh_.num_elements() || !mesh_.element(leaf).is_leaf())
    throw InvalidArgument("element_dofs: not a leaf");
  return element_dofs_[static_cast<std::size_t>(leaf)];
}

ElementDofs HpSpace::restriction(int leaf, int p_frame) const {
  const ElementDofs& ed = element_dofs(leaf);
  if (p_frame < ed.p_frame) throw InvalidArgument("restriction: frame degree below the element degree");
  if (p_frame == ed.p_frame) return ed;
  ElementDofs out;
  out.p_frame = p_frame;
  out.dofs = ed.dofs;
  out.coeffs.resize(ed.coeffs.rows(), frame_size(dim(), p_frame));
  for (Eigen::Index r = 0; r < ed.coeffs.rows(); ++r)
    out.coeffs.row(r) = reframe(ed.coeffs.row(r).transpose(), dim(), ed.p_frame, p_frame).transpose();
  return out;
}

Eigen::MatrixXd HpSpace::restriction_matrix_CQ(int leaf, int p_frame) const {
  const ElementDofs ed = restriction(leaf, p_frame);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(num_dofs(), ed.coeffs.cols());
  for (std::size_t r = 0; r < ed.dofs.size(); ++r) c.row(ed.dofs[r]) = ed.coeffs.row(static_cast<Eigen::Index>(r));
  return c;
}

std::vector<int> HpSpace::local_interior_indices(int leaf) const {
  std::vector<int> out;
  for (int dof : element_dofs(leaf).dofs)
    if (dofs_[static_cast<std::size_t>(dof)].kind == DofKind::Interior &&
        dofs_[static_cast<std::size_t>(dof)].element == leaf)
      out.push_back(dof);
  return out;
}

Eigen::VectorXd reframe(const Eigen::VectorXd& w, int dim, int from_degree, int to_degree) {
  if (from_degree == to_degree) return w;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(frame_size(dim, to_degree));
  const int m = frame_size(dim, from_degree);
  for (int l = 1; l <= m; ++l) {
    const MultiIndex j = iota_inverse(l, dim, from_degree);
    if (j.max_entry() > to_degree) continue;
    out[index_iota(j, to_degree) - 1] = w[l - 1];
  }
  return out;
}

Eigen::VectorXd frame_coefficients(const ElementDofs& ed, const Eigen::VectorXd& u) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(ed.coeffs.cols());
  for (std::size_t r = 0; r < ed.dofs.size(); ++r)
    w += u[ed.dofs[r]] * ed.coeffs.row(static_cast<Eigen::Index>(r)).transpose();
  return w;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> project_local(const HpSpace& space, const Eigen::VectorXd& u,
                                                          int leaf) {
  if (u.size() != space.num_dofs()) throw InvalidArgument("project_local: coefficient length mismatch");
  Eigen::VectorXd loc = Eigen::VectorXd::Zero(u.size());
  for (int i : space.local_interior_indices(leaf)) loc[i] = u[i];
  return {loc, u - loc};
}

FeValue eval_frame(const Eigen::VectorXd& w, int dim, int p_frame, std::span<const double> xhat) {
  std::array<std::array<double, kMaxDegree + 1>, 2> val{}, der{};
  for (int k = 0; k < dim; ++k)
    psi_all(p_frame, xhat[static_cast<std::size_t>(k)], std::span<double>(val[k].data(), p_frame + 1),
            std::span<double>(der[k].data(), p_frame + 1));
  FeValue out;
  if (dim == 1) {
    for (int j = 0; j <= p_frame; ++j) {
      out.value += w[j] * val[0][j];
      out.gradient[0] += w[j] * der[0][j];
    }
    return out;
  }
  for (int j2 = 0; j2 <= p_frame; ++j2)
    for (int j1 = 0; j1 <= p_frame; ++j1) {
      const double c = w[j1 + (p_frame + 1) * j2];
      if (c == 0.0) continue;
      out.value += c * val[0][j1] * val[1][j2];
      out.gradient[0] += c * der[0][j1] * val[1][j2];
      out.gradient[1] += c * val[0][j1] * der[1][j2];
    }
  return out;
}

FeValue eval_fe(const HpSpace& space, const Eigen::VectorXd& u, int leaf, std::span<const double> xhat) {
  const ElementDofs& ed = space.element_dofs(leaf);
  const int d = space.dim();
  const FeValue ref = eval_frame(frame_coefficients(ed, u), d, ed.p_frame, xhat);
  const MappedPoint mp = element_map(space.mesh().element(leaf).geometry(), xhat);
  FeValue out;
  out.value = ref.value;
  if (d == 1) {
    out.gradient[0] = ref.gradient[0] / mp.jacobian(0, 0);
  } else {
    const Eigen::Vector2d g = mp.jacobian.transpose().partialPivLu().solve(Eigen::Vector2d(ref.gradient[0], ref.gradient[1]));
    out.gradient = {g[0], g[1]};
  }
  return out;
}

}  // namespace hpfem
