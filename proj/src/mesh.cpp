#include "hpfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>
#include <string>

#include "json.hpp"

#include "hpfem/errors.hpp"

namespace hpfem {

double Box::volume() const {
  double v = 1.0;
  for (int k = 0; k < dim; ++k) v *= hi[k] - lo[k];
  return v;
}

bool Box::contains(const Point& x, double tol) const {
  for (int k = 0; k < dim; ++k)
    if (x[k] < lo[k] - tol || x[k] > hi[k] + tol) return false;
  return true;
}

ElementGeometry box_geometry(const Box& box) {
  ElementGeometry g;
  g.dim = box.dim;
  const int nv = 1 << box.dim;
  g.vertices.resize(nv);
  for (int v = 0; v < nv; ++v)
    for (int k = 0; k < box.dim; ++k) g.vertices[v][k] = ((v >> k) & 1) ? box.hi[k] : box.lo[k];
  return g;
}

MappedPoint element_map(const ElementGeometry& q, std::span<const double> xhat) {
  const int d = q.dim;
  if (d < 1 || d > kMaxMeshDim || static_cast<int>(xhat.size()) != d)
    throw InvalidArgument("element_map: dimension mismatch");
  if (static_cast<int>(q.vertices.size()) != (1 << d))
    throw InvalidArgument("element_map: expected 2^d vertices");
  MappedPoint out;
  for (int v = 0; v < (1 << d); ++v) {
    double val = 1.0;
    std::array<double, kMaxMeshDim> grad{1.0, 1.0};
    for (int k = 0; k < d; ++k) {
      const int ik = (v >> k) & 1;
      const double pk = ik ? 0.5 * (1.0 + xhat[k]) : 0.5 * (1.0 - xhat[k]);
      const double dk = ik ? 0.5 : -0.5;
      for (int m = 0; m < d; ++m) grad[m] *= (m == k) ? dk : pk;
      val *= pk;
    }
    for (int m = 0; m < d; ++m) {
      out.x[m] += val * q.vertices[v][m];
      for (int k = 0; k < d; ++k) out.jacobian(m, k) += grad[k] * q.vertices[v][m];
    }
  }
  out.det = d == 1 ? out.jacobian(0, 0)
                   : out.jacobian(0, 0) * out.jacobian(1, 1) - out.jacobian(0, 1) * out.jacobian(1, 0);
  return out;
}

int child_flat_index(const MultiIndex& child) {
  int flat = 0;
  for (int k = 0; k < child.dim(); ++k) {
    if (child[k] != 0 && child[k] != 1) throw InvalidArgument("child index entries must be 0 or 1");
    flat |= child[k] << k;
  }
  return flat;
}

MultiIndex child_tuple(int flat, int dim) {
  MultiIndex c(dim);
  for (int k = 0; k < dim; ++k) c[k] = (flat >> k) & 1;
  return c;
}

Box reference_child(const MultiIndex& child, std::span<const double> z) {
  const int d = child.dim();
  if (d < 1 || d > kMaxMeshDim || static_cast<int>(z.size()) != d)
    throw InvalidArgument("reference_child: dimension mismatch");
  Box b;
  b.dim = d;
  for (int k = 0; k < d; ++k) {
    if (!(z[k] > -1.0 && z[k] < 1.0)) throw InvalidArgument("refinement point must lie in (-1,1)^d");
    const double corner = 2.0 * child[k] - 1.0;
    b.lo[k] = std::min(corner, z[k]);
    b.hi[k] = std::max(corner, z[k]);
  }
  return b;
}

std::vector<Box> reference_children(int dim, std::span<const double> z) {
  std::vector<Box> out;
  for (int c = 0; c < (1 << dim); ++c) out.push_back(reference_child(child_tuple(c, dim), z));
  return out;
}

std::vector<ElementGeometry> refine_element(const ElementGeometry& q, std::span<const double> z) {
  std::vector<ElementGeometry> out;
  for (const Box& ref : reference_children(q.dim, z)) {
    ElementGeometry child;
    child.dim = q.dim;
    for (const Point& rv : box_geometry(ref).vertices)
      child.vertices.push_back(element_map(q, std::span<const double>(rv.data(), q.dim)).x);
    out.push_back(std::move(child));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// All strictly increasing r-tuples from 1..d, lexicographic.
std::vector<std::vector<int>> orientations(int d, int r) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == r) {
      out.push_back(cur);
      return;
    }
    for (int a = start; a <= d; ++a) {
      cur.push_back(a);
      self(self, a + 1);
      cur.pop_back();
    }
  };
  rec(rec, 1);
  return out;
}

long binomial(int n, int k) {
  long b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

long ipow(long base, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

void check_node(const InternalNode& n, int d) {
  if (n.orientation.size() != n.location.size())
    throw InvalidArgument("internal node: orientation and location lengths differ");
  for (std::size_t k = 0; k < n.orientation.size(); ++k) {
    if (n.orientation[k] < 1 || n.orientation[k] > d) throw InvalidArgument("internal node: axis out of range");
    if (k > 0 && n.orientation[k] <= n.orientation[k - 1])
      throw InvalidArgument("internal node: orientation must be strictly increasing");
    if (n.location[k] != 0 && n.location[k] != 1) throw InvalidArgument("internal node: location must be binary");
  }
}

}  // namespace

std::vector<InternalNode> internal_nodes(int d) {
  if (d < 1 || d > 8) throw InvalidArgument("internal_nodes: need 1 <= d <= 8");
  std::vector<InternalNode> out;
  for (int r = 0; r <= d; ++r) {
    for (const auto& a : orientations(d, r)) {
      for (int loc = 0; loc < (1 << r); ++loc) {
        InternalNode n;
        n.orientation = a;
        for (int k = 0; k < r; ++k) n.location.push_back((loc >> k) & 1);
        out.push_back(std::move(n));
      }
    }
  }
  return out;
}

std::vector<MultiIndex> incident_children(const InternalNode& n, int d) {
  check_node(n, d);
  std::vector<MultiIndex> out;
  for (int c = 0; c < (1 << d); ++c) {
    MultiIndex i = child_tuple(c, d);
    bool ok = true;
    for (int k = 0; k < n.dim(); ++k)
      if (i[n.orientation[k] - 1] != n.location[k]) ok = false;
    if (ok) out.push_back(std::move(i));
  }
  return out;
}

int index_iota(const MultiIndex& j, int p_max) {
  if (p_max < 0) throw InvalidArgument("index_iota: negative p_max");
  long idx = 0;
  long radix = 1;
  for (int k = 0; k < j.dim(); ++k) {
    if (j[k] < 0 || j[k] > p_max)
      throw InvalidArgument("index_iota: component " + std::to_string(j[k]) + " outside 0.." + std::to_string(p_max));
    idx += radix * j[k];
    radix *= p_max + 1;
  }
  return static_cast<int>(idx + 1);
}

MultiIndex iota_inverse(int index, int dim, int p_max) {
  long total = ipow(p_max + 1, dim);
  if (index < 1 || index > total) throw InvalidArgument("iota_inverse: index out of range");
  MultiIndex j(dim);
  int rest = index - 1;
  for (int k = 0; k < dim; ++k) {
    j[k] = rest % (p_max + 1);
    rest /= p_max + 1;
  }
  return j;
}

int node_rank(const InternalNode& n, int d) {
  check_node(n, d);
  const int r = n.dim();
  const auto all = orientations(d, r);
  const auto it = std::find(all.begin(), all.end(), n.orientation);
  const long orient_rank = it - all.begin();
  long loc_rank = 0;
  for (int k = 0; k < r; ++k) loc_rank += static_cast<long>(n.location[k]) << k;
  return static_cast<int>(1 + (orient_rank << r) + loc_rank);
}

int hp_function_count(int d, int p_unif) {
  long total = 0;
  for (int r = 0; r <= d; ++r) total += binomial(d, r) * (1L << r) * ipow(p_unif - 1, r);
  return static_cast<int>(total);
}

int index_nu(const InternalNode& n, const MultiIndex& p, int p_unif, int d) {
  check_node(n, d);
  const int r = n.dim();
  if (p.dim() != r) throw InvalidArgument("index_nu: degree tuple length must equal node dimension");
  for (int k = 0; k < r; ++k)
    if (p[k] < 2 || p[k] > p_unif) throw InvalidArgument("index_nu: degree outside 2..p_unif");
  long offset = 0;
  for (int k = 0; k < r; ++k) offset += binomial(d, k) * (1L << k) * ipow(p_unif - 1, k);
  long idx = 1 + offset + static_cast<long>(node_rank(n, d) - 1) * ipow(p_unif - 1, r);
  for (int k = 0; k < r; ++k) idx += ipow(p_unif - 1, k) * (p[k] - 2);
  return static_cast<int>(idx);
}

// ---------------------------------------------------------------------------

Mesh Mesh::uniform(int dim, int cells_per_axis) {
  if (dim < 1 || dim > kMaxMeshDim) throw InvalidArgument("Mesh::uniform: dimension must be 1 or 2");
  if (cells_per_axis < 1) throw InvalidArgument("Mesh::uniform: need at least one cell per axis");
  Mesh m;
  m.dim_ = dim;
  m.n0_ = cells_per_axis;
  const int count = dim == 1 ? cells_per_axis : cells_per_axis * cells_per_axis;
  for (int c = 0; c < count; ++c) {
    Element e;
    e.id = c;
    e.level = 0;
    e.box.dim = dim;
    for (int k = 0; k < dim; ++k) {
      const int ik = k == 0 ? c % cells_per_axis : c / cells_per_axis;
      e.coords[k] = ik;
      e.box.lo[k] = static_cast<double>(ik) / cells_per_axis;
      e.box.hi[k] = static_cast<double>(ik + 1) / cells_per_axis;
    }
    m.elements_.push_back(e);
  }
  return m;
}

std::vector<int> Mesh::leaves() const {
  std::vector<int> out;
  for (const Element& e : elements_)
    if (e.is_leaf()) out.push_back(e.id);
  return out;
}

int Mesh::num_leaves() const {
  return static_cast<int>(std::count_if(elements_.begin(), elements_.end(),
                                        [](const Element& e) { return e.is_leaf(); }));
}

int Mesh::max_level() const noexcept {
  int bits = 0;
  while ((1LL << bits) < n0_) ++bits;
  return 62 - bits;
}

std::vector<int> Mesh::refine(int id) {
  if (id < 0 || id >= num_elements()) throw InvalidArgument("Mesh::refine: unknown element");
  if (!elements_[id].is_leaf()) throw InvalidArgument("Mesh::refine: element is not a leaf");
  if (elements_[id].level >= max_level()) throw InvalidArgument("Mesh::refine: element is at the deepest level");
  std::vector<int> kids;
  const Element parent = elements_[id];
  for (int c = 0; c < (1 << dim_); ++c) {
    Element e;
    e.id = num_elements();
    e.level = parent.level + 1;
    e.parent = id;
    e.box.dim = dim_;
    for (int k = 0; k < dim_; ++k) {
      const int ik = (c >> k) & 1;
      const double mid = 0.5 * (parent.box.lo[k] + parent.box.hi[k]);
      e.box.lo[k] = ik ? mid : parent.box.lo[k];
      e.box.hi[k] = ik ? parent.box.hi[k] : mid;
      e.coords[k] = 2 * parent.coords[k] + ik;
    }
    elements_.push_back(e);
    kids.push_back(e.id);
  }
  elements_[id].children = kids;
  return kids;
}

std::optional<int> Mesh::locate(const Point& x) const {
  for (int k = 0; k < dim_; ++k)
    if (x[k] < 0.0 || x[k] > 1.0) return std::nullopt;
  int root = 0;
  int stride = 1;
  for (int k = 0; k < dim_; ++k) {
    const int ik = std::min(n0_ - 1, static_cast<int>(std::floor(x[k] * n0_)));
    root += ik * stride;
    stride *= n0_;
  }
  int cur = root;
  while (!elements_[cur].is_leaf()) {
    const Element& e = elements_[cur];
    int flat = 0;
    for (int k = 0; k < dim_; ++k) {
      const double mid = 0.5 * (e.box.lo[k] + e.box.hi[k]);
      if (x[k] >= mid) flat |= 1 << k;
    }
    cur = e.children[flat];
  }
  return cur;
}

std::optional<int> Mesh::leaf_across(int leaf, int axis, int side, double along) const {
  const Element& e = element(leaf);
  Point probe{};
  const double w = e.box.width(axis);
  probe[axis] = side ? e.box.hi[axis] + 0.25 * w : e.box.lo[axis] - 0.25 * w;
  for (int k = 0; k < dim_; ++k)
    if (k != axis) probe[k] = e.box.lo[k] + along * e.box.width(k);
  return locate(probe);
}

std::vector<int> Mesh::irregular_leaves() const {
  std::set<int> bad;
  if (dim_ == 1) return {};
  for (const Element& e : elements_) {
    if (!e.is_leaf()) continue;
    for (int axis = 0; axis < dim_; ++axis)
      for (int side = 0; side < 2; ++side) {
        auto n = leaf_across(e.id, axis, side);
        if (n && element(*n).level < e.level - 1) bad.insert(*n);
      }
  }
  return {bad.begin(), bad.end()};
}

std::vector<int> close_one_irregular(Mesh& mesh, std::span<const int> /*newly_refined*/) {
  std::vector<int> extra;
  if (mesh.dim() == 1) return extra;
  // The whole leaf set is rescanned until a fixpoint; refinements only ever add finer
  // leaves next to the ones just created, so the loop terminates.
  while (true) {
    const std::vector<int> bad = mesh.irregular_leaves();
    if (bad.empty()) break;
    for (int id : bad) {
      if (!mesh.element(id).is_leaf()) continue;
      mesh.refine(id);
      extra.push_back(id);
    }
  }
  return extra;
}

void dump_mesh_jsonl(std::ostream& out, const Mesh& mesh, std::span<const int> degrees) {
  for (int id : mesh.leaves()) {
    const Element& e = mesh.element(id);
    nlohmann::json j;
    j["id"] = id;
    j["level"] = e.level;
    std::vector<double> lo(e.box.lo.begin(), e.box.lo.begin() + mesh.dim());
    std::vector<double> hi(e.box.hi.begin(), e.box.hi.begin() + mesh.dim());
    j["lo"] = lo;
    j["hi"] = hi;
    j["degree"] = static_cast<std::size_t>(id) < degrees.size() ? degrees[id] : 0;
    out << j.dump() << '\n';
  }
}

}  // namespace hpfem
