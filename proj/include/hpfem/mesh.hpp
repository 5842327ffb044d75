#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hpfem/shape_basis.hpp"

namespace hpfem {

/// Mesh storage supports d = 1 and d = 2; node combinatorics below work for d <= 8.
inline constexpr int kMaxMeshDim = 2;

using Point = std::array<double, kMaxMeshDim>;

/// Axis-parallel box; components beyond `dim` are ignored.
struct Box {
  int dim = 1;
  Point lo{};
  Point hi{};

  double volume() const;
  double width(int axis) const { return hi[axis] - lo[axis]; }
  bool contains(const Point& x, double tol = 0.0) const;
};

/// Corners of a transformed hexahedron; vertex index sum_k i_k 2^k for i in {0,1}^d.
struct ElementGeometry {
  int dim = 1;
  std::vector<Point> vertices;
};

ElementGeometry box_geometry(const Box& box);

struct MappedPoint {
  Point x{};
  Eigen::Matrix2d jacobian = Eigen::Matrix2d::Zero();  ///< leading dim x dim block used
  double det = 0.0;
};

/// Multilinear map F_Q(xhat) = sum_{|i|<=1} psi_i(xhat) v_i and its Jacobian.
MappedPoint element_map(const ElementGeometry& q, std::span<const double> xhat);

/// Sub-boxes of [-1,1]^d for the refinement with respect to z in (-1,1)^d,
/// ordered by flat child index sum_k i_k 2^k. Throws if z is not interior.
std::vector<Box> reference_children(int dim, std::span<const double> z);

/// Reference sub-box of one child i in {0,1}^d.
Box reference_child(const MultiIndex& child, std::span<const double> z);

/// Children T_i = F_Q(That_i), in flat child order.
std::vector<ElementGeometry> refine_element(const ElementGeometry& q, std::span<const double> z);

/// Flat index sum_k i_k 2^k of a binary child tuple, and its inverse.
int child_flat_index(const MultiIndex& child);
MultiIndex child_tuple(int flat, int dim);

// ---------------------------------------------------------------------------
// Internal nodes of a 2^d refinement.

struct InternalNode {
  std::vector<int> orientation;  ///< strictly increasing axes in 1..d
  std::vector<int> location;     ///< 0 = left of z, 1 = right of z, per oriented axis

  int dim() const noexcept { return static_cast<int>(orientation.size()); }
  friend bool operator==(const InternalNode&, const InternalNode&) = default;
};

/// All internal nodes, grouped by dimension r = 0..d; within a group in rank order
/// (orientation lexicographic, then location with the first entry fastest).
std::vector<InternalNode> internal_nodes(int d);

/// Children sharing node n: i_k = l_k on every oriented axis.
std::vector<MultiIndex> incident_children(const InternalNode& n, int d);

/// 1-based mixed-radix rank iota(j) = 1 + sum_k (p_max+1)^(k-1) j_k.
int index_iota(const MultiIndex& j, int p_max);
MultiIndex iota_inverse(int index, int dim, int p_max);

/// 1-based rank of n among the internal nodes of its dimension.
int node_rank(const InternalNode& n, int d);

/// Enumeration of hp-enrichment functions (n, p) for a uniform child degree p_unif.
int index_nu(const InternalNode& n, const MultiIndex& p, int p_unif, int d);

/// Total number of hp-enrichment functions for uniform p_unif: sum_r C(d,r) 2^r (p_unif-1)^r.
int hp_function_count(int d, int p_unif);

// ---------------------------------------------------------------------------
// Adaptive mesh of [0,1]^d built from a uniform root grid by midpoint bisection.

struct Element {
  int id = -1;
  int level = 0;
  Box box;
  std::array<std::int64_t, kMaxMeshDim> coords{};  ///< cell index on the level-`level` grid
  int parent = -1;
  std::vector<int> children;  ///< empty for leaves, else 2^d ids in flat child order

  bool is_leaf() const noexcept { return children.empty(); }
  ElementGeometry geometry() const { return box_geometry(box); }
};

class Mesh {
 public:
  /// cells_per_axis^d equal boxes on [0,1]^d.
  static Mesh uniform(int dim, int cells_per_axis);

  int dim() const noexcept { return dim_; }
  int root_cells_per_axis() const noexcept { return n0_; }
  /// Deepest admissible level: cell indices on the finest grid must fit in 62 bits.
  int max_level() const noexcept;
  int num_elements() const noexcept { return static_cast<int>(elements_.size()); }
  const Element& element(int id) const { return elements_.at(static_cast<std::size_t>(id)); }

  /// Leaf ids in increasing order.
  std::vector<int> leaves() const;
  int num_leaves() const;

  /// Midpoint refinement of a leaf; returns the 2^d child ids. Throws past max_level().
  std::vector<int> refine(int id);

  /// Leaf containing x (ties go to the right/upper cell). Nullopt outside [0,1]^d.
  std::optional<int> locate(const Point& x) const;

  /// Leaf across the face of `leaf` normal to `axis` on `side` (0 low, 1 high), probed at
  /// fraction `along` (d = 2) of the face and a quarter element width outside it.
  std::optional<int> leaf_across(int leaf, int axis, int side, double along = 0.5) const;

  /// Leaves whose faces touch leaves more than one level finer (empty when 1-irregular).
  std::vector<int> irregular_leaves() const;
  bool is_one_irregular() const { return irregular_leaves().empty(); }

 private:
  int dim_ = 1;
  int n0_ = 1;
  std::vector<Element> elements_;
};

/// Refines leaves until every face has at most one hanging level; returns the ids
/// refined in the process (in refinement order). No-op in 1D.
std::vector<int> close_one_irregular(Mesh& mesh, std::span<const int> newly_refined);

/// One JSON object per leaf: {"id","level","lo","hi","degree"}.
void dump_mesh_jsonl(std::ostream& out, const Mesh& mesh, std::span<const int> degrees);

}  // namespace hpfem
