#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hpfem/mesh.hpp"
#include "hpfem/shape_basis.hpp"

namespace hpfem {

enum class DofKind { Vertex, EdgeMode, Interior };

const char* to_string(DofKind kind);

struct DofInfo {
  DofKind kind = DofKind::Vertex;
  int element = -1;  ///< owning leaf for interior modes, -1 otherwise
  int degree = 1;    ///< mode degree (edge), max tensor degree (interior), 1 for vertices
};

/// Restriction of the global basis to one leaf Q: phi_{dofs[r]}|_Q equals
/// sum_l coeffs(r, l) * psi_{iota^{-1}(l+1)} o F_Q^{-1}, frame degree p_frame.
struct ElementDofs {
  int p_frame = 0;
  std::vector<int> dofs;
  Eigen::MatrixXd coeffs;
};

struct SpaceOptions {
  bool dirichlet = true;  ///< homogeneous Dirichlet condition on the whole boundary
};

/// Conforming hp space on a 1-irregular mesh of [0,1]^d (d = 1, 2). Immutable once built.
class HpSpace {
 public:
  /// degrees are indexed by element id; only leaf entries are read (each >= 1).
  static HpSpace build(Mesh mesh, std::vector<int> degrees, SpaceOptions options = {});

  const Mesh& mesh() const noexcept { return mesh_; }
  int dim() const noexcept { return mesh_.dim(); }
  int num_dofs() const noexcept { return static_cast<int>(dofs_.size()); }
  const std::vector<DofInfo>& dofs() const noexcept { return dofs_; }
  const std::vector<int>& leaves() const noexcept { return leaves_; }
  const std::vector<int>& degrees() const noexcept { return degrees_; }
  int degree(int element) const { return degrees_.at(static_cast<std::size_t>(element)); }
  bool dirichlet() const noexcept { return options_.dirichlet; }

  /// Number of hanging vertices whose values are slaved to coarse edges.
  int num_hanging_vertices() const noexcept { return hanging_vertices_; }

  /// Expansion of the basis on a leaf in the frame of degree p_Q.
  const ElementDofs& element_dofs(int leaf) const;

  /// The same expansion re-indexed into a frame of degree p_frame >= p_Q.
  ElementDofs restriction(int leaf, int p_frame) const;

  /// Dense N x (p_frame+1)^d matrix C_Q; rows of dofs not supported on Q are zero.
  Eigen::MatrixXd restriction_matrix_CQ(int leaf, int p_frame) const;

  /// Global indices of the interior (bubble) modes of a leaf, ascending.
  std::vector<int> local_interior_indices(int leaf) const;

 private:
  void build_1d();
  void build_2d();

  Mesh mesh_;
  std::vector<int> degrees_;
  SpaceOptions options_;
  std::vector<int> leaves_;
  std::vector<DofInfo> dofs_;
  std::vector<ElementDofs> element_dofs_;  // by element id, empty for inner nodes
  int hanging_vertices_ = 0;
};

/// Frame coefficients of u on a leaf: w_l = sum_r u[dofs[r]] * C(r, l).
Eigen::VectorXd frame_coefficients(const ElementDofs& ed, const Eigen::VectorXd& u);

/// Splits u into (u_loc, u_tilde): u_loc keeps the interior modes of the leaf.
std::pair<Eigen::VectorXd, Eigen::VectorXd> project_local(const HpSpace& space, const Eigen::VectorXd& u,
                                                          int leaf);

struct FeValue {
  double value = 0.0;
  Point gradient{};
};

/// u and its physical gradient at F_Q(xhat).
FeValue eval_fe(const HpSpace& space, const Eigen::VectorXd& u, int leaf, std::span<const double> xhat);

/// Converts a frame coefficient vector between frame degrees (entries beyond the
/// smaller frame are dropped or zero-filled).
Eigen::VectorXd reframe(const Eigen::VectorXd& w, int dim, int from_degree, int to_degree);

/// Evaluates sum_l w_l psi_{iota^{-1}(l+1)}(xhat) and its reference gradient.
FeValue eval_frame(const Eigen::VectorXd& w, int dim, int p_frame, std::span<const double> xhat);

}  // namespace hpfem
