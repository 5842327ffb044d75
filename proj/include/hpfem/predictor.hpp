#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hpfem/assembly.hpp"
#include "hpfem/fe_space.hpp"
#include "hpfem/mesh.hpp"

namespace hpfem {

enum class EnrichmentKind { P, Hp };
enum class PVariant { Full, Surplus };

/// One candidate local refinement of a leaf Q: functions xi_1..xi_L written per child
/// (of the refinement of Q at z) as rows of D-matrices over the child frame.
struct EnrichmentCatalog {
  EnrichmentKind kind = EnrichmentKind::P;
  int element = -1;
  int dim = 1;
  int p_q = 1;
  int p_frame = 1;  ///< frame degree of the child functions
  std::vector<double> z;

  std::vector<MultiIndex> p_indices;  ///< p-kind: one tensor degree per function

  std::vector<int> child_degrees;  ///< hp-kind: degree of each child, flat child order
  struct HpFunction {
    InternalNode node;
    MultiIndex degrees;
  };
  std::vector<HpFunction> hp_functions;  ///< hp-kind: one (n, p) per function

  std::vector<Eigen::MatrixXd> d_matrices;  ///< per flat child index, L x (p_frame+1)^d

  int size() const { return static_cast<int>(d_matrices.empty() ? 0 : d_matrices.front().rows()); }
  std::string label() const;
};

/// p-enrichment of the leaf with degree p_q: full = {2..p_q+1}^d, surplus = those
/// tuples with some component equal to p_q+1.
EnrichmentCatalog build_p_catalog(int element, int dim, int p_q, PVariant variant = PVariant::Full);

/// hp-refinement at the midpoint with the given child degrees (flat child order).
EnrichmentCatalog build_hp_catalog(int element, int dim, const std::vector<int>& child_degrees);

/// Pointwise value and reference gradient of enrichment function `index` at xhat in
/// [-1,1]^d (reference coordinates of Q), evaluated from its definition.
TensorValue eval_enrichment(const EnrichmentCatalog& cat, int index, std::span<const double> xhat);

struct LocalSystem {
  double a00 = 0.0;
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  double delta = 0.0;
  Eigen::VectorXd rhs;  ///< b - c
  double u_loc_norm_sq = 0.0;
};

/// The bordered system for Y = span{u_tilde, xi_1..xi_L}; u is the current Galerkin
/// solution and global_energy_sq = ||u||^2.
LocalSystem assemble_local_system(const HpSpace& space, const Eigen::VectorXd& u, int leaf,
                                  const EnrichmentCatalog& cat, const ProblemForms& forms,
                                  double global_energy_sq);

struct Prediction {
  double delta_e_sq = 0.0;
  double eps = 0.0;
  Eigen::VectorXd y;
};

/// Solves the bordered system and returns Delta e^2. Throws DependentEnrichmentError
/// when the enrichment functions are (numerically) dependent.
Prediction predicted_reduction(const LocalSystem& sys);

struct PredictorConfig {
  PVariant p_variant = PVariant::Full;
  int p_cap = kMaxDegree - 1;
};

struct CandidateResult {
  EnrichmentKind kind = EnrichmentKind::P;
  std::vector<int> child_degrees;  ///< hp only
  std::string label;
  double delta_e_sq = 0.0;
  bool valid = false;  ///< false when discarded as dependent
};

struct EnrichmentChoice {
  int element = -1;
  EnrichmentKind kind = EnrichmentKind::P;
  std::vector<int> child_degrees;
  double delta_e_sq = 0.0;
  bool valid = false;  ///< false when no candidate survived
  std::vector<CandidateResult> candidates;
};

/// Competitive candidates of one leaf: the p-enrichment (unless p_Q = p_cap) and the
/// hp-refinements (1D: every (p0,p1) >= 1 with p0 + p1 = p_Q + 1; 2D: uniform p_Q), the
/// latter only while the leaf is above the mesh's deepest level.
/// Ties favour p, then the lexicographically smallest child-degree tuple.
EnrichmentChoice best_enrichment(const HpSpace& space, const Eigen::VectorXd& u, int leaf, const ProblemForms& forms,
                                 double global_energy_sq, const PredictorConfig& config);

/// CSV rows "element,candidate,delta_e_sq" for every evaluated candidate.
void write_prediction_csv(std::ostream& out, const std::vector<EnrichmentChoice>& choices, bool header = true);

}  // namespace hpfem
