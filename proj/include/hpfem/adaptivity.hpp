#pragma once

#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hpfem/fe_space.hpp"
#include "hpfem/mesh.hpp"
#include "hpfem/predictor.hpp"
#include "hpfem/problems.hpp"

namespace hpfem {

struct AdaptConfig {
  double theta = 0.5;
  int max_iterations = 30;
  int max_dofs = std::numeric_limits<int>::max();
  int p_cap = kMaxDegree - 1;
  PVariant p_variant = PVariant::Full;
  int threads = 1;

  void validate() const;  ///< throws InvalidArgument
};

struct IterationRecord {
  int iter = 0;
  int n_dofs = 0;
  int n_leaves = 0;
  double error_sq = std::numeric_limits<double>::quiet_NaN();  ///< NaN without exact reference
  double energy_sq = 0.0;                                        ///< ||u_W||^2
  double predicted_total = 0.0;                                  ///< sum of Delta e^2 over the marked set
  std::vector<int> marked;                                       ///< element ids, ascending
  std::vector<EnrichmentChoice> choices;                         ///< one per marked element
  std::vector<EnrichmentChoice> predictions;                     ///< one per leaf, leaf order
  double solve_seconds = 0.0;
  double predict_seconds = 0.0;
};

/// Minimal set of largest values whose sum reaches theta * total. Values <= 0 never
/// enter the set; ties are broken by ascending id. Returns ids in ascending order.
std::vector<int> doerfler_mark(const std::vector<std::pair<int, double>>& values, double theta);

struct MeshState {
  Mesh mesh;
  std::vector<int> degrees;  ///< by element id
};

/// p: degree + 1 (capped at p_cap); hp: midpoint refinement with the chosen child
/// degrees. Closure refinements (2D) give both children the parent's degree.
MeshState apply_enrichments(const Mesh& mesh, const std::vector<int>& degrees,
                            const std::vector<EnrichmentChoice>& choices, int p_cap);

struct AdaptResult {
  std::vector<IterationRecord> history;
  MeshState final_state;
};

/// Called after each recorded iteration with the space and solution of that iteration.
using IterationObserver =
    std::function<void(const IterationRecord&, const HpSpace&, const Eigen::VectorXd&)>;

/// Algorithm loop: solve, predict (in parallel), mark, enrich, until the iteration budget,
/// the DOF budget or an empty marking stops it.
AdaptResult adapt_loop(const ProblemSpec& problem, const AdaptConfig& config,
                       const IterationObserver& observer = {});

}  // namespace hpfem
