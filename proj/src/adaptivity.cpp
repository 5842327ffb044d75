#include "hpfem/adaptivity.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "hpfem/assembly.hpp"
#include "hpfem/errors.hpp"
#include "hpfem/linear_solvers.hpp"

namespace hpfem {

void AdaptConfig::validate() const {
  if (!(theta > 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in (0, 1]");
  if (max_iterations < 0) throw InvalidArgument("max_iterations must be nonnegative");
  if (max_dofs < 1) throw InvalidArgument("max_dofs must be positive");
  if (p_cap < 1 || p_cap > kMaxDegree - 1)
    throw InvalidArgument("p_cap must lie in 1.." + std::to_string(kMaxDegree - 1));
  if (threads < 1) throw InvalidArgument("threads must be positive");
}

std::vector<int> doerfler_mark(const std::vector<std::pair<int, double>>& values, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw InvalidArgument("doerfler_mark: theta must lie in (0, 1]");
  std::vector<std::pair<int, double>> pos;
  for (const auto& [id, v] : values) {
    if (!std::isfinite(v)) throw InvalidArgument("doerfler_mark: non-finite value");
    if (v > 0.0) pos.emplace_back(id, v);
  }
  std::sort(pos.begin(), pos.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  double total = 0.0;
  for (const auto& e : pos) total += e.second;
  std::vector<int> marked;
  double acc = 0.0;
  for (const auto& [id, v] : pos) {
    if (acc >= theta * total) break;
    marked.push_back(id);
    acc += v;
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

MeshState apply_enrichments(const Mesh& mesh, const std::vector<int>& degrees,
                            const std::vector<EnrichmentChoice>& choices, int p_cap) {
  MeshState st{mesh, degrees};
  std::vector<const EnrichmentChoice*> order;
  for (const auto& c : choices) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->element < b->element; });
  std::vector<int> refined;
  for (const EnrichmentChoice* c : order) {
    if (!c->valid) continue;
    if (!st.mesh.element(c->element).is_leaf()) throw InvalidArgument("apply_enrichments: element is not a leaf");
    if (c->kind == EnrichmentKind::P) {
      int& p = st.degrees[static_cast<std::size_t>(c->element)];
      p = std::min(p + 1, p_cap);
    } else {
      const std::vector<int> kids = st.mesh.refine(c->element);
      if (c->child_degrees.size() != kids.size())
        throw InvalidArgument("apply_enrichments: child degree count does not match the refinement");
      st.degrees.resize(static_cast<std::size_t>(st.mesh.num_elements()), 0);
      for (std::size_t k = 0; k < kids.size(); ++k) st.degrees[static_cast<std::size_t>(kids[k])] = c->child_degrees[k];
      refined.push_back(c->element);
    }
  }
  const std::size_t before = static_cast<std::size_t>(st.mesh.num_elements());
  close_one_irregular(st.mesh, refined);
  st.degrees.resize(static_cast<std::size_t>(st.mesh.num_elements()), 0);
  // Closure children are created in refinement order, so parents are set before children.
  for (std::size_t id = before; id < st.degrees.size(); ++id) {
    const int parent = st.mesh.element(static_cast<int>(id)).parent;
    st.degrees[id] = st.degrees[static_cast<std::size_t>(parent)];
  }
  return st;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

AdaptResult adapt_loop(const ProblemSpec& problem, const AdaptConfig& config, const IterationObserver& observer) {
  config.validate();
  AdaptResult result;
  MeshState state{problem.mesh, problem.degrees};
  PredictorConfig pconf{config.p_variant, config.p_cap};
  for (int n = 0;; ++n) {
    const HpSpace space = HpSpace::build(state.mesh, state.degrees, problem.space_options);
    if (space.num_dofs() >= config.max_dofs) break;

    IterationRecord rec;
    rec.iter = n;
    rec.n_dofs = space.num_dofs();
    rec.n_leaves = static_cast<int>(space.leaves().size());
    auto t0 = Clock::now();
    const GlobalSystem sys = assemble_global(space, problem.forms, config.threads);
    Eigen::VectorXd u;
    try {
      u = solve_spd(sys.A, sys.b);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(std::string(e.what()) + " (iteration " + std::to_string(n) + ")", e.relative_residual(),
                             e.iterations());
    } catch (const SingularSystemError& e) {
      throw SingularSystemError(std::string(e.what()) + " (iteration " + std::to_string(n) + ")", e.pivot_index(),
                                e.pivot());
    }
    rec.energy_sq = galerkin_energy_sq(sys, u);
    if (problem.energy_sq) rec.error_sq = exact_error_from_energy(problem, rec.energy_sq);
    rec.solve_seconds = seconds_since(t0);

    if (n == config.max_iterations) {
      result.history.push_back(rec);
      if (observer) observer(result.history.back(), space, u);
      break;
    }

    t0 = Clock::now();
    const std::vector<int>& leaves = space.leaves();
    std::vector<EnrichmentChoice> choices(leaves.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
      try {
        for (std::size_t k = next++; k < leaves.size() && !failed; k = next++)
          choices[k] = best_enrichment(space, u, leaves[k], problem.forms, rec.energy_sq, pconf);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    };
    if (config.threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < config.threads; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    rec.predict_seconds = seconds_since(t0);

    std::vector<std::pair<int, double>> values;
    for (const auto& c : choices)
      if (c.valid) values.emplace_back(c.element, std::max(0.0, c.delta_e_sq));
    rec.marked = doerfler_mark(values, config.theta);
    for (const auto& c : choices)
      if (std::binary_search(rec.marked.begin(), rec.marked.end(), c.element)) {
        rec.predicted_total += c.delta_e_sq;
        rec.choices.push_back(c);
      }
    rec.predictions = std::move(choices);
    result.history.push_back(rec);
    if (observer) observer(result.history.back(), space, u);
    if (rec.marked.empty()) break;
    state = apply_enrichments(state.mesh, state.degrees, rec.choices, config.p_cap);
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace hpfem
