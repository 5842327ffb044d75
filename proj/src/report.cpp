#include "hpfem/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace hpfem {

namespace {

std::string real17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json real_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

void write_history_csv(std::ostream& out, const std::vector<IterationRecord>& history) {
  out << "iter,N,error_sq,predicted_total,marked_count\n";
  for (const IterationRecord& r : history)
    out << r.iter << ',' << r.n_dofs << ',' << real17(r.error_sq) << ',' << real17(r.predicted_total) << ','
        << r.marked.size() << '\n';
}

nlohmann::json space_summary(const HpSpace& space) {
  nlohmann::json j;
  j["N"] = space.num_dofs();
  nlohmann::json degs = nlohmann::json::array();
  for (int id : space.leaves()) degs.push_back({{"id", id}, {"degree", space.degree(id)}});
  j["degrees"] = degs;
  std::map<std::string, int> kinds{{"vertex", 0}, {"edge", 0}, {"interior", 0}};
  for (const DofInfo& d : space.dofs()) ++kinds[to_string(d.kind)];
  j["dof_kinds"] = kinds;
  return j;
}

nlohmann::json to_json(const RunReport& report) {
  nlohmann::json j;
  j["problem"] = report.problem;
  j["config"] = report.config;
  nlohmann::json iters = nlohmann::json::array();
  for (const IterationRecord& r : report.history) {
    nlohmann::json it;
    it["iter"] = r.iter;
    it["N"] = r.n_dofs;
    it["leaves"] = r.n_leaves;
    it["error_sq"] = real_or_null(r.error_sq);
    it["energy_sq"] = r.energy_sq;
    it["predicted_total"] = r.predicted_total;
    it["marked"] = r.marked;
    nlohmann::json ch = nlohmann::json::array();
    for (const EnrichmentChoice& c : r.choices) {
      nlohmann::json cj;
      cj["element"] = c.element;
      cj["kind"] = c.kind == EnrichmentKind::P ? "p" : "hp";
      if (c.kind == EnrichmentKind::Hp) cj["child_degrees"] = c.child_degrees;
      cj["delta_e_sq"] = c.delta_e_sq;
      ch.push_back(cj);
    }
    it["choices"] = ch;
    it["solve_seconds"] = r.solve_seconds;
    it["predict_seconds"] = r.predict_seconds;
    iters.push_back(it);
  }
  j["iterations"] = iters;
  j["phase_seconds"] = report.phase_seconds;
  return j;
}

}  // namespace hpfem
