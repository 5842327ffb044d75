#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "hpfem/adaptivity.hpp"
#include "hpfem/fe_space.hpp"

namespace hpfem {

/// Header `iter,N,error_sq,predicted_total,marked_count`; reals with 17 significant digits.
void write_history_csv(std::ostream& out, const std::vector<IterationRecord>& history);

/// {N, degrees: [{id, degree}...], dof_kinds: {vertex, edge, interior}}.
nlohmann::json space_summary(const HpSpace& space);

struct RunReport {
  std::string problem;
  nlohmann::json config;
  std::vector<IterationRecord> history;
  std::map<std::string, double> phase_seconds;
};

nlohmann::json to_json(const RunReport& report);

}  // namespace hpfem
