// Experiment driver: runs the adaptive loop on one of the stock problems and writes the
// convergence history (CSV), a run report (JSON) and optional per-iteration mesh dumps.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "hpfem/adaptivity.hpp"
#include "hpfem/errors.hpp"
#include "hpfem/predictor.hpp"
#include "hpfem/problems.hpp"
#include "hpfem/report.hpp"

namespace {

constexpr int kExitFlags = 2;
constexpr int kExitSolver = 3;

std::string report_path_for(const std::string& csv) {
  std::filesystem::path p(csv);
  p.replace_extension(".report.json");
  return p.string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hp-adaptive FEM driven by predicted energy-error reductions"};
  std::string problem_name;
  double epsilon = 1e-5;
  hpfem::AdaptConfig config;
  std::string out_path;
  std::string report_path;
  std::string mesh_dir;
  std::string prediction_path;
  bool surplus = false;

  app.add_option("--problem", problem_name, "model problem")
      ->required()
      ->check(CLI::IsMember({"sp1d", "sing1d", "poisson2d"}));
  app.add_option("--epsilon", epsilon, "diffusion coefficient of sp1d")->check(CLI::PositiveNumber);
  app.add_option("--theta", config.theta, "Doerfler parameter in (0,1]")->check(CLI::Range(0.0, 1.0));
  app.add_option("--max-iter", config.max_iterations, "number of enrichment steps")->check(CLI::NonNegativeNumber);
  app.add_option("--max-dof", config.max_dofs, "stop before solving a space this large")->check(CLI::PositiveNumber);
  app.add_option("--p-cap", config.p_cap, "largest admissible element degree")
      ->check(CLI::Range(1, hpfem::kMaxDegree - 1));
  app.add_option("--out", out_path, "history CSV (stdout when omitted)");
  app.add_option("--report", report_path, "run report JSON (default: next to --out)");
  app.add_option("--dump-meshes", mesh_dir, "directory for per-iteration mesh JSON-lines");
  app.add_option("--dump-predictions", prediction_path, "CSV of every evaluated candidate");
  app.add_flag("--surplus", surplus, "predict p-enrichments with the hierarchical surplus only");
  app.add_option("--threads", config.threads, "prediction threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitFlags;
  }
  if (surplus) config.p_variant = hpfem::PVariant::Surplus;
  if (report_path.empty() && !out_path.empty()) report_path = report_path_for(out_path);

  hpfem::ProblemSpec problem;
  try {
    config.validate();
    problem = hpfem::make_problem(problem_name, epsilon);
    if (!mesh_dir.empty()) std::filesystem::create_directories(mesh_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n' << app.help();
    return kExitFlags;
  }

  std::ofstream predictions;
  if (!prediction_path.empty()) {
    predictions.open(prediction_path);
    predictions << "iter,element,candidate,delta_e_sq\n";
  }
  auto observer = [&](const hpfem::IterationRecord& rec, const hpfem::HpSpace& space, const Eigen::VectorXd&) {
    if (!mesh_dir.empty()) {
      char name[64];
      std::snprintf(name, sizeof name, "mesh_%03d.jsonl", rec.iter);
      std::ofstream f(std::filesystem::path(mesh_dir) / name);
      hpfem::dump_mesh_jsonl(f, space.mesh(), space.degrees());
    }
    if (predictions.is_open()) {
      predictions.precision(17);
      for (const auto& ch : rec.predictions)
        for (const auto& c : ch.candidates)
          predictions << rec.iter << ',' << ch.element << ',' << c.label << ',' << c.delta_e_sq << '\n';
    }
    std::cerr << "iter " << rec.iter << "  N=" << rec.n_dofs << "  error_sq=" << rec.error_sq
              << "  marked=" << rec.marked.size() << '\n';
  };

  hpfem::AdaptResult result;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    result = hpfem::adapt_loop(problem, config, observer);
  } catch (const hpfem::ConvergenceError& e) {
    std::cerr << "solver failure: " << e.what() << " (relative residual " << e.relative_residual() << ")\n";
    return kExitSolver;
  } catch (const hpfem::SingularSystemError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (out_path.empty()) {
    hpfem::write_history_csv(std::cout, result.history);
  } else {
    std::ofstream f(out_path);
    hpfem::write_history_csv(f, result.history);
  }
  if (!report_path.empty()) {
    hpfem::RunReport rep;
    rep.problem = problem.name;
    rep.config = {{"epsilon", epsilon},
                  {"theta", config.theta},
                  {"max_iter", config.max_iterations},
                  {"max_dof", config.max_dofs},
                  {"p_cap", config.p_cap},
                  {"p_variant", surplus ? "surplus" : "full"},
                  {"threads", config.threads}};
    rep.history = result.history;
    double solve = 0.0, predict = 0.0;
    for (const auto& r : result.history) {
      solve += r.solve_seconds;
      predict += r.predict_seconds;
    }
    rep.phase_seconds = {{"solve", solve}, {"predict", predict}, {"total", total}};
    std::ofstream f(report_path);
    f << hpfem::to_json(rep).dump(2) << '\n';
  }
  return 0;
}
