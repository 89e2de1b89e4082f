#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tensalg/error.hpp"
#include "tensalg/expression_file.hpp"
#include "tensalg/planner.hpp"
#include "tensalg/problem_config.hpp"
#include "tensalg/recon_demo.hpp"
#include "tensalg/tensor_io.hpp"

namespace fs = std::filesystem;
using namespace tensalg;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNotConverged = 2;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

void require_writable_dir(const fs::path& file) {
  const auto dir = file.parent_path().empty() ? fs::path(".") : file.parent_path();
  if (!fs::is_directory(dir)) throw Error("output directory '" + dir.string() + "' does not exist");
}

void print_history(const SolveReport& rep) {
  std::cout << "iteration residual\n";
  for (std::size_t i = 0; i < rep.residual_history.size(); ++i)
    std::cout << i << ' ' << sci(rep.residual_history[i]) << '\n';
}

std::string history_file(const SolveReport& rep) {
  std::ostringstream os;
  os << "# iteration rr\n";
  for (std::size_t i = 0; i < rep.residual_history.size(); ++i)
    os << i << ' ' << format_double(rep.residual_history[i]) << '\n';
  return os.str();
}

int cmd_solve(const fs::path& config_path, const std::optional<fs::path>& history,
              std::optional<double> threshold, bool relative) {
  ProblemConfig cfg;
  std::optional<Problem> problem;
  try {
    cfg = load_problem_config(config_path);
    if (threshold) cfg.options.threshold = *threshold;
    if (relative) cfg.options.mode = ThresholdMode::relative;
    problem.emplace(assemble_problem(cfg));
    require_writable_dir(cfg.output_path);
    if (history) require_writable_dir(*history);
  } catch (const std::exception& e) {
    std::cerr << "error: " << config_path.string() << ": " << e.what() << '\n';
    return kInputError;
  }

  SolveResult result;
  try {
    result = solve_problem(*problem, cfg);
  } catch (const SolverError& e) {
    std::cerr << "error: " << config_path.string() << ": solver " << solver_name(cfg.solver) << ": " << e.what()
              << '\n';
    return kNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << config_path.string() << ": " << e.what() << '\n';
    return kInputError;
  }

  const auto& rep = result.report;
  std::cout << "solver " << solver_name(cfg.solver) << '\n';
  std::cout << "unknowns " << problem->system.size() << '\n';
  print_history(rep);
  std::cout << "status " << (rep.converged ? "converged" : "not converged") << " after " << rep.iterations
            << " iterations (" << rep.message << ")\n";
  std::cerr << "wall time " << rep.wall_time << " s\n";
  try {
    write_tensor(cfg.output_path, result.solution);
    std::cout << "solution " << cfg.output_path.string() << '\n';
    if (history) write_file_atomically(*history, history_file(rep));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return rep.converged ? kOk : kNotConverged;
}

DenseTensor random_factor(const RegistryPtr& registry, const FactorSignature& sig, std::mt19937_64& rng) {
  std::vector<double> v(extent_product(*registry, sig.indices));
  for (auto& x : v) x = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  return DenseTensor::from_canonical(registry, sig.indices, std::move(v));
}

int cmd_bench(const fs::path& expr_path, bool execute_plans, std::uint64_t seed) {
  ExpressionFile expr;
  try {
    expr = load_expression(expr_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  if (expr.factors.size() == 1) {
    std::cout << "nothing to plan\n";
    return kOk;
  }
  ContractionPlan best, naive;
  try {
    best = plan(expr.factors);
    naive = left_to_right_plan(expr.factors);
  } catch (const std::exception& e) {
    std::cerr << "error: " << expr_path.string() << ": " << e.what() << '\n';
    return kInputError;
  }
  std::cout << "optimal " << best.expression() << '\n';
  std::cout << "  total_flops " << best.total_flops() << " peak_components " << best.peak_components() << '\n';
  std::cout << "left-to-right " << naive.expression() << '\n';
  std::cout << "  total_flops " << naive.total_flops() << " peak_components " << naive.peak_components() << '\n';
  char ratio[32];
  std::snprintf(ratio, sizeof ratio, "%.4f",
                static_cast<double>(naive.total_flops()) / static_cast<double>(best.total_flops()));
  std::cout << "speedup " << ratio << "\n\n";
  std::cout << "[optimal]\n" << cost_report(best, *expr.registry);
  std::cout << "[left-to-right]\n" << cost_report(naive, *expr.registry);

  if (!execute_plans) return kOk;
  std::mt19937_64 rng(seed);
  std::vector<DenseTensor> factors;
  for (const auto& f : expr.factors) factors.push_back(random_factor(expr.registry, f, rng));
  const auto t0 = std::chrono::steady_clock::now();
  const DenseTensor a = execute(best, factors);
  const auto t1 = std::chrono::steady_clock::now();
  const DenseTensor b = execute(naive, factors);
  const auto t2 = std::chrono::steady_clock::now();
  const double rel = relative_difference(a, b);
  std::cout << "\nexecute seed " << seed << '\n';
  std::cout << "max_abs_discrepancy " << sci(max_abs_diff(a, b)) << '\n';
  std::cout << "relative_discrepancy " << sci(rel) << (rel <= 1e-12 ? " ok" : " FAIL") << '\n';
  std::cerr << "optimal " << std::chrono::duration<double>(t1 - t0).count() << " s, left-to-right "
            << std::chrono::duration<double>(t2 - t1).count() << " s\n";
  return rel <= 1e-12 ? kOk : kNotConverged;
}

int cmd_demo(const ReconOptions& opts, const std::string& solver, const fs::path& output, bool compare) {
  ReconProblem problem;
  std::vector<SolverKind> solvers;
  try {
    if (compare) {
      solvers = {SolverKind::jacobi, SolverKind::cg, SolverKind::tmg};
    } else if (solver == "jacobi") {
      solvers = {SolverKind::jacobi};
    } else if (solver == "cg") {
      solvers = {SolverKind::cg};
    } else if (solver == "tmg") {
      solvers = {SolverKind::tmg};
    } else {
      throw Error("unknown solver '" + solver + "' (jacobi, cg, tmg)");
    }
    require_writable_dir(output);
    problem = make_recon_problem(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }

  std::cout << "grid " << opts.grid << "x" << opts.grid << " samples " << opts.samples << " seed " << opts.seed
            << " lambda " << format_double(opts.lambda) << " threshold " << format_double(opts.threshold)
            << " (relative)\n";
  std::cout << "solver iterations converged final_rr max_error\n";
  const ReconRun* written = nullptr;
  std::vector<ReconRun> runs;
  for (auto s : solvers) runs.push_back(run_reconstruction(problem, s, opts));
  for (const auto& r : runs) {
    std::cout << solver_name(r.solver) << ' ' << r.report.iterations << ' ' << (r.report.converged ? "yes" : "no")
              << ' ';
    if (r.failure.empty()) {
      std::cout << sci(r.report.residual_history.back()) << ' '
                << sci(max_abs_diff(r.reconstruction, problem.field)) << '\n';
      if (!written || r.solver == SolverKind::tmg) written = &r;
    } else {
      std::cout << "- - (" << r.failure << ")\n";
    }
    std::cerr << solver_name(r.solver) << " wall time " << r.report.wall_time << " s\n";
  }
  if (!written) return kNotConverged;
  try {
    auto tensor_path = output;
    tensor_path += ".tensor";
    auto pgm_path = output;
    pgm_path += ".pgm";
    write_tensor(tensor_path, written->reconstruction);
    write_file_atomically(pgm_path, to_pgm(written->reconstruction));
    std::cout << "reconstruction (" << solver_name(written->solver) << ") " << tensor_path.string() << ' '
              << pgm_path.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return written->report.converged ? kOk : kNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tensalg: named-index tensor algebra tools"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "Solve a tensor equation described by a problem config");
  std::string config;
  std::string history;
  double threshold = 0.0;
  bool relative = false;
  solve->add_option("config", config, "Problem config file")->required();
  auto* history_opt = solve->add_option("--history", history, "Write iteration/residual pairs here");
  auto* threshold_opt = solve->add_option("--threshold", threshold, "Override the convergence threshold");
  solve->add_flag("--relative", relative, "Threshold relative to the initial residual");

  auto* bench = app.add_subcommand("bench-contraction", "Plan a multi-factor product and report costs");
  std::string expr;
  bool execute_plans = false;
  std::uint64_t seed = 1;
  bench->add_option("expression", expr, "Expression file")->required();
  auto* execute_flag = bench->add_flag("--execute", execute_plans, "Run both plans on random data");
  bench->add_option("--random-seed", seed, "Seed for --execute")->needs(execute_flag);

  auto* demo = app.add_subcommand("demo-recon", "Scattered-data reconstruction demo");
  ReconOptions ropts;
  std::string solver = "tmg";
  std::string output = "recon";
  bool compare = false;
  demo->add_option("--grid", ropts.grid, "Grid size per dimension")->check(CLI::Range(3, 1025));
  demo->add_option("--samples", ropts.samples, "Number of sampled points");
  demo->add_option("--seed", ropts.seed, "Sampling seed");
  demo->add_option("--solver", solver, "jacobi, cg or tmg");
  demo->add_option("--lambda", ropts.lambda, "Regularization weight");
  demo->add_option("--threshold", ropts.threshold, "Relative residual threshold");
  demo->add_option("--max-iterations", ropts.max_iterations, "Iteration or cycle limit");
  demo->add_option("--output", output, "Output prefix for .tensor and .pgm files");
  demo->add_flag("--compare", compare, "Run jacobi, cg and tmg side by side");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  if (*solve)
    return cmd_solve(config, *history_opt ? std::optional<fs::path>(history) : std::nullopt,
                     *threshold_opt ? std::optional<double>(threshold) : std::nullopt, relative);
  if (*bench) return cmd_bench(expr, execute_plans, seed);
  return cmd_demo(ropts, solver, output, compare);
}
