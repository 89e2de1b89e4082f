#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "tensalg/linear_map.hpp"
#include "tensalg/solvers.hpp"

namespace tensalg {

enum class OperatorKind { laplacian, convolution, dense };
enum class SolverKind { direct, jacobi, cg, tmg };

/// Solve problem description. Line based, `key value...`, '#' comments:
///
///   space X 16
///   operator laplacian            (or: convolution 1 2 1 / dense system.tensor)
///   spec x^1,x_,y^1,y_            (optional; default pairs frame 1 with frame 0)
///   rhs rhs.tensor
///   solver cg                     (direct | jacobi | cg | tmg)
///   threshold 1e-10
///   threshold_mode relative       (absolute | relative)
///   max_iterations 500
///   pre_sweeps 2
///   post_sweeps 2
///   output solution.tensor
///
/// Relative paths are resolved against the config file's directory.
struct ProblemConfig {
  std::filesystem::path source;
  std::vector<Space> spaces;
  OperatorKind op = OperatorKind::laplacian;
  std::vector<double> kernel;
  std::filesystem::path dense_path;
  std::string spec;
  std::filesystem::path rhs_path;
  SolverKind solver = SolverKind::jacobi;
  SolveOptions options;  // threshold defaults to 1e-4
  std::size_t pre_sweeps = 2;
  std::size_t post_sweeps = 2;
  std::filesystem::path output_path;
};

ProblemConfig parse_problem_config(std::istream& in, const std::filesystem::path& source);
ProblemConfig load_problem_config(const std::filesystem::path& path);

const char* solver_name(SolverKind kind);

/// System and right-hand side ready for a solver. The Laplacian path is
/// negated (system and right-hand side) so that it is positive definite.
struct Problem {
  RegistryPtr registry;
  LinearMap system;
  DenseTensor rhs;
  bool negated = false;
};

Problem assemble_problem(const ProblemConfig& config);

/// Runs the configured solver from a zero initial guess.
SolveResult solve_problem(const Problem& problem, const ProblemConfig& config);

}  // namespace tensalg
