#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tensalg/problem_config.hpp"
#include "tensalg/separable.hpp"
#include "tensalg/solvers.hpp"

namespace tensalg {

/// Scattered-data reconstruction: recover a smooth field on a grid from a
/// random subset of its samples by minimizing
///   Σ_samples (u - f)² + λ·‖L u‖²,  L the 2D Laplacian,
/// i.e. solving (S + λ·LᵀL) u = S f with S the sample mask.
struct ReconOptions {
  std::size_t grid = 33;
  std::size_t samples = 200;
  std::uint64_t seed = 1;
  double lambda = 1e-3;
  double threshold = 1e-8;  // relative to the initial residual
  std::size_t max_iterations = 5000;
};

struct ReconProblem {
  RegistryPtr registry;
  DenseTensor field;  // x^,y^
  std::vector<std::pair<std::size_t, std::size_t>> sample_points;  // sorted
  SeparableOperator system;                                        // x^ -> x^1, y^ -> y^1
  DenseTensor rhs;                                                 // x^1,y^1
};

ReconProblem make_recon_problem(const ReconOptions& options);

/// Outcome of one solver; `failure` holds the solver error when it threw.
struct ReconRun {
  SolverKind solver = SolverKind::tmg;
  SolveReport report;
  DenseTensor reconstruction;
  std::string failure;
};

ReconRun run_reconstruction(const ReconProblem& problem, SolverKind solver, const ReconOptions& options);

/// Plain (P2) graymap of an order-2 tensor, first axis as rows, scaled from
/// the tensor's minimum (black) to maximum (white).
std::string to_pgm(const DenseTensor& image);

}  // namespace tensalg
