#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tensalg/linear_map.hpp"
#include "tensalg/tensor.hpp"

namespace tensalg {

enum class ThresholdMode { absolute, relative };

struct SolveOptions {
  double threshold = 1.0e-4;
  /// relative: stop when ⟨R,R⟩ ≤ threshold·⟨R0,R0⟩.
  ThresholdMode mode = ThresholdMode::absolute;
  std::size_t max_iterations = 1000;
};

struct SolveReport {
  std::size_t iterations = 0;
  std::vector<double> residual_history;  // ⟨R,R⟩, initial residual first
  bool converged = false;
  double wall_time = 0.0;  // seconds
  std::string message;
};

struct SolveResult {
  DenseTensor solution;
  SolveReport report;
};

/// Largest flattened system accepted by direct_solve and invert.
inline constexpr std::size_t kDirectSolveCap = 4096;

/// Gaussian elimination with partial pivoting on the flattened system.
/// The solution carries the map's input spec.
DenseTensor direct_solve(const LinearMap& a, const DenseTensor& b, std::size_t cap = kDirectSolveCap);

/// direct_solve wrapped in a report: one iteration, history holding ⟨B,B⟩
/// and the final ⟨R,R⟩.
SolveResult solve_direct(const LinearMap& a, const DenseTensor& b);

/// Ã with Ã·A equal to the Kronecker delta. Ã maps A's outputs to fresh
/// frames of the input spaces (one past the largest frame A uses).
DenseTensor invert(const LinearMap& a, std::size_t cap = kDirectSolveCap);

/// U ← U − R·E with R = A·U − B and E the reciprocal main diagonal.
SolveResult jacobi(const LinearMap& a, const DenseTensor& b, const DenseTensor& u0,
                   const SolveOptions& options);
SolveResult jacobi(const LinearMap& a, const DenseTensor& b, const DenseTensor& u0, double threshold,
                   std::size_t max_iterations);

/// Runs `sweeps` steps of U ← U + ω·E·(B − A·U) without convergence checks.
DenseTensor damped_jacobi_sweeps(const LinearMap& a, const DenseTensor& inverse_diagonal,
                                 const DenseTensor& b, DenseTensor u, double omega, std::size_t sweeps);

/// Elementwise reciprocal of the main diagonal; throws on a zero entry.
DenseTensor inverse_main_diagonal(const LinearMap& a);

SolveResult conjugate_gradients(const LinearMap& a, const DenseTensor& b, const DenseTensor& u0,
                                const SolveOptions& options);
SolveResult conjugate_gradients(const LinearMap& a, const DenseTensor& b, const DenseTensor& u0,
                                double threshold, std::size_t max_iterations);

/// A·U − B.
DenseTensor residual(const LinearMap& a, const DenseTensor& u, const DenseTensor& b);

}  // namespace tensalg
