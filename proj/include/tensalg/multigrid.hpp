#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "tensalg/linear_map.hpp"
#include "tensalg/separable.hpp"
#include "tensalg/solvers.hpp"

namespace tensalg {

struct MultigridOptions {
  std::size_t pre_sweeps = 2;
  std::size_t post_sweeps = 2;
  /// Damped Jacobi weight. With `auto_omega` the weight on each scale is
  /// 4 / (3·λmax(D⁻¹A)), λmax estimated by power iteration; this equals 2/3
  /// for the Laplacian and keeps higher-order stencils stable.
  double omega = 2.0 / 3.0;
  bool auto_omega = false;
  /// 0: coarsen until some extent is ≤ 3.
  std::size_t max_levels = 0;
};

/// One scale of the hierarchy. Transfers are per-axis matrices in the order
/// of the operator axes; `restriction` maps the fine scale to this scale's
/// successor and `prolongation` maps back.
struct MultigridLevel {
  SeparableOperator system;
  DenseTensor inverse_diagonal;
  double omega = 2.0 / 3.0;
  std::vector<Eigen::MatrixXd> restriction;
  std::vector<Eigen::MatrixXd> prolongation;
};

class MultigridHierarchy {
 public:
  const std::vector<MultigridLevel>& levels() const noexcept { return levels_; }
  std::size_t size() const noexcept { return levels_.size(); }
  const MultigridLevel& level(std::size_t scale) const { return levels_.at(scale); }
  const MultigridOptions& options() const noexcept { return options_; }
  /// LU factors of the coarsest system.
  const Eigen::PartialPivLU<Eigen::MatrixXd>& coarse_solver() const { return *coarse_; }

 private:
  friend MultigridHierarchy build_hierarchy(const SeparableOperator&, const MultigridOptions&);

  std::vector<MultigridLevel> levels_;
  MultigridOptions options_;
  std::shared_ptr<const Eigen::PartialPivLU<Eigen::MatrixXd>> coarse_;
};

/// Fine-to-coarse full weighting [1/4, 1/2, 1/4] at even fine sites, for a
/// fine extent n and coarse extent (n+1)/2.
Eigen::MatrixXd full_weighting(std::size_t fine_extent);
/// Linear interpolation, 2·Rᵀ.
Eigen::MatrixXd linear_prolongation(std::size_t fine_extent);

/// Galerkin hierarchy: every term keeps its separable form with coarse factors
/// R·M·P (R·P on identity axes). Coarse scales use a registry with the same
/// space names and halved extents.
MultigridHierarchy build_hierarchy(const SeparableOperator& a, const MultigridOptions& options = {});

/// One V-cycle on `scale`; the last scale is solved directly.
DenseTensor tmg_vcycle(const MultigridHierarchy& h, std::size_t scale, DenseTensor u, const DenseTensor& b,
                       std::size_t pre_sweeps, std::size_t post_sweeps);

/// Repeated V-cycles from `u0` (zeros when omitted). Stops early, unconverged,
/// when ⟨R,R⟩ shrinks by less than 1% for three cycles in a row.
SolveResult tmg_solve(const MultigridHierarchy& h, const DenseTensor& b, const SolveOptions& options);
SolveResult tmg_solve(const MultigridHierarchy& h, const DenseTensor& b, const DenseTensor& u0,
                      const SolveOptions& options);

/// Moves `t` (laid out over the operator axes) to `registry` applying one
/// matrix per axis.
DenseTensor transfer(const DenseTensor& t, std::span<const Eigen::MatrixXd> per_axis, RegistryPtr registry);

/// Power-iteration estimate of the largest eigenvalue of D⁻¹A.
double estimate_jacobi_radius(const SeparableOperator& a, const DenseTensor& inverse_diagonal,
                              std::size_t iterations = 50);

}  // namespace tensalg
