#include "tensalg/multigrid.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "tensalg/error.hpp"

namespace tensalg {

Eigen::MatrixXd full_weighting(std::size_t fine_extent) {
  const auto n = static_cast<Eigen::Index>(fine_extent);
  const auto nc = (n + 1) / 2;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(nc, n);
  for (Eigen::Index i = 0; i < nc; ++i) {
    r(i, 2 * i) = 0.5;
    if (2 * i - 1 >= 0) r(i, 2 * i - 1) = 0.25;
    if (2 * i + 1 < n) r(i, 2 * i + 1) = 0.25;
  }
  return r;
}

Eigen::MatrixXd linear_prolongation(std::size_t fine_extent) {
  return 2.0 * full_weighting(fine_extent).transpose();
}

DenseTensor transfer(const DenseTensor& t, std::span<const Eigen::MatrixXd> per_axis, RegistryPtr registry) {
  if (per_axis.size() != t.order()) throw ShapeError("transfer needs one matrix per axis");
  auto dims = t.extents();
  std::vector<double> cur(t.data().begin(), t.data().end()), next;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    detail::mode_product(cur, dims, k, per_axis[k], next);
    dims[k] = static_cast<std::size_t>(per_axis[k].rows());
    std::swap(cur, next);
  }
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (registry->extent(t.indices()[k].space) != dims[k])
      throw ShapeError("transfer: target registry extent does not match the transferred axis");
  return DenseTensor::from_canonical(std::move(registry), t.indices(), std::move(cur));
}

double estimate_jacobi_radius(const SeparableOperator& a, const DenseTensor& inverse_diagonal,
                              std::size_t iterations) {
  std::mt19937_64 rng(0x5eed);
  std::vector<double> v0(a.size());
  for (auto& x : v0) x = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
  DenseTensor v = DenseTensor::from_canonical(a.registry(), a.input_spec(), std::move(v0));
  double lambda = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    const double norm = v.vec().norm();
    if (norm == 0.0) return 0.0;
    v.vec() /= norm;
    DenseTensor w = a.apply(v);
    w.vec().array() *= inverse_diagonal.vec().array();
    v = DenseTensor::from_canonical(a.registry(), a.input_spec(), std::move(w.storage()));
    lambda = v.vec().norm();
  }
  return lambda;
}

namespace {

RegistryPtr coarsen_registry(const SpaceRegistry& fine, const std::vector<SeparableAxis>& axes) {
  auto coarse = std::make_shared<SpaceRegistry>();
  for (std::size_t s = 0; s < fine.size(); ++s) {
    bool on_axis = false;
    for (const auto& a : axes) on_axis = on_axis || a.space == s;
    const auto n = fine.extent(s);
    coarse->define_space(fine.space(s).name, on_axis ? (n + 1) / 2 : n);
  }
  return coarse;
}

MultigridLevel make_level(SeparableOperator op, const MultigridOptions& options) {
  MultigridLevel level{std::move(op), {}, options.omega, {}, {}};
  level.inverse_diagonal = inverse_main_diagonal(LinearMap(level.system));
  if (options.auto_omega)
    level.omega = 4.0 / (3.0 * estimate_jacobi_radius(level.system, level.inverse_diagonal));
  return level;
}

}  // namespace

MultigridHierarchy build_hierarchy(const SeparableOperator& a, const MultigridOptions& options) {
  const auto& reg = *a.registry();
  for (const auto& ax : a.axes())
    if (reg.extent(ax.space) < 3)
      throw ShapeError("multigrid needs extents of at least 3; space '" + reg.space(ax.space).name + "' has " +
                       std::to_string(reg.extent(ax.space)));
  MultigridHierarchy h;
  h.options_ = options;
  h.levels_.push_back(make_level(a, options));
  for (;;) {
    auto& fine = h.levels_.back();
    const auto& fr = *fine.system.registry();
    bool coarsen = options.max_levels == 0 || h.levels_.size() < options.max_levels;
    for (const auto& ax : fine.system.axes()) coarsen = coarsen && fr.extent(ax.space) > 3;
    if (!coarsen) break;
    for (const auto& ax : fine.system.axes()) {
      fine.restriction.push_back(full_weighting(fr.extent(ax.space)));
      fine.prolongation.push_back(linear_prolongation(fr.extent(ax.space)));
    }
    SeparableOperator coarse(coarsen_registry(fr, fine.system.axes()), fine.system.axes());
    for (const auto& t : fine.system.terms()) {
      std::vector<Eigen::MatrixXd> f(t.factors.size());
      for (std::size_t k = 0; k < f.size(); ++k)
        f[k] = t.factors[k].size() ? Eigen::MatrixXd(fine.restriction[k] * t.factors[k] * fine.prolongation[k])
                                   : Eigen::MatrixXd(fine.restriction[k] * fine.prolongation[k]);
      coarse.add_term(t.weight, std::move(f));
    }
    h.levels_.push_back(make_level(std::move(coarse), options));
  }
  const auto& last = h.levels_.back().system;
  if (last.size() > kDirectSolveCap)
    throw SolverError("coarsest multigrid scale has " + std::to_string(last.size()) +
                      " unknowns, above the direct-solve cap");
  h.coarse_ = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXd>>(last.to_matrix());
  return h;
}

DenseTensor tmg_vcycle(const MultigridHierarchy& h, std::size_t scale, DenseTensor u, const DenseTensor& b,
                       std::size_t pre_sweeps, std::size_t post_sweeps) {
  if (scale >= h.size()) throw ShapeError("multigrid scale " + std::to_string(scale) + " does not exist");
  const auto& level = h.level(scale);
  const LinearMap a(level.system);
  if (!same_registry(b.registry(), a.registry()) || b.indices() != a.output_spec() ||
      !same_registry(u.registry(), a.registry()) || u.indices() != a.input_spec())
    throw ShapeError("multigrid scale " + std::to_string(scale) + ": operands do not match the scale's specs");
  if (scale + 1 == h.size()) {
    Eigen::VectorXd x = h.coarse_solver().solve(b.vec());
    return DenseTensor::from_canonical(a.registry(), a.input_spec(), {x.data(), x.data() + x.size()});
  }
  u = damped_jacobi_sweeps(a, level.inverse_diagonal, b, std::move(u), level.omega, pre_sweeps);
  const auto& coarse = h.level(scale + 1).system;
  DenseTensor rc = transfer(b - a.apply(u), level.restriction, coarse.registry());
  DenseTensor uc = tmg_vcycle(h, scale + 1, DenseTensor::zeros(coarse.registry(), coarse.input_spec()), rc,
                              pre_sweeps, post_sweeps);
  u = u + transfer(uc, level.prolongation, a.registry());
  return damped_jacobi_sweeps(a, level.inverse_diagonal, b, std::move(u), level.omega, post_sweeps);
}

SolveResult tmg_solve(const MultigridHierarchy& h, const DenseTensor& b, const SolveOptions& options) {
  const auto& top = h.level(0).system;
  return tmg_solve(h, b, DenseTensor::zeros(top.registry(), top.input_spec()), options);
}

SolveResult tmg_solve(const MultigridHierarchy& h, const DenseTensor& b, const DenseTensor& u0,
                      const SolveOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const LinearMap a(h.level(0).system);
  if (!same_registry(b.registry(), a.registry()) || b.indices() != a.output_spec())
    throw ShapeError("right-hand side '" + b.spec_string() + "' does not match system outputs '" +
                     print_index_spec(*a.registry(), a.output_spec()) + "'");
  if (!same_registry(u0.registry(), a.registry()) || u0.indices() != a.input_spec())
    throw ShapeError("initial guess '" + u0.spec_string() + "' does not match system inputs");
  SolveResult out{u0, {}};
  auto& rep = out.report;
  DenseTensor r = residual(a, out.solution, b);
  double rho = inner_product(r, r);
  rep.residual_history.push_back(rho);
  const double level = options.mode == ThresholdMode::relative ? options.threshold * rho : options.threshold;
  int stalled = 0;
  rep.message = "iteration limit reached";
  while (rho > level && rep.iterations < options.max_iterations) {
    out.solution = tmg_vcycle(h, 0, std::move(out.solution), b, h.options().pre_sweeps, h.options().post_sweeps);
    r = residual(a, out.solution, b);
    const double rho1 = inner_product(r, r);
    if (!std::isfinite(rho1))
      throw SolverError("multigrid diverged: non-finite residual at cycle " + std::to_string(rep.iterations + 1),
                        rep.iterations + 1);
    ++rep.iterations;
    rep.residual_history.push_back(rho1);
    stalled = rho1 > 0.99 * rho ? stalled + 1 : 0;
    rho = rho1;
    if (stalled >= 3 && rho > level) {
      rep.message = "stagnated";
      break;
    }
  }
  rep.converged = rho <= level;
  if (rep.converged) rep.message = "converged";
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace tensalg
