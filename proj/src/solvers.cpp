#include "tensalg/solvers.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/LU>

#include "tensalg/error.hpp"

namespace tensalg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_rhs(const LinearMap& a, const DenseTensor& b) {
  if (!same_registry(b.registry(), a.registry()) || b.indices() != a.output_spec())
    throw ShapeError("right-hand side '" + b.spec_string() + "' does not match system outputs '" +
                     print_index_spec(*a.registry(), a.output_spec()) + "'");
}

void check_guess(const LinearMap& a, const DenseTensor& u) {
  if (!same_registry(u.registry(), a.registry()) || u.indices() != a.input_spec())
    throw ShapeError("initial guess '" + u.spec_string() + "' does not match system inputs '" +
                     print_index_spec(*a.registry(), a.input_spec()) + "'");
}

double stop_level(const SolveOptions& o, double rho0) {
  return o.mode == ThresholdMode::relative ? o.threshold * rho0 : o.threshold;
}

Eigen::PartialPivLU<Eigen::MatrixXd> factorize(const LinearMap& a, std::size_t cap) {
  const std::size_t n = a.size();
  if (n > cap)
    throw SolverError("direct solve of " + std::to_string(n) + " unknowns exceeds the cap of " +
                      std::to_string(cap));
  Eigen::MatrixXd m = a.to_matrix();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const Eigen::MatrixXd pm = lu.permutationP() * m;
  const auto& packed = lu.matrixLU();
  for (Eigen::Index k = 0; k < packed.rows(); ++k) {
    const double row_max = pm.row(k).cwiseAbs().maxCoeff();
    if (!(std::abs(packed(k, k)) >= 1e-12 * row_max) || row_max == 0.0)
      throw SolverError("singular system: pivot " + std::to_string(k) + " is negligible");
  }
  return lu;
}

}  // namespace

DenseTensor direct_solve(const LinearMap& a, const DenseTensor& b, std::size_t cap) {
  check_rhs(a, b);
  auto lu = factorize(a, cap);
  Eigen::VectorXd x = lu.solve(b.vec());
  return DenseTensor::from_canonical(a.registry(), a.input_spec(), {x.data(), x.data() + x.size()});
}

SolveResult solve_direct(const LinearMap& a, const DenseTensor& b) {
  const auto start = Clock::now();
  SolveResult r;
  r.solution = direct_solve(a, b);
  const DenseTensor res = residual(a, r.solution, b);
  r.report.iterations = 1;
  r.report.residual_history = {inner_product(b, b), inner_product(res, res)};
  r.report.converged = true;
  r.report.message = "converged";
  r.report.wall_time = seconds_since(start);
  return r;
}

DenseTensor invert(const LinearMap& a, std::size_t cap) {
  auto lu = factorize(a, cap);
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd inv = lu.solve(Eigen::MatrixXd::Identity(n, n));
  std::vector<std::uint32_t> next(a.registry()->size(), 0);
  for (const auto* spec : {&a.input_spec(), &a.output_spec()})
    for (const auto& i : *spec) next[i.space] = std::max(next[i.space], i.frame + 1);
  IndexSpec rows;
  for (const auto& i : a.input_spec()) rows.push_back(up(i.space, next[i.space]++));
  return from_matrix(a.registry(), rows, negate_spec(a.output_spec()), inv);
}

DenseTensor residual(const LinearMap& a, const DenseTensor& u, const DenseTensor& b) {
  return a.apply(u) - b;
}

DenseTensor inverse_main_diagonal(const LinearMap& a) {
  DenseTensor d = a.main_diagonal();
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (d.data()[k] == 0.0)
      throw SolverError("zero main-diagonal entry at flattened position " + std::to_string(k));
    d.data()[k] = 1.0 / d.data()[k];
  }
  return d;
}

DenseTensor damped_jacobi_sweeps(const LinearMap& a, const DenseTensor& inverse_diagonal,
                                 const DenseTensor& b, DenseTensor u, double omega, std::size_t sweeps) {
  for (std::size_t s = 0; s < sweeps; ++s) {
    DenseTensor r = b - a.apply(u);
    r.vec().array() *= omega * inverse_diagonal.vec().array();
    u = u + a.output_to_input(r);
  }
  return u;
}

SolveResult jacobi(const LinearMap& a, const DenseTensor& b, const DenseTensor& u0,
                   const SolveOptions& options) {
  const auto start = Clock::now();
  check_rhs(a, b);
  check_guess(a, u0);
  const DenseTensor e = inverse_main_diagonal(a);
  SolveResult out{u0, {}};
  auto& rep = out.report;
  double level = 0.0;
  for (;;) {
    DenseTensor r = residual(a, out.solution, b);
    const double rho = inner_product(r, r);
    if (!std::isfinite(rho))
      throw SolverError("jacobi diverged: non-finite residual after " + std::to_string(rep.iterations) +
                        " iterations",
                        rep.iterations);
    rep.residual_history.push_back(rho);
    if (rep.iterations == 0) level = stop_level(options, rho);
    if (rho <= level) {
      rep.converged = true;
      break;
    }
    if (rep.iterations >= options.max_iterations) break;
    r.vec().array() *= e.vec().array();
    out.solution = out.solution - a.output_to_input(r);
    ++rep.iterations;
  }
  rep.message = rep.converged ? "converged" : "iteration limit reached";
  rep.wall_time = seconds_since(start);
  return out;
}

SolveResult jacobi(const LinearMap& a, const DenseTensor& b, const DenseTensor& u0, double threshold,
                   std::size_t max_iterations) {
  return jacobi(a, b, u0, SolveOptions{threshold, ThresholdMode::absolute, max_iterations});
}

SolveResult conjugate_gradients(const LinearMap& a, const DenseTensor& b, const DenseTensor& u0,
                                const SolveOptions& options) {
  const auto start = Clock::now();
  check_rhs(a, b);
  check_guess(a, u0);
  SolveResult out{u0, {}};
  auto& rep = out.report;
  DenseTensor r = b - a.apply(out.solution);
  DenseTensor p = r;
  double rho = inner_product(r, r);
  rep.residual_history.push_back(rho);
  const double level = stop_level(options, rho);
  while (rho > level && rep.iterations < options.max_iterations) {
    const DenseTensor pd = a.output_to_input(p);
    const DenseTensor q = a.apply(pd);
    const double pq = inner_product(p, q);
    if (pq == 0.0) throw SolverError("conjugate gradients broke down: <P,Q> = 0", rep.iterations);
    const double alpha = rho / pq;
    out.solution.vec() += alpha * pd.vec();
    r.vec() -= alpha * q.vec();
    const double rho1 = inner_product(r, r);
    if (!std::isfinite(rho1))
      throw SolverError("conjugate gradients produced a non-finite residual at iteration " +
                        std::to_string(rep.iterations + 1),
                        rep.iterations + 1);
    p.vec() = r.vec() + (rho1 / rho) * p.vec();
    rho = rho1;
    ++rep.iterations;
    rep.residual_history.push_back(rho);
  }
  rep.converged = rho <= level;
  rep.message = rep.converged ? "converged" : "iteration limit reached";
  rep.wall_time = seconds_since(start);
  return out;
}

SolveResult conjugate_gradients(const LinearMap& a, const DenseTensor& b, const DenseTensor& u0,
                                double threshold, std::size_t max_iterations) {
  return conjugate_gradients(a, b, u0, SolveOptions{threshold, ThresholdMode::absolute, max_iterations});
}

}  // namespace tensalg
