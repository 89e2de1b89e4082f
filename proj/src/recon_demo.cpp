#include "tensalg/recon_demo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "tensalg/error.hpp"
#include "tensalg/multigrid.hpp"

namespace tensalg {

namespace {

// Combination of discrete sine modes; all vanish on the ghost boundary.
double smooth_field(std::size_t x, std::size_t y, std::size_t n) {
  const double h = std::numbers::pi / static_cast<double>(n + 1);
  const double a = static_cast<double>(x + 1) * h;
  const double b = static_cast<double>(y + 1) * h;
  return std::sin(a) * std::sin(b) + 0.5 * std::sin(2 * a) * std::sin(3 * b) -
         0.25 * std::sin(3 * a) * std::sin(b);
}

}  // namespace

ReconProblem make_recon_problem(const ReconOptions& o) {
  if (o.grid < 3) throw Error("grid must be at least 3");
  if (o.samples == 0 || o.samples > o.grid * o.grid)
    throw Error("sample count must lie in [1, " + std::to_string(o.grid * o.grid) + "]");
  if (!(o.lambda > 0.0)) throw Error("lambda must be positive");
  const std::size_t n = o.grid;
  auto reg = make_registry({{"X", n}, {"Y", n}});

  std::vector<double> f(n * n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) f[x * n + y] = smooth_field(x, y, n);
  DenseTensor field(reg, "x^,y^", f);

  // Partial Fisher-Yates over flat cell positions.
  std::mt19937_64 rng(o.seed);
  std::vector<std::size_t> cells(n * n);
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = i;
  for (std::size_t i = 0; i < o.samples; ++i) std::swap(cells[i], cells[i + rng() % (cells.size() - i)]);
  std::vector<std::size_t> picked(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(o.samples));
  std::sort(picked.begin(), picked.end());

  SeparableOperator lap = laplacian(reg, "x^1,x_,y^1,y_");
  SeparableOperator system = scaled(o.lambda, gram(lap));
  std::vector<std::pair<std::size_t, std::size_t>> points;
  std::vector<double> b(n * n, 0.0);
  // One rank-1 term per sampled row: e_x e_xᵀ ⊗ diag(mask of sampled y).
  for (std::size_t i = 0; i < picked.size();) {
    const std::size_t x = picked[i] / n;
    Eigen::MatrixXd row = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::MatrixXd mask = row;
    row(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) = 1.0;
    for (; i < picked.size() && picked[i] / n == x; ++i) {
      const std::size_t y = picked[i] % n;
      mask(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(y)) = 1.0;
      points.emplace_back(x, y);
      b[x * n + y] = f[x * n + y];
    }
    system.add_term(1.0, {row, mask});
  }
  DenseTensor rhs(reg, "x^1,y^1", b);
  return {reg, std::move(field), std::move(points), std::move(system), std::move(rhs)};
}

ReconRun run_reconstruction(const ReconProblem& p, SolverKind solver, const ReconOptions& o) {
  ReconRun run;
  run.solver = solver;
  const LinearMap a(p.system);
  const SolveOptions opts{o.threshold, ThresholdMode::relative, o.max_iterations};
  const DenseTensor u0 = a.zero_input();
  const auto start = std::chrono::steady_clock::now();
  try {
    SolveResult r;
    switch (solver) {
      case SolverKind::jacobi: r = jacobi(a, p.rhs, u0, opts); break;
      case SolverKind::cg: r = conjugate_gradients(a, p.rhs, u0, opts); break;
      case SolverKind::tmg: {
        MultigridOptions mg;
        mg.auto_omega = true;
        r = tmg_solve(build_hierarchy(p.system, mg), p.rhs, u0, opts);
        break;
      }
      case SolverKind::direct: r = solve_direct(a, p.rhs); break;
    }
    run.report = std::move(r.report);
    run.reconstruction = std::move(r.solution);
  } catch (const SolverError& e) {
    run.failure = e.what();
    run.report.iterations = e.iteration();
    run.report.converged = false;
    run.report.message = e.what();
    run.report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return run;
}

std::string to_pgm(const DenseTensor& image) {
  if (image.order() != 2) throw ShapeError("graymap needs an order-2 tensor, got '" + image.spec_string() + "'");
  const auto ext = image.extents();
  const auto d = image.data();
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  const double span = *hi - *lo;
  std::ostringstream os;
  os << "P2\n" << ext[1] << ' ' << ext[0] << "\n255\n";
  for (std::size_t r = 0; r < ext[0]; ++r) {
    for (std::size_t c = 0; c < ext[1]; ++c) {
      const double v = span > 0 ? (d[r * ext[1] + c] - *lo) / span : 0.0;
      os << (c ? " " : "") << static_cast<int>(std::lround(255.0 * v));
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace tensalg
