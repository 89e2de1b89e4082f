// Separate binary: links the allocation hook.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "alloc_hook.hpp"
#include "tensalg/multigrid.hpp"
#include "tensalg/separable.hpp"
#include "tensalg/solvers.hpp"

using namespace tensalg;

namespace {

constexpr std::size_t kN = 24;
constexpr std::size_t kUnknowns = kN * kN * kN;

struct Poisson {
  RegistryPtr w = make_registry({{"X", kN}, {"Y", kN}, {"Z", kN}});
  SeparableOperator op = scaled(-1.0, laplacian(w, "x^1,x_,y^1,y_,z^1,z_"));
  DenseTensor b = DenseTensor::constant(w, op.output_spec(), 1.0);
};

}  // namespace

TEST_CASE("hook sees large requests") {
  alloc_hook::start();
  std::vector<double> v(1000);
  alloc_hook::stop();
  CHECK(alloc_hook::largest() >= 1000 * sizeof(double));
}

TEST_CASE("separable apply stays within a few copies of the operand") {
  Poisson p;
  const auto u = DenseTensor::constant(p.w, p.op.input_spec(), 1.0);
  alloc_hook::start();
  const auto r = p.op.apply(u);
  alloc_hook::stop();
  CHECK(alloc_hook::largest() <= kUnknowns * sizeof(double));
  CHECK(r.size() == kUnknowns);
}

TEST_CASE("iterative solvers on a separable system never allocate a system-sized block") {
  Poisson p;
  const LinearMap a(p.op);
  for (int which = 0; which < 3; ++which) {
    CAPTURE(which);
    alloc_hook::start();
    SolveResult r;
    if (which == 0) r = conjugate_gradients(a, p.b, a.zero_input(), SolveOptions{1e-8, ThresholdMode::relative, 500});
    if (which == 1) r = jacobi(a, p.b, a.zero_input(), SolveOptions{1e-4, ThresholdMode::relative, 50});
    if (which == 2) r = tmg_solve(build_hierarchy(p.op), p.b, SolveOptions{1e-8, ThresholdMode::relative, 30});
    alloc_hook::stop();
    // the coarsest multigrid scale is factorized densely; it is tiny
    CHECK(alloc_hook::largest() <= kUnknowns * sizeof(double));
    CHECK(alloc_hook::largest() < kUnknowns * kUnknowns * sizeof(double));
  }
}
