#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tensalg/error.hpp"
#include "tensalg/product.hpp"
#include "tensalg/tensor.hpp"

using namespace tensalg;

TEST_CASE("construction permutes user order into canonical order") {
  auto w = make_registry({{"X", 2}, {"Y", 3}});
  // values written as [y][x]
  std::vector<double> v{1, 2, 3, 4, 5, 6};
  DenseTensor t(w, "y_,x^", v);
  REQUIRE(t.spec_string() == "x^,y_");
  for (std::size_t y = 0; y < 3; ++y)
    for (std::size_t x = 0; x < 2; ++x) CHECK(t({x, y}) == v[y * 2 + x]);
}

TEST_CASE("scalars, zeros and shape checks") {
  auto w = make_registry({{"X", 2}});
  DenseTensor s(w, "", {7.0});
  CHECK(s.order() == 0);
  CHECK(s.value() == 7.0);
  DenseTensor z(w, "x^");
  CHECK(z.size() == 2);
  CHECK(max_abs(z) == 0.0);
  CHECK_THROWS_WITH_AS(DenseTensor(w, "x^", {1, 2, 3}), doctest::Contains("length mismatch"), ShapeError);
}

TEST_CASE("elementwise operations") {
  auto w = make_registry({{"X", 2}, {"Y", 2}});
  DenseTensor a(w, "x^", {1, 2}), b(w, "x^", {3, 4});
  CHECK(add(a, b) == DenseTensor(w, "x^", {4, 6}));
  CHECK(max_abs(scale(0.0, a)) == 0.0);
  CHECK(max_abs(subtract(a, a)) == 0.0);
  CHECK((2.0 * a) == DenseTensor(w, "x^", {2, 4}));
  CHECK((-a) == DenseTensor(w, "x^", {-1, -2}));
  DenseTensor c(w, "y^", {1, 1});
  try {
    add(a, c);
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("x^") != std::string::npos);
    CHECK(msg.find("y^") != std::string::npos);
  }
}

TEST_CASE("single-pair delta is the identity pattern") {
  auto w = make_registry({{"X", 3}});
  auto d = make_delta(w, {{up(0, 1), down(0, 0)}});
  REQUIRE(d.spec_string() == "x_,x^1");
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(d({i, j}) == (i == j ? 1.0 : 0.0));
  CHECK_THROWS_AS(make_delta(w, {{up(0, 1), up(0, 1)}}), ShapeError);
}

TEST_CASE("delta laws hold exactly") {
  auto w = make_registry({{"X", 3}, {"Y", 2}, {"Z", 4}});
  std::mt19937_64 rng(3);
  const auto t = oracle::random_tensor(w, {up(0), up(1), up(2)}, rng);

  // δ^{x1}_x · T^{xyz} relabels x.
  auto relabeled = tensor_product(make_delta(w, {{up(0, 1), down(0, 0)}}), t);
  CHECK(relabeled.indices() == IndexSpec{up(0, 1), up(1), up(2)});
  CHECK(std::equal(relabeled.data().begin(), relabeled.data().end(), t.data().begin()));

  // δ_{x1 x} lowers, δ^{x x1} raises back.
  auto lowered = tensor_product(make_delta(w, {{down(0, 1), down(0, 0)}}), t);
  CHECK(lowered.indices() == IndexSpec{down(0, 1), up(1), up(2)});
  auto raised = tensor_product(make_delta(w, {{up(0, 0), up(0, 1)}}), lowered);
  CHECK(raised == t);

  // δ^{x1y1z1}_{xyz} = δ^{x1}_x δ^{y1}_y δ^{z1}_z, and it is the identity map.
  auto multi = make_delta(w, IndexSpec{up(0, 1), up(1, 1), up(2, 1)}, IndexSpec{down(0), down(1), down(2)});
  auto factored = tensor_product(std::vector<DenseTensor>{make_delta(w, {{up(0, 1), down(0)}}),
                                                          make_delta(w, {{up(1, 1), down(1)}}),
                                                          make_delta(w, {{up(2, 1), down(2)}})});
  CHECK(multi == factored);
  auto moved = tensor_product(multi, t);
  CHECK(moved.indices() == IndexSpec{up(0, 1), up(1, 1), up(2, 1)});
  CHECK(std::equal(moved.data().begin(), moved.data().end(), t.data().begin()));
}

TEST_CASE("reindex equals multiplying by deltas") {
  auto w = make_registry({{"X", 3}, {"Y", 2}});
  std::mt19937_64 rng(5);
  const auto t = oracle::random_tensor(w, {up(0, 0), down(1, 0), up(1, 2)}, rng);
  auto fast = reindex(t, {up(0, 0), down(1, 0)}, {up(0, 4), down(1, 3)});
  auto slow = tensor_product(std::vector<DenseTensor>{make_delta(w, {{up(0, 4), down(0, 0)}}),
                                                      make_delta(w, {{down(1, 3), up(1, 0)}}), t});
  CHECK(fast == slow);
}

TEST_CASE("inner product") {
  auto w = make_registry({{"X", 2}, {"Y", 2}, {"Z", 2}});
  DenseTensor a(w, "x^", {3, 4});
  CHECK(inner_product(a, a) == 25.0);
  CHECK(inner_product(a, DenseTensor(w, "x^")) == 0.0);

  std::mt19937_64 rng(11);
  const IndexSpec spec{up(0), up(1), up(2)};
  const auto p = oracle::random_tensor(w, spec, rng);
  const auto q = oracle::random_tensor(w, spec, rng);
  double loop = 0.0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k) loop += p({i, j, k}) * q({i, j, k});
  const double via_deltas = inner_product_via_deltas(p, q);
  const double via_merge = inner_product_via_merge(p, q);
  CHECK(std::abs(via_deltas - loop) <= 1e-12 * std::abs(loop));
  CHECK(std::abs(via_merge - loop) <= 1e-12 * std::abs(loop));
  CHECK(std::abs(via_deltas - via_merge) <= 1e-12 * std::abs(loop));
  CHECK(inner_product(p, p) > 0.0);
  CHECK(inner_product(p - p, p - p) == 0.0);
}

TEST_CASE("inner product forms agree on random index lists") {
  std::mt19937_64 rng(404);
  int checked = 0;
  while (checked < 40) {
    auto w = make_registry({{"X", 1 + rng() % 3}, {"Y", 1 + rng() % 3}});
    const IndexSpec spec = canonical(oracle::random_spec(*w, 3, 2, rng));
    const auto a = oracle::random_tensor(w, spec, rng);
    const auto b = oracle::random_tensor(w, spec, rng);
    const bool paired = std::adjacent_find(spec.begin(), spec.end(), [](const TensorIndex& x, const TensorIndex& y) {
                          return x.same_group(y);
                        }) != spec.end();
    if (paired) {
      CHECK_THROWS_AS(inner_product_via_merge(a, b), ShapeError);
      continue;
    }
    const double ref = inner_product(a, b);
    CHECK(std::abs(inner_product_via_deltas(a, b) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    CHECK(std::abs(inner_product_via_merge(a, b) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    ++checked;
  }
}

TEST_CASE("derivative of a linear map is the map with moved frames") {
  auto w = make_registry({{"X", 3}, {"Y", 2}});
  auto lap = make_delta(w, {{up(0, 1), down(0, 0)}});
  const IndexSpec u{up(0, 0)};
  CHECK(derivative_of_linear_map(lap, u, {up(0, 2)}) == make_delta(w, {{up(0, 1), down(0, 2)}}));
  CHECK(derivative_of_linear_map(lap, u) == lap);
  CHECK_THROWS_AS(derivative_of_linear_map(lap, {up(1, 0)}), ShapeError);
}

TEST_CASE("derivative matches central differences") {
  auto w = make_registry({{"X", 3}, {"Y", 2}});
  std::mt19937_64 rng(17);
  const IndexSpec u_spec{up(0), up(1)};
  const IndexSpec out{up(0, 1), up(1, 1)};
  const auto a = oracle::random_tensor(w, {up(0, 1), up(1, 1), down(0), down(1)}, rng);
  const auto u = oracle::random_tensor(w, u_spec, rng);
  const auto d = derivative_of_linear_map(a, u_spec, {up(0, 2), up(1, 2)});
  const auto jac = matricize(d, out, {down(0, 2), down(1, 2)});
  const double h = 1e-4;
  for (std::size_t k = 0; k < u.size(); ++k) {
    DenseTensor plus = u, minus = u;
    plus.data()[k] += h;
    minus.data()[k] -= h;
    const auto fp = tensor_product(a, plus);
    const auto fm = tensor_product(a, minus);
    for (std::size_t i = 0; i < fp.size(); ++i)
      CHECK(std::abs((fp.data()[i] - fm.data()[i]) / (2 * h) - jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))) <= 1e-6);
  }
}

TEST_CASE("matricize and from_matrix are inverse") {
  auto w = make_registry({{"X", 2}, {"Y", 3}});
  std::mt19937_64 rng(2);
  const auto t = oracle::random_tensor(w, {up(0, 1), up(1, 1), down(0), down(1)}, rng);
  const IndexSpec rows{up(0, 1), up(1, 1)}, cols{down(0), down(1)};
  const auto m = matricize(t, rows, cols);
  CHECK(m.rows() == 6);
  CHECK(m(1 * 3 + 2, 0 * 3 + 1) == t({0, 1, 1, 2}));
  CHECK(from_matrix(w, rows, cols, m) == t);
}
