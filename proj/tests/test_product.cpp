#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "tensalg/error.hpp"
#include "tensalg/product.hpp"

using namespace tensalg;

TEST_CASE("matrix-vector contraction") {
  auto w = make_registry({{"X", 2}});
  DenseTensor a(w, "x^1,x_", {1, 2, 3, 4});
  DenseTensor t(w, "x^", {5, 6});
  CHECK(tensor_product(a, t) == DenseTensor(w, "x^1", {17, 39}));
  CHECK(tensor_product(t, a) == DenseTensor(w, "x^1", {17, 39}));
}

TEST_CASE("shared contravariant index merges") {
  auto w = make_registry({{"I", 2}, {"X", 2}, {"Y", 2}});
  DenseTensor a = DenseTensor::constant(w, parse_index_spec(*w, "i^,x_"), 1.0);
  DenseTensor b = DenseTensor::constant(w, parse_index_spec(*w, "i^,y_"), 1.0);
  auto h = tensor_product(a, b);
  CHECK(h.spec_string() == "i^,x_,y_");
  CHECK(h == DenseTensor::constant(w, h.indices(), 1.0));
}

TEST_CASE("index pair inside one tensor is traced") {
  auto w = make_registry({{"X", 3}});
  DenseTensor a(w, "x^,x_", {1, 2, 3, 4, 5, 6, 7, 8, 9});
  auto tr = tensor_product(std::vector<DenseTensor>{a});
  CHECK(tr.order() == 0);
  CHECK(tr.value() == 15.0);
}

TEST_CASE("five-factor product with a shared index") {
  // R_yz = sum_i sum_x A[i,x] D[x,i] B[i,y] P[i,z] W[i]
  auto w = make_registry({{"I", 2}, {"X", 2}, {"Y", 2}, {"Z", 2}});
  std::mt19937_64 rng(23);
  auto a = oracle::random_tensor(w, parse_index_spec(*w, "i^,x_"), rng);
  auto d = oracle::random_tensor(w, parse_index_spec(*w, "x^,i^"), rng);
  auto b = oracle::random_tensor(w, parse_index_spec(*w, "i^,y_"), rng);
  auto p = oracle::random_tensor(w, parse_index_spec(*w, "i^,z_"), rng);
  auto wt = oracle::random_tensor(w, parse_index_spec(*w, "i_"), rng);
  auto r = tensor_product(std::vector<DenseTensor>{a, d, b, p, wt});
  REQUIRE(r.spec_string() == "y_,z_");
  for (std::size_t y = 0; y < 2; ++y)
    for (std::size_t z = 0; z < 2; ++z) {
      double s = 0.0;
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t x = 0; x < 2; ++x)
          s += a({i, x}) * d({i, x}) * b({i, y}) * p({i, z}) * wt({i});
      CHECK(r({y, z}) == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("random products match the brute-force evaluator") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 120; ++trial) {
    auto w = make_registry({{"X", 1 + rng() % 4}, {"Y", 1 + rng() % 4}, {"Z", 1 + rng() % 4}});
    const std::size_t k = 1 + rng() % 4;
    std::vector<DenseTensor> f;
    for (std::size_t i = 0; i < k; ++i) f.push_back(oracle::random_tensor(w, oracle::random_spec(*w, 3, 2, rng), rng));
    CHECK(oracle::relative(tensor_product(f), oracle::brute_force_product(f)) <= 1e-12);
  }
}

TEST_CASE("all factor orders agree") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    auto w = make_registry({{"X", 2 + rng() % 3}, {"Y", 2 + rng() % 3}});
    std::vector<DenseTensor> f;
    for (int i = 0; i < 4; ++i) f.push_back(oracle::random_tensor(w, oracle::random_spec(*w, 3, 2, rng), rng));
    const auto ref = tensor_product(f);
    std::vector<std::size_t> perm{0, 1, 2, 3};
    while (std::next_permutation(perm.begin(), perm.end())) {
      std::vector<DenseTensor> g;
      for (auto p : perm) g.push_back(f[p]);
      CHECK(oracle::relative(tensor_product(g), ref) <= 1e-12);
    }
  }
}

TEST_CASE("product is multilinear") {
  auto w = make_registry({{"X", 3}, {"Y", 2}});
  std::mt19937_64 rng(9);
  const auto a = oracle::random_tensor(w, parse_index_spec(*w, "x^1,x_,y^"), rng);
  const auto u = oracle::random_tensor(w, parse_index_spec(*w, "x^,y_"), rng);
  const auto v = oracle::random_tensor(w, parse_index_spec(*w, "x^,y_"), rng);
  CHECK(oracle::relative(tensor_product(a, u + v), tensor_product(a, u) + tensor_product(a, v)) <= 1e-12);
  CHECK(oracle::relative(tensor_product(a, 2.5 * u), 2.5 * tensor_product(a, u)) <= 1e-12);
}

TEST_CASE("factors must share a registry") {
  auto w1 = make_registry({{"X", 2}});
  auto w2 = make_registry({{"X", 3}});
  CHECK_THROWS_AS(tensor_product(DenseTensor(w1, "x^"), DenseTensor(w2, "x_")), ShapeError);
}
