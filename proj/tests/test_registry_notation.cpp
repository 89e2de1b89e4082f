#include <doctest.h>

#include "tensalg/error.hpp"
#include "tensalg/index_notation.hpp"
#include "tensalg/space_registry.hpp"
#include "tensalg/tensor.hpp"

using namespace tensalg;

TEST_CASE("define_space keeps definition order") {
  SpaceRegistry w;
  w.define_space("X", 128).define_space("Y", 129).define_space("Z", 130);
  REQUIRE(w.size() == 3);
  CHECK(w.space(0) == Space{"X", 128});
  CHECK(w.space(1) == Space{"Y", 129});
  CHECK(w.space(2) == Space{"Z", 130});
  CHECK(w.canonical_rank("X") == 0);
  CHECK(w.canonical_rank("Y") == 1);
  CHECK(w.canonical_rank("Z") == 2);
}

TEST_CASE("single space of extent one") {
  SpaceRegistry w;
  w.define_space("W", 1);
  CHECK(w.size() == 1);
  CHECK(w.extent(0) == 1);
}

TEST_CASE("define_space rejections") {
  SpaceRegistry w{{"X", 4}};
  CHECK_THROWS_WITH_AS(w.define_space("X", 5), doctest::Contains("duplicate space"), Error);
  CHECK_THROWS_AS(w.define_space("Q", 0), Error);
  CHECK_THROWS_AS(w.define_space("9a", 2), Error);
  CHECK_THROWS_AS(w.define_space("", 2), Error);
  // Notation letters match names ignoring case, so X and x cannot coexist.
  CHECK_THROWS_WITH_AS(w.define_space("x", 2), doctest::Contains("duplicate space"), Error);
}

TEST_CASE("unknown space lookup names the space") {
  SpaceRegistry w{{"X", 2}, {"Y", 2}, {"Z", 2}};
  CHECK_THROWS_WITH_AS(w.canonical_rank("T"), doctest::Contains("unknown space 'T'"), Error);
  CHECK(w.find_notation("y") == 1);
  CHECK(w.find_notation("t") == SpaceRegistry::npos);
}

TEST_CASE("registry freezes once a tensor exists") {
  auto w = std::make_shared<SpaceRegistry>(SpaceRegistry{{"X", 2}});
  CHECK_FALSE(w->frozen());
  DenseTensor t(w, "x^");
  CHECK(w->frozen());
  CHECK_THROWS_AS(w->define_space("Y", 3), Error);
}

TEST_CASE("registries from the same calls are equal") {
  SpaceRegistry a, b;
  a.define_space("X", 3).define_space("Y", 4);
  b.define_space("X", 3).define_space("Y", 4);
  CHECK(a == b);
  b = SpaceRegistry{{"Y", 4}, {"X", 3}};
  CHECK_FALSE(a == b);
}

TEST_CASE("parse index specs") {
  SpaceRegistry w{{"X", 2}, {"Y", 2}, {"Z", 2}};
  CHECK(parse_index_spec(w, "x^1,x_") == IndexSpec{up(0, 1), down(0, 0)});
  CHECK(parse_index_spec(w, "x^1,y^1,z^1") == IndexSpec{up(0, 1), up(1, 1), up(2, 1)});
  CHECK(parse_index_spec(w, "  x^1 , y_12 ") == IndexSpec{up(0, 1), down(1, 12)});
  CHECK(parse_index_spec(w, "").empty());
  CHECK(parse_index_spec(w, "X^").front() == up(0, 0));
}

TEST_CASE("parse errors carry positions") {
  SpaceRegistry w{{"X", 2}, {"Y", 2}};
  auto position_of = [&](const char* text) {
    try {
      parse_index_spec(w, text);
    } catch (const ParseError& e) {
      return e.position();
    }
    return std::size_t(-1);
  };
  CHECK_THROWS_WITH_AS(parse_index_spec(w, "x^1,x^1"), doctest::Contains("duplicate index"), ParseError);
  CHECK(position_of("x^1,x^1") == 4);
  CHECK_THROWS_WITH_AS(parse_index_spec(w, "x^,q_"), doctest::Contains("unknown space"), ParseError);
  CHECK(position_of("x^,q_") == 3);
  CHECK_THROWS_AS(parse_index_spec(w, "x1"), ParseError);
  CHECK_THROWS_AS(parse_index_spec(w, "x^a"), ParseError);
  CHECK_THROWS_AS(parse_index_spec(w, "x^,,y^"), ParseError);
  CHECK_THROWS_AS(parse_index_spec(w, "^1"), ParseError);
}

TEST_CASE("print index specs") {
  SpaceRegistry w{{"X", 2}, {"Y", 2}, {"Z", 2}};
  CHECK(print_index_spec(w, {up(0, 1), down(0, 0)}) == "x^1,x_");
  CHECK(print_index_spec(w, {}) == "");
  CHECK(print_index_spec(w, {down(2, 2)}) == "z_2");
}

TEST_CASE("negate_spec flips every variance") {
  CHECK(negate_spec({up(0, 1)}) == IndexSpec{down(0, 1)});
  const IndexSpec s{down(0, 0), up(1, 2)};
  CHECK(negate_spec(s) == IndexSpec{up(0, 0), down(1, 2)});
  CHECK(negate_spec(negate_spec(s)) == s);
}

TEST_CASE("print and parse round-trip") {
  SpaceRegistry w{{"X", 2}, {"Y", 2}, {"Z", 2}};
  for (const char* text : {"x^1,x_,y^1,y_,z^1,z_", "z_7,x^", "y^10,y_10", ""}) {
    const auto spec = parse_index_spec(w, text);
    CHECK(print_index_spec(w, spec) == text);
    CHECK(parse_index_spec(w, print_index_spec(w, spec)) == spec);
  }
  CHECK(print_index_spec(w, parse_index_spec(w, " x^1 ,  y_ ")) == "x^1,y_");
}

TEST_CASE("canonical index order") {
  // space rank, then frame, then contravariant before covariant
  IndexSpec s{down(1, 0), up(0, 2), down(0, 1), up(0, 1)};
  CHECK(canonical(s) == IndexSpec{up(0, 1), down(0, 1), up(0, 2), down(1, 0)});
}
