#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tensalg/space_registry.hpp"

namespace tensalg {

enum class Variance : std::uint8_t { contravariant = 0, covariant = 1 };

inline Variance flip(Variance v) noexcept {
  return v == Variance::contravariant ? Variance::covariant : Variance::contravariant;
}

/// One tensor index: a space (by canonical rank), a coordinate-frame label and
/// a variance. The defaulted ordering is the canonical index order: space rank,
/// then frame, then contravariant before covariant.
struct TensorIndex {
  std::size_t space = 0;
  std::uint32_t frame = 0;
  Variance variance = Variance::contravariant;

  auto operator<=>(const TensorIndex&) const = default;

  TensorIndex flipped() const noexcept { return {space, frame, flip(variance)}; }
  bool same_group(const TensorIndex& o) const noexcept {
    return space == o.space && frame == o.frame;
  }
  bool contracts_with(const TensorIndex& o) const noexcept {
    return same_group(o) && variance != o.variance;
  }
};

inline TensorIndex up(std::size_t space, std::uint32_t frame = 0) {
  return {space, frame, Variance::contravariant};
}
inline TensorIndex down(std::size_t space, std::uint32_t frame = 0) {
  return {space, frame, Variance::covariant};
}

/// Index list in the order the user wrote it.
using IndexSpec = std::vector<TensorIndex>;

/// Parses `x^1,x_,y^` style specs. Tokens are `<space>('^'|'_')[frame]`,
/// space letters match registered names ignoring case, a missing frame is 0.
/// Throws ParseError carrying the character offset of the offending token.
IndexSpec parse_index_spec(const SpaceRegistry& registry, std::string_view text);

/// Inverse of parse_index_spec; frame 0 prints without a label.
std::string print_index_spec(const SpaceRegistry& registry, const IndexSpec& spec);

/// Flips every variance. Frames and spaces are kept.
IndexSpec negate_spec(IndexSpec spec);

/// Canonically sorted copy.
IndexSpec canonical(IndexSpec spec);

/// Throws ShapeError on a repeated (space, frame, variance) triple.
void check_no_duplicates(const IndexSpec& spec);

}  // namespace tensalg
