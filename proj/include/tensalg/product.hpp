#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tensalg/tensor.hpp"

namespace tensalg {

/// Generalized commutative tensor product.
///
/// Every index occurrence across all factors is grouped by (space, frame).
/// Within a group, occurrences of equal variance merge into one index
/// (elementwise / Khatri-Rao); a group that ends up holding both variances is
/// contracted once. Surviving groups form the result in canonical order, so
/// the value does not depend on the order of `factors`.
///
/// Evaluation is pairwise left to right; a contraction is deferred until no
/// later factor touches the group.
DenseTensor tensor_product(std::span<const DenseTensor> factors);
DenseTensor tensor_product(const std::vector<DenseTensor>& factors);
DenseTensor tensor_product(const DenseTensor& a, const DenseTensor& b);

/// Binary product; `a * b * c` contracts eagerly at each step, use
/// tensor_product({a, b, c}) when a group spans more than two factors.
DenseTensor operator*(const DenseTensor& a, const DenseTensor& b);

namespace detail {

inline constexpr std::uint8_t kUp = 1;
inline constexpr std::uint8_t kDown = 2;
inline constexpr std::uint8_t kBoth = kUp | kDown;

/// One loop variable of a product: all occurrences of a (space, frame) pair.
struct IndexGroup {
  std::size_t space = 0;
  std::uint32_t frame = 0;
  std::uint8_t mask = 0;  // variances seen so far
  std::size_t extent = 1;

  bool same_key(const IndexGroup& o) const noexcept {
    return space == o.space && frame == o.frame;
  }
  bool key_less(const IndexGroup& o) const noexcept {
    return space != o.space ? space < o.space : frame < o.frame;
  }
  bool operator==(const IndexGroup&) const = default;
};

/// Groups sorted by (space, frame).
using GroupList = std::vector<IndexGroup>;

GroupList groups_of(const SpaceRegistry& registry, const IndexSpec& spec);
std::size_t component_count(const GroupList& groups);

/// Sorted union; masks OR-ed.
GroupList join(const GroupList& a, const GroupList& b);

/// Tensor data laid out over groups, one axis per group. Leaves that need no
/// diagonal extraction borrow the tensor's storage.
class Operand {
 public:
  Operand() = default;
  Operand(GroupList groups, std::vector<double> values);
  Operand(GroupList groups, std::span<const double> borrowed);
  Operand(Operand&&) noexcept = default;
  Operand& operator=(Operand&&) noexcept = default;
  Operand(const Operand&) = delete;
  Operand& operator=(const Operand&) = delete;

  const GroupList& groups() const noexcept { return groups_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double> release();

 private:
  GroupList groups_;
  std::vector<double> owned_;
  std::span<const double> data_;
};

/// Operand view of a tensor; an index pair of one group inside the same
/// tensor (x^ and x_) is read along its diagonal.
Operand to_operand(const DenseTensor& t);

/// out[k] = sum over the joint iteration space of a·b, where k ranges over
/// `result` (a subset of join(a,b)); every other joint group is summed.
Operand contract(const Operand& a, const Operand& b, const GroupList& result);

/// Sums `a` down to the groups in `result`.
Operand reduce(const Operand& a, const GroupList& result);

DenseTensor to_tensor(RegistryPtr registry, Operand op);

/// Bookkeeping for a multi-factor product: which groups are contracted and
/// the result signature of any subset of factors.
class ProductContext {
 public:
  explicit ProductContext(std::vector<GroupList> leaves);

  std::size_t leaf_count() const noexcept { return leaves_.size(); }
  const GroupList& leaf(std::size_t i) const { return leaves_.at(i); }

  /// Groups carried by the partial product of the factors in `subset`
  /// (bit i = factor i): a group is summed out once it holds both variances
  /// across the whole product and no factor outside `subset` touches it.
  GroupList signature(std::uint64_t subset) const;

 private:
  std::vector<GroupList> leaves_;
  GroupList global_;
};

}  // namespace detail

}  // namespace tensalg
