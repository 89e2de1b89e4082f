#pragma once

#include <atomic>
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tensalg {

struct Space {
  std::string name;
  std::size_t extent;

  bool operator==(const Space&) const = default;
};

/// Ordered set of named vector spaces. The definition order is the canonical
/// index order of every tensor built against the registry, which is what makes
/// the tensor product commutative. Once a tensor has been constructed the
/// registry is frozen and further definitions are rejected.
class SpaceRegistry {
 public:
  SpaceRegistry() = default;
  SpaceRegistry(std::initializer_list<std::pair<std::string, std::size_t>> spaces);

  SpaceRegistry(const SpaceRegistry& other) : spaces_(other.spaces_) {}
  SpaceRegistry& operator=(const SpaceRegistry& other);

  /// Appends a space at the end of the order. Names must match
  /// `[A-Za-z][A-Za-z0-9]*` and be unique ignoring case.
  SpaceRegistry& define_space(std::string_view name, std::size_t extent);

  /// 0-based position of `name` in the definition order (exact match).
  std::size_t canonical_rank(std::string_view name) const;

  /// Case-insensitive lookup used by the index notation. Returns npos when absent.
  std::size_t find_notation(std::string_view letters) const noexcept;

  const Space& space(std::size_t rank) const { return spaces_.at(rank); }
  std::size_t extent(std::size_t rank) const { return spaces_.at(rank).extent; }
  const std::vector<Space>& spaces() const noexcept { return spaces_; }
  std::size_t size() const noexcept { return spaces_.size(); }

  bool frozen() const noexcept { return frozen_.load(std::memory_order_acquire); }
  void freeze() const noexcept { frozen_.store(true, std::memory_order_release); }

  /// Structural equality: same names and extents in the same order.
  bool operator==(const SpaceRegistry& other) const { return spaces_ == other.spaces_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<Space> spaces_;
  mutable std::atomic<bool> frozen_{false};
};

using RegistryPtr = std::shared_ptr<const SpaceRegistry>;

RegistryPtr make_registry(std::initializer_list<std::pair<std::string, std::size_t>> spaces);

inline bool same_registry(const RegistryPtr& a, const RegistryPtr& b) {
  return a == b || (a && b && *a == *b);
}

}  // namespace tensalg
