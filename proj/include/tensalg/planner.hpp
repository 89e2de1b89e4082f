#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tensalg/product.hpp"
#include "tensalg/tensor.hpp"

namespace tensalg {

/// Shape-only description of a product factor.
struct FactorSignature {
  std::string name;
  IndexSpec indices;  // canonical
  detail::GroupList groups;

  static FactorSignature of(const SpaceRegistry& registry, const IndexSpec& spec,
                            std::string name = {});
  static FactorSignature of(const DenseTensor& t, std::string name = {});
};

struct PlanNode {
  static constexpr std::size_t none = static_cast<std::size_t>(-1);

  std::size_t left = none;   // child node ids, internal nodes only
  std::size_t right = none;
  std::size_t leaf = none;   // factor position, leaves only
  std::uint64_t subset = 0;  // factors covered, bit i = factor i
  detail::GroupList signature;
  std::uint64_t flops = 0;       // one multiply-add per joint iteration point
  std::uint64_t components = 0;  // size of this node's result

  bool is_leaf() const noexcept { return leaf != none; }
};

/// How a plan's order was chosen: scored against every tree, greedily, or
/// taken as given (from_path).
enum class PlanMode { exhaustive, heuristic, fixed };

/// Binary evaluation tree over a multi-factor product. Nodes are stored in
/// execution order (children before parents, root last).
class ContractionPlan {
 public:
  ContractionPlan() = default;

  /// Plan from a contraction path: each step combines positions (i, j) of
  /// the current operand list, removes both and appends the result.
  static ContractionPlan from_path(std::vector<FactorSignature> factors,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& path);

  const std::vector<FactorSignature>& factors() const noexcept { return factors_; }
  const std::vector<PlanNode>& nodes() const noexcept { return nodes_; }
  const PlanNode& root() const { return nodes_.back(); }
  std::size_t factor_count() const noexcept { return factors_.size(); }

  std::uint64_t total_flops() const noexcept { return total_flops_; }
  /// Largest sum of live intermediate components over the execution order.
  std::uint64_t peak_components() const noexcept { return peak_components_; }
  PlanMode mode() const noexcept { return mode_; }
  bool heuristic() const noexcept { return mode_ == PlanMode::heuristic; }

  /// In-order factor positions; within a node the child holding the smaller
  /// factor position comes first.
  std::vector<std::size_t> leaf_order() const;

  /// Parenthesized form such as `C·(B·(A·T))`. Leaves use factor names, or
  /// `F<i>` when unnamed.
  std::string expression() const;

 private:
  friend class PlanBuilder;

  void finalize();

  std::vector<FactorSignature> factors_;
  std::vector<PlanNode> nodes_;
  std::uint64_t total_flops_ = 0;
  std::uint64_t peak_components_ = 0;
  PlanMode mode_ = PlanMode::exhaustive;
};

struct PlannerOptions {
  std::size_t max_factors = 12;
  std::size_t exhaustive_limit = 8;
  bool allow_heuristic = true;
};

/// Cheapest evaluation order. Up to `exhaustive_limit` factors every binary
/// tree is scored (flops, then peak components, then leaf order); above it a
/// greedy cheapest-pair heuristic is used and the plan is flagged.
ContractionPlan plan(std::vector<FactorSignature> factors, const PlannerOptions& options = {});

/// ((F0·F1)·F2)·... reference order.
ContractionPlan left_to_right_plan(std::vector<FactorSignature> factors);

struct ExecutionStats {
  std::uint64_t peak_components = 0;
};

/// Evaluates `plan` on concrete factors, freeing each intermediate once consumed.
DenseTensor execute(const ContractionPlan& plan, std::span<const DenseTensor> factors,
                    ExecutionStats* stats = nullptr);

/// Human-readable header followed by one `node ...` line per node and the
/// `total_flops` / `peak_components` totals.
std::string cost_report(const ContractionPlan& plan, const SpaceRegistry& registry);

/// Plans and executes a product with the optimal order.
DenseTensor planned_product(std::span<const DenseTensor> factors);

}  // namespace tensalg
