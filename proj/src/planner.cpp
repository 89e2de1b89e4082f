#include "tensalg/planner.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <limits>
#include <memory>
#include <sstream>

#include "tensalg/error.hpp"

namespace tensalg {

using detail::GroupList;

FactorSignature FactorSignature::of(const SpaceRegistry& registry, const IndexSpec& spec,
                                    std::string name) {
  check_no_duplicates(spec);
  return {std::move(name), canonical(spec), detail::groups_of(registry, spec)};
}

FactorSignature FactorSignature::of(const DenseTensor& t, std::string name) {
  return of(*t.registry(), t.indices(), std::move(name));
}

namespace {

std::uint64_t bit(std::size_t i) { return std::uint64_t{1} << i; }

std::size_t min_leaf(std::uint64_t subset) { return static_cast<std::size_t>(std::countr_zero(subset)); }

}  // namespace

class PlanBuilder {
 public:
  explicit PlanBuilder(std::vector<FactorSignature> factors) {
    plan_.factors_ = std::move(factors);
    if (plan_.factors_.empty()) throw ShapeError("cannot plan an empty product");
    std::vector<GroupList> leaves;
    for (const auto& f : plan_.factors_) leaves.push_back(f.groups);
    ctx_ = std::make_unique<detail::ProductContext>(std::move(leaves));
    for (std::size_t i = 0; i < plan_.factors_.size(); ++i) {
      PlanNode n;
      n.leaf = i;
      n.subset = bit(i);
      n.signature = ctx_->signature(n.subset);
      n.components = detail::component_count(n.signature);
      plan_.nodes_.push_back(std::move(n));
    }
  }

  const detail::ProductContext& context() const { return *ctx_; }
  std::size_t factor_count() const { return plan_.factors_.size(); }

  std::uint64_t pair_cost(std::size_t a, std::size_t b) const {
    return detail::component_count(detail::join(plan_.nodes_[a].signature, plan_.nodes_[b].signature));
  }

  std::size_t combine(std::size_t a, std::size_t b) {
    PlanNode n;
    if (min_leaf(plan_.nodes_[b].subset) < min_leaf(plan_.nodes_[a].subset)) std::swap(a, b);
    n.left = a;
    n.right = b;
    n.subset = plan_.nodes_[a].subset | plan_.nodes_[b].subset;
    n.flops = pair_cost(a, b);
    n.signature = ctx_->signature(n.subset);
    n.components = detail::component_count(n.signature);
    plan_.nodes_.push_back(std::move(n));
    return plan_.nodes_.size() - 1;
  }

  const PlanNode& node(std::size_t id) const { return plan_.nodes_[id]; }

  ContractionPlan finish(PlanMode mode) {
    plan_.mode_ = mode;
    plan_.finalize();
    return std::move(plan_);
  }

 private:
  ContractionPlan plan_;
  std::unique_ptr<detail::ProductContext> ctx_;
};

void ContractionPlan::finalize() {
  total_flops_ = 0;
  peak_components_ = 0;
  std::uint64_t live = 0;
  for (const auto& n : nodes_) {
    if (n.is_leaf()) continue;
    total_flops_ += n.flops;
    live += n.components;
    peak_components_ = std::max(peak_components_, live);
    for (auto c : {n.left, n.right})
      if (!nodes_[c].is_leaf()) live -= nodes_[c].components;
  }
}

std::vector<std::size_t> ContractionPlan::leaf_order() const {
  std::vector<std::size_t> order;
  auto walk = [&](auto&& self, std::size_t id) -> void {
    const auto& n = nodes_[id];
    if (n.is_leaf()) {
      order.push_back(n.leaf);
      return;
    }
    self(self, n.left);
    self(self, n.right);
  };
  walk(walk, nodes_.size() - 1);
  return order;
}

std::string ContractionPlan::expression() const {
  auto name = [&](std::size_t leaf) {
    return factors_[leaf].name.empty() ? "F" + std::to_string(leaf) : factors_[leaf].name;
  };
  auto walk = [&](auto&& self, std::size_t id) -> std::string {
    const auto& n = nodes_[id];
    if (n.is_leaf()) return name(n.leaf);
    std::size_t first = n.left, second = n.right;
    if (!nodes_[first].is_leaf() && nodes_[second].is_leaf()) std::swap(first, second);
    auto wrap = [&](std::size_t c) {
      return nodes_[c].is_leaf() ? self(self, c) : "(" + self(self, c) + ")";
    };
    return wrap(first) + "·" + wrap(second);
  };
  return walk(walk, nodes_.size() - 1);
}

ContractionPlan ContractionPlan::from_path(
    std::vector<FactorSignature> factors,
    const std::vector<std::pair<std::size_t, std::size_t>>& path) {
  PlanBuilder b(std::move(factors));
  std::vector<std::size_t> live(b.factor_count());
  for (std::size_t i = 0; i < live.size(); ++i) live[i] = i;
  for (auto [i, j] : path) {
    if (i == j || i >= live.size() || j >= live.size())
      throw ShapeError("contraction path step refers to an invalid operand");
    const std::size_t id = b.combine(live[i], live[j]);
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(std::max(i, j)));
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(std::min(i, j)));
    live.push_back(id);
  }
  if (live.size() != 1) throw ShapeError("contraction path does not reduce to a single result");
  return b.finish(PlanMode::fixed);
}

ContractionPlan left_to_right_plan(std::vector<FactorSignature> factors) {
  std::vector<std::pair<std::size_t, std::size_t>> path;
  // The running result sits at the back of the operand list after each step.
  const std::size_t n = factors.size();
  if (n > 1) path.emplace_back(0, 1);
  for (std::size_t k = 1; k + 1 < n; ++k) path.emplace_back(n - k - 1, 0);
  return ContractionPlan::from_path(std::move(factors), path);
}

namespace {

// One candidate tree for a subset: it is assembled from candidate `left_entry`
// of subset `left` and candidate `right_entry` of the complement.
struct Candidate {
  std::uint64_t flops = 0;
  std::uint64_t peak = 0;
  std::uint32_t left_entry = 0;
  std::uint32_t right_entry = 0;
  std::uint32_t left = 0;
};

class ExhaustiveSearch {
 public:
  explicit ExhaustiveSearch(const detail::ProductContext& ctx) : ctx_(ctx), n_(ctx.leaf_count()) {
    const std::uint32_t full = (1U << n_) - 1;
    sig_.resize(full + 1);
    size_.resize(full + 1, 0);
    cands_.resize(full + 1);
    for (std::uint32_t s = 1; s <= full; ++s) {
      sig_[s] = ctx_.signature(s);
      size_[s] = detail::component_count(sig_[s]);
    }
    std::vector<std::uint32_t> order;
    for (std::uint32_t s = 1; s <= full; ++s) order.push_back(s);
    std::stable_sort(order.begin(), order.end(),
                     [](auto a, auto b) { return std::popcount(a) < std::popcount(b); });
    for (auto s : order) solve(s);
  }

  // Best root candidate under (flops, peak, leaf order).
  std::pair<std::uint32_t, std::uint32_t> best() const {
    const std::uint32_t full = (1U << n_) - 1;
    const auto& list = cands_[full];
    std::uint32_t best_i = 0;
    for (std::uint32_t i = 1; i < list.size(); ++i) {
      const auto& a = list[i];
      const auto& b = list[best_i];
      if (a.peak < b.peak || (a.peak == b.peak && leaves(full, i) < leaves(full, best_i))) best_i = i;
    }
    return {full, best_i};
  }

  std::vector<std::size_t> leaves(std::uint32_t s, std::uint32_t e) const {
    std::vector<std::size_t> out;
    collect(s, e, out);
    return out;
  }

  const Candidate& candidate(std::uint32_t s, std::uint32_t e) const { return cands_[s][e]; }

 private:
  std::uint64_t intermediate(std::uint32_t s) const { return std::popcount(s) > 1 ? size_[s] : 0; }

  void collect(std::uint32_t s, std::uint32_t e, std::vector<std::size_t>& out) const {
    if (std::popcount(s) == 1) {
      out.push_back(min_leaf(s));
      return;
    }
    const auto& c = cands_[s][e];
    collect(c.left, c.left_entry, out);
    collect(s ^ c.left, c.right_entry, out);
  }

  void solve(std::uint32_t s) {
    auto& list = cands_[s];
    if (std::popcount(s) == 1) {
      list.push_back({});
      return;
    }
    const std::uint32_t low = s & (~s + 1);
    const std::uint32_t rest = s ^ low;
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    // Enumerate splits s = l ∪ r with l holding the lowest factor.
    for (std::uint32_t sub = rest;; sub = (sub - 1) & rest) {
      const std::uint32_t l = low | sub;
      const std::uint32_t r = s ^ l;
      if (r != 0) {
        const std::uint64_t node = detail::component_count(detail::join(sig_[l], sig_[r]));
        const auto& ll = cands_[l];
        const auto& rl = cands_[r];
        // Subtrees are flop-minimal for their subset, so every entry shares one flop count.
        const std::uint64_t flops = ll.front().flops + rl.front().flops + node;
        if (flops <= best) {
          if (flops < best) {
            list.clear();
            best = flops;
          }
          const std::uint64_t sl = intermediate(l), sr = intermediate(r);
          for (std::uint32_t i = 0; i < ll.size(); ++i)
            for (std::uint32_t j = 0; j < rl.size(); ++j) {
              const std::uint64_t peak =
                  std::max({ll[i].peak, sl + rl[j].peak, sl + sr + size_[s]});
              list.push_back({flops, peak, i, j, l});
            }
        }
      }
      if (sub == 0) break;
    }
  }

  const detail::ProductContext& ctx_;
  std::size_t n_;
  std::vector<GroupList> sig_;
  std::vector<std::uint64_t> size_;
  std::vector<std::vector<Candidate>> cands_;
};

std::size_t emit(PlanBuilder& b, const ExhaustiveSearch& search, std::uint32_t s, std::uint32_t e) {
  if (std::popcount(s) == 1) return min_leaf(s);
  const auto& c = search.candidate(s, e);
  const std::size_t l = emit(b, search, c.left, c.left_entry);
  const std::size_t r = emit(b, search, s ^ c.left, c.right_entry);
  return b.combine(l, r);
}

}  // namespace

ContractionPlan plan(std::vector<FactorSignature> factors, const PlannerOptions& options) {
  if (factors.empty()) throw ShapeError("cannot plan an empty product");
  const std::size_t n = factors.size();
  if (n > options.max_factors)
    throw ShapeError("product has " + std::to_string(n) + " factors, above the planner cap of " +
                     std::to_string(options.max_factors));
  if (n > options.exhaustive_limit && !options.allow_heuristic)
    throw ShapeError("product has " + std::to_string(n) +
                     " factors, above the exhaustive limit, and heuristic planning is disabled");

  PlanBuilder b(std::move(factors));
  if (n == 1) return b.finish(PlanMode::exhaustive);

  if (n <= options.exhaustive_limit && n <= 16) {
    ExhaustiveSearch search(b.context());
    auto [s, e] = search.best();
    emit(b, search, s, e);
    return b.finish(PlanMode::exhaustive);
  }

  std::vector<std::size_t> live(n);
  for (std::size_t i = 0; i < n; ++i) live[i] = i;
  while (live.size() > 1) {
    std::size_t bi = 0, bj = 1;
    std::uint64_t best_cost = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t best_size = best_cost;
    for (std::size_t i = 0; i < live.size(); ++i)
      for (std::size_t j = i + 1; j < live.size(); ++j) {
        const std::uint64_t cost = b.pair_cost(live[i], live[j]);
        const std::uint64_t size = detail::component_count(
            b.context().signature(b.node(live[i]).subset | b.node(live[j]).subset));
        if (cost < best_cost || (cost == best_cost && size < best_size)) {
          best_cost = cost;
          best_size = size;
          bi = i;
          bj = j;
        }
      }
    const std::size_t id = b.combine(live[bi], live[bj]);
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(bj));
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(bi));
    live.push_back(id);
  }
  return b.finish(PlanMode::heuristic);
}

DenseTensor execute(const ContractionPlan& plan, std::span<const DenseTensor> factors,
                    ExecutionStats* stats) {
  using detail::Operand;
  if (factors.size() != plan.factor_count())
    throw ShapeError("plan expects " + std::to_string(plan.factor_count()) + " factors, got " +
                     std::to_string(factors.size()));
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (!same_registry(factors[i].registry(), factors[0].registry()))
      throw ShapeError("tensor product: factors use different space registries");
    if (detail::groups_of(*factors[i].registry(), factors[i].indices()) != plan.factors()[i].groups)
      throw ShapeError("factor " + std::to_string(i) + " ('" + factors[i].spec_string() +
                       "') does not match the planned signature");
  }

  const auto& nodes = plan.nodes();
  std::vector<Operand> ops(nodes.size());
  std::uint64_t live = 0, peak = 0;
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    const auto& n = nodes[id];
    if (n.is_leaf()) {
      Operand leaf = detail::to_operand(factors[n.leaf]);
      if (leaf.groups() != n.signature) leaf = detail::reduce(leaf, n.signature);
      ops[id] = std::move(leaf);
      continue;
    }
    ops[id] = detail::contract(ops[n.left], ops[n.right], n.signature);
    live += ops[id].data().size();
    peak = std::max(peak, live);
    for (auto c : {n.left, n.right}) {
      if (!nodes[c].is_leaf()) live -= ops[c].data().size();
      ops[c] = Operand();
    }
  }
  if (stats) stats->peak_components = peak;
  return detail::to_tensor(factors[0].registry(), std::move(ops.back()));
}

namespace {

std::string group_text(const SpaceRegistry& registry, const GroupList& groups) {
  std::string out;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (i) out += ',';
    for (char c : registry.space(groups[i].space).name)
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (groups[i].mask & detail::kUp) out += '^';
    if (groups[i].mask & detail::kDown) out += '_';
    if (groups[i].frame) out += std::to_string(groups[i].frame);
  }
  return out;
}

}  // namespace

std::string cost_report(const ContractionPlan& plan, const SpaceRegistry& registry) {
  std::ostringstream os;
  os << "plan " << plan.expression() << '\n';
  static constexpr const char* kModes[] = {"exhaustive", "heuristic", "fixed"};
  os << "mode " << kModes[static_cast<int>(plan.mode())] << '\n';
  const auto& nodes = plan.nodes();
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    const auto& n = nodes[id];
    os << "node " << id;
    if (n.is_leaf()) {
      const auto& f = plan.factors()[n.leaf];
      os << " leaf " << (f.name.empty() ? "F" + std::to_string(n.leaf) : f.name);
    } else {
      os << " combine " << n.left << ' ' << n.right;
    }
    os << " signature=" << group_text(registry, n.signature) << " flops=" << n.flops
       << " components=" << n.components << '\n';
  }
  os << "total_flops " << plan.total_flops() << '\n';
  os << "peak_components " << plan.peak_components() << '\n';
  return os.str();
}

DenseTensor planned_product(std::span<const DenseTensor> factors) {
  std::vector<FactorSignature> sigs;
  for (const auto& f : factors) sigs.push_back(FactorSignature::of(f));
  PlannerOptions opts;
  opts.max_factors = 64;
  return execute(plan(std::move(sigs), opts), factors);
}

}  // namespace tensalg
