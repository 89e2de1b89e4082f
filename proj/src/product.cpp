#include "tensalg/product.hpp"

#include <algorithm>

#include "tensalg/error.hpp"

namespace tensalg {

namespace detail {

GroupList groups_of(const SpaceRegistry& registry, const IndexSpec& spec) {
  GroupList out;
  for (const auto& idx : canonical(spec)) {
    const std::uint8_t bit = idx.variance == Variance::contravariant ? kUp : kDown;
    if (!out.empty() && out.back().space == idx.space && out.back().frame == idx.frame) {
      out.back().mask |= bit;
    } else {
      out.push_back({idx.space, idx.frame, bit, registry.extent(idx.space)});
    }
  }
  return out;
}

std::size_t component_count(const GroupList& groups) {
  std::size_t n = 1;
  for (const auto& g : groups) n *= g.extent;
  return n;
}

GroupList join(const GroupList& a, const GroupList& b) {
  GroupList out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].key_less(b[j]))) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].key_less(a[i])) {
      out.push_back(b[j++]);
    } else {
      IndexGroup g = a[i++];
      g.mask |= b[j++].mask;
      out.push_back(g);
    }
  }
  return out;
}

Operand::Operand(GroupList groups, std::vector<double> values)
    : groups_(std::move(groups)), owned_(std::move(values)), data_(owned_) {}

Operand::Operand(GroupList groups, std::span<const double> borrowed)
    : groups_(std::move(groups)), data_(borrowed) {}

std::vector<double> Operand::release() {
  if (owned_.empty() && !data_.empty()) return {data_.begin(), data_.end()};
  data_ = {};
  return std::move(owned_);
}

Operand to_operand(const DenseTensor& t) {
  GroupList groups = groups_of(*t.registry(), t.indices());
  if (groups.size() == t.order()) return Operand(std::move(groups), t.data());

  // Tie the x^ and x_ axes of each doubled group: stride = sum of both strides.
  const auto strides = t.strides();
  std::vector<std::size_t> gstride(groups.size(), 0);
  std::size_t g = 0;
  for (std::size_t k = 0; k < t.order(); ++k) {
    while (!(groups[g].space == t.indices()[k].space && groups[g].frame == t.indices()[k].frame)) ++g;
    gstride[g] += strides[k];
  }
  std::vector<double> values(component_count(groups));
  std::vector<std::size_t> counter(groups.size(), 0);
  std::size_t src = 0;
  const auto data = t.data();
  for (std::size_t dst = 0; dst < values.size(); ++dst) {
    values[dst] = data[src];
    for (std::size_t k = groups.size(); k-- > 0;) {
      if (++counter[k] < groups[k].extent) {
        src += gstride[k];
        break;
      }
      src -= gstride[k] * (groups[k].extent - 1);
      counter[k] = 0;
    }
  }
  return Operand(std::move(groups), std::move(values));
}

namespace {

std::vector<std::size_t> strides_for(const GroupList& groups) {
  std::vector<std::size_t> s(groups.size(), 1);
  for (std::size_t k = groups.size(); k-- > 1;) s[k - 1] = s[k] * groups[k].extent;
  return s;
}

// Stride of each joint group inside `part` (0 when absent).
std::vector<std::size_t> embed(const GroupList& joint, const GroupList& part) {
  const auto ps = strides_for(part);
  std::vector<std::size_t> s(joint.size(), 0);
  std::size_t p = 0;
  for (std::size_t j = 0; j < joint.size() && p < part.size(); ++j) {
    if (joint[j].same_key(part[p])) s[j] = ps[p++];
  }
  if (p != part.size()) throw ShapeError("internal: group list is not a subset of the joint space");
  return s;
}

}  // namespace

Operand contract(const Operand& a, const Operand& b, const GroupList& result) {
  const GroupList joint = join(a.groups(), b.groups());
  GroupList out = result;
  for (auto& g : out) {
    auto it = std::find_if(joint.begin(), joint.end(), [&](const IndexGroup& j) { return j.same_key(g); });
    if (it == joint.end()) throw ShapeError("internal: result group missing from operands");
    g.mask = it->mask;
  }
  const auto sa = embed(joint, a.groups());
  const auto sb = embed(joint, b.groups());
  const auto so = embed(joint, out);

  std::vector<double> values(component_count(out), 0.0);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = values.data();

  const std::size_t rank = joint.size();
  if (rank == 0) {
    po[0] = pa[0] * pb[0];
    return Operand(std::move(out), std::move(values));
  }
  const std::size_t last = rank - 1;
  const std::size_t n_inner = joint[last].extent;
  const std::size_t ia = sa[last], ib = sb[last], io = so[last];
  std::size_t outer = 1;
  for (std::size_t k = 0; k < last; ++k) outer *= joint[k].extent;

  std::vector<std::size_t> counter(rank, 0);
  std::size_t oa = 0, ob = 0, oo = 0;
  for (std::size_t step = 0; step < outer; ++step) {
    if (io == 0) {
      double acc = po[oo];
      for (std::size_t i = 0; i < n_inner; ++i) acc += pa[oa + i * ia] * pb[ob + i * ib];
      po[oo] = acc;
    } else {
      for (std::size_t i = 0; i < n_inner; ++i) po[oo + i * io] += pa[oa + i * ia] * pb[ob + i * ib];
    }
    for (std::size_t k = last; k-- > 0;) {
      if (++counter[k] < joint[k].extent) {
        oa += sa[k];
        ob += sb[k];
        oo += so[k];
        break;
      }
      const std::size_t back = joint[k].extent - 1;
      oa -= sa[k] * back;
      ob -= sb[k] * back;
      oo -= so[k] * back;
      counter[k] = 0;
    }
  }
  return Operand(std::move(out), std::move(values));
}

Operand reduce(const Operand& a, const GroupList& result) {
  static const double one = 1.0;
  Operand unit(GroupList{}, std::span<const double>(&one, 1));
  return contract(a, unit, result);
}

DenseTensor to_tensor(RegistryPtr registry, Operand op) {
  IndexSpec indices;
  for (const auto& g : op.groups()) {
    if (g.mask == kBoth) throw ShapeError("internal: uncontracted index pair in result");
    indices.push_back({g.space, g.frame, g.mask == kUp ? Variance::contravariant : Variance::covariant});
  }
  return DenseTensor::from_canonical(std::move(registry), std::move(indices), op.release());
}

ProductContext::ProductContext(std::vector<GroupList> leaves) : leaves_(std::move(leaves)) {
  if (leaves_.size() > 64) throw ShapeError("a single product is limited to 64 factors");
  for (const auto& l : leaves_) global_ = join(global_, l);
}

GroupList ProductContext::signature(std::uint64_t subset) const {
  GroupList inside, outside;
  for (std::size_t i = 0; i < leaves_.size(); ++i) {
    if (subset >> i & 1U)
      inside = join(inside, leaves_[i]);
    else
      outside = join(outside, leaves_[i]);
  }
  GroupList out;
  for (const auto& g : inside) {
    auto git = std::find_if(global_.begin(), global_.end(), [&](const IndexGroup& x) { return x.same_key(g); });
    const bool contracted = git->mask == kBoth;
    const bool needed_later =
        std::any_of(outside.begin(), outside.end(), [&](const IndexGroup& x) { return x.same_key(g); });
    if (contracted && !needed_later) continue;
    out.push_back(g);
  }
  return out;
}

}  // namespace detail

namespace {

void require_common_registry(std::span<const DenseTensor> factors) {
  for (const auto& f : factors)
    if (!same_registry(f.registry(), factors.front().registry()))
      throw ShapeError("tensor product: factors use different space registries");
}

}  // namespace

DenseTensor tensor_product(std::span<const DenseTensor> factors) {
  using namespace detail;
  if (factors.empty()) throw ShapeError("tensor product of an empty factor list");
  require_common_registry(factors);

  std::vector<GroupList> leaves;
  for (const auto& f : factors) leaves.push_back(groups_of(*f.registry(), f.indices()));
  ProductContext ctx(std::move(leaves));

  Operand acc = to_operand(factors[0]);
  std::uint64_t seen = 1;
  if (factors.size() == 1) acc = reduce(acc, ctx.signature(seen));
  for (std::size_t i = 1; i < factors.size(); ++i) {
    seen |= std::uint64_t{1} << i;
    Operand next = to_operand(factors[i]);
    acc = contract(acc, next, ctx.signature(seen));
  }
  return to_tensor(factors[0].registry(), std::move(acc));
}

DenseTensor tensor_product(const std::vector<DenseTensor>& factors) {
  return tensor_product(std::span<const DenseTensor>(factors));
}

DenseTensor tensor_product(const DenseTensor& a, const DenseTensor& b) {
  if (!same_registry(a.registry(), b.registry()))
    throw ShapeError("tensor product: factors use different space registries");
  using namespace detail;
  ProductContext ctx({groups_of(*a.registry(), a.indices()), groups_of(*b.registry(), b.indices())});
  Operand oa = to_operand(a);
  Operand ob = to_operand(b);
  return to_tensor(a.registry(), contract(oa, ob, ctx.signature(3)));
}

DenseTensor operator*(const DenseTensor& a, const DenseTensor& b) { return tensor_product(a, b); }

}  // namespace tensalg
