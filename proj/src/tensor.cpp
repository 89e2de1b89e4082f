#include "tensalg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tensalg/error.hpp"
#include "tensalg/product.hpp"

namespace tensalg {

namespace detail {

std::vector<double> permute(std::span<const double> src, std::span<const std::size_t> dims,
                            std::span<const std::size_t> perm) {
  const std::size_t rank = dims.size();
  std::vector<double> dst(src.size());
  if (src.empty()) return dst;
  if (rank == 0) {
    dst[0] = src[0];
    return dst;
  }
  std::vector<std::size_t> src_strides(rank, 1);
  for (std::size_t k = rank - 1; k-- > 0;) src_strides[k] = src_strides[k + 1] * dims[k + 1];
  std::vector<std::size_t> out_dims(rank), step(rank);
  for (std::size_t k = 0; k < rank; ++k) {
    out_dims[k] = dims[perm[k]];
    step[k] = src_strides[perm[k]];
  }
  std::vector<std::size_t> counter(rank, 0);
  std::size_t in = 0;
  for (std::size_t out = 0; out < dst.size(); ++out) {
    dst[out] = src[in];
    for (std::size_t k = rank; k-- > 0;) {
      if (++counter[k] < out_dims[k]) {
        in += step[k];
        break;
      }
      in -= step[k] * (out_dims[k] - 1);
      counter[k] = 0;
    }
  }
  return dst;
}

}  // namespace detail

std::size_t extent_product(const SpaceRegistry& registry, const IndexSpec& spec) {
  std::size_t n = 1;
  for (const auto& idx : spec) n *= registry.extent(idx.space);
  return n;
}

namespace {

void validate_spec(const SpaceRegistry& registry, const IndexSpec& spec) {
  for (const auto& idx : spec)
    if (idx.space >= registry.size())
      throw ShapeError("index refers to space rank " + std::to_string(idx.space) +
                       " outside the registry");
  check_no_duplicates(spec);
}

}  // namespace

DenseTensor::DenseTensor(RegistryPtr registry, const IndexSpec& spec, std::vector<double> values)
    : registry_(std::move(registry)) {
  if (!registry_) throw ShapeError("tensor requires a space registry");
  validate_spec(*registry_, spec);
  const std::size_t n = extent_product(*registry_, spec);
  if (values.empty()) values.assign(n, 0.0);
  if (values.size() != n)
    throw ShapeError("length mismatch: spec '" + print_index_spec(*registry_, spec) +
                     "' needs " + std::to_string(n) + " components, got " +
                     std::to_string(values.size()));
  registry_->freeze();

  std::vector<std::size_t> perm(spec.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(),
                   [&](std::size_t a, std::size_t b) { return spec[a] < spec[b]; });
  indices_.reserve(spec.size());
  for (auto p : perm) indices_.push_back(spec[p]);
  if (std::is_sorted(perm.begin(), perm.end())) {
    data_ = std::move(values);
  } else {
    std::vector<std::size_t> dims;
    for (const auto& idx : spec) dims.push_back(registry_->extent(idx.space));
    data_ = detail::permute(values, dims, perm);
  }
}

DenseTensor::DenseTensor(RegistryPtr registry, std::string_view spec, std::vector<double> values)
    : DenseTensor(registry, parse_index_spec(*registry, spec), std::move(values)) {}

DenseTensor DenseTensor::zeros(RegistryPtr registry, const IndexSpec& spec) {
  return DenseTensor(std::move(registry), spec);
}

DenseTensor DenseTensor::constant(RegistryPtr registry, const IndexSpec& spec, double value) {
  DenseTensor t(std::move(registry), spec);
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

DenseTensor DenseTensor::scalar(RegistryPtr registry, double value) {
  return DenseTensor(std::move(registry), IndexSpec{}, std::vector<double>{value});
}

DenseTensor DenseTensor::from_canonical(RegistryPtr registry, IndexSpec indices,
                                        std::vector<double> values) {
  DenseTensor t;
  if (!registry) throw ShapeError("tensor requires a space registry");
  validate_spec(*registry, indices);
  if (!std::is_sorted(indices.begin(), indices.end()))
    throw ShapeError("from_canonical: indices are not in canonical order");
  if (values.size() != extent_product(*registry, indices))
    throw ShapeError("from_canonical: length mismatch");
  registry->freeze();
  t.registry_ = std::move(registry);
  t.indices_ = std::move(indices);
  t.data_ = std::move(values);
  return t;
}

std::vector<std::size_t> DenseTensor::extents() const {
  std::vector<std::size_t> e;
  e.reserve(indices_.size());
  for (const auto& idx : indices_) e.push_back(registry_->extent(idx.space));
  return e;
}

std::vector<std::size_t> DenseTensor::strides() const {
  auto e = extents();
  std::vector<std::size_t> s(e.size(), 1);
  for (std::size_t k = e.size(); k-- > 1;) s[k - 1] = s[k] * e[k];
  return s;
}

std::string DenseTensor::spec_string() const {
  return registry_ ? print_index_spec(*registry_, indices_) : std::string{};
}

std::size_t DenseTensor::offset(std::span<const std::size_t> idx) const {
  if (idx.size() != indices_.size())
    throw ShapeError("expected " + std::to_string(indices_.size()) + " coordinates, got " +
                     std::to_string(idx.size()));
  std::size_t off = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::size_t n = registry_->extent(indices_[k].space);
    if (idx[k] >= n) throw ShapeError("coordinate out of range");
    off = off * n + idx[k];
  }
  return off;
}

double DenseTensor::operator()(std::initializer_list<std::size_t> idx) const {
  return data_[offset(std::span<const std::size_t>(idx.begin(), idx.size()))];
}

double& DenseTensor::operator()(std::initializer_list<std::size_t> idx) {
  return data_[offset(std::span<const std::size_t>(idx.begin(), idx.size()))];
}

double DenseTensor::at(std::span<const std::size_t> idx) const { return data_[offset(idx)]; }

double DenseTensor::value() const {
  if (!indices_.empty() || data_.size() != 1)
    throw ShapeError("value() requires an order-0 tensor, got '" + spec_string() + "'");
  return data_[0];
}

bool DenseTensor::operator==(const DenseTensor& other) const {
  return same_registry(registry_, other.registry_) && indices_ == other.indices_ &&
         data_ == other.data_;
}

void require_same_shape(const DenseTensor& a, const DenseTensor& b, std::string_view what) {
  if (!same_registry(a.registry(), b.registry()))
    throw ShapeError(std::string(what) + ": operands use different space registries");
  if (a.indices() != b.indices())
    throw ShapeError(std::string(what) + ": index lists differ ('" + a.spec_string() +
                     "' vs '" + b.spec_string() + "')");
}

DenseTensor add(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "add");
  DenseTensor r = a;
  r.vec() += b.vec();
  return r;
}

DenseTensor subtract(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "subtract");
  DenseTensor r = a;
  r.vec() -= b.vec();
  return r;
}

DenseTensor scale(double lambda, const DenseTensor& a) {
  DenseTensor r = a;
  r.vec() *= lambda;
  return r;
}

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b) { return add(a, b); }
DenseTensor operator-(const DenseTensor& a, const DenseTensor& b) { return subtract(a, b); }
DenseTensor operator-(const DenseTensor& a) { return scale(-1.0, a); }
DenseTensor operator*(double lambda, const DenseTensor& a) { return scale(lambda, a); }

DenseTensor make_delta(RegistryPtr registry,
                       const std::vector<std::pair<TensorIndex, TensorIndex>>& pairs) {
  IndexSpec spec;
  std::vector<std::size_t> dims;
  for (const auto& [a, b] : pairs) {
    if (a.space != b.space) throw ShapeError("delta pair spans two different spaces");
    if (a == b) throw ShapeError("delta pair repeats the same index");
    spec.push_back(a);
    spec.push_back(b);
    const std::size_t n = registry->extent(a.space);
    dims.push_back(n);
    dims.push_back(n);
  }
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  std::vector<double> values(total, 0.0);
  // Visit only the diagonal of every pair: offset advances by (n+1)·stride.
  std::vector<std::size_t> pair_step(pairs.size()), pair_n(pairs.size());
  std::size_t stride = 1;
  for (std::size_t p = pairs.size(); p-- > 0;) {
    const std::size_t n = dims[2 * p];
    pair_step[p] = (n + 1) * stride;
    pair_n[p] = n;
    stride *= n * n;
  }
  std::vector<std::size_t> counter(pairs.size(), 0);
  std::size_t diag_points = 1;
  for (auto n : pair_n) diag_points *= n;
  std::size_t off = 0;
  for (std::size_t i = 0; i < diag_points; ++i) {
    values[off] = 1.0;
    for (std::size_t k = pairs.size(); k-- > 0;) {
      if (++counter[k] < pair_n[k]) {
        off += pair_step[k];
        break;
      }
      off -= pair_step[k] * (pair_n[k] - 1);
      counter[k] = 0;
    }
  }
  return DenseTensor(std::move(registry), spec, std::move(values));
}

DenseTensor make_delta(RegistryPtr registry, const IndexSpec& from, const IndexSpec& to) {
  if (from.size() != to.size()) throw ShapeError("make_delta: spec lengths differ");
  std::vector<std::pair<TensorIndex, TensorIndex>> pairs;
  for (std::size_t i = 0; i < from.size(); ++i) pairs.emplace_back(from[i], to[i]);
  return make_delta(std::move(registry), pairs);
}

DenseTensor reindex(const DenseTensor& t, const IndexSpec& from, const IndexSpec& to) {
  if (from.size() != to.size()) throw ShapeError("reindex: spec lengths differ");
  IndexSpec relabeled = t.indices();
  std::vector<bool> used(from.size(), false);
  for (auto& idx : relabeled) {
    auto it = std::find(from.begin(), from.end(), idx);
    if (it == from.end()) continue;
    const auto k = static_cast<std::size_t>(it - from.begin());
    if (to[k].space != idx.space) throw ShapeError("reindex: cannot move an index to another space");
    idx = to[k];
    used[k] = true;
  }
  if (std::find(used.begin(), used.end(), false) != used.end())
    throw ShapeError("reindex: tensor '" + t.spec_string() + "' lacks a requested index");
  std::vector<double> values(t.data().begin(), t.data().end());
  return DenseTensor(t.registry(), relabeled, std::move(values));
}

double inner_product(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "inner product");
  return a.vec().dot(b.vec());
}

namespace {

std::uint32_t fresh_frame(const IndexSpec& spec, std::size_t space) {
  std::uint32_t f = 0;
  for (const auto& idx : spec)
    if (idx.space == space) f = std::max(f, idx.frame + 1);
  return f;
}

}  // namespace

namespace {

// Products read x^ and x_ of one frame inside a tensor along the diagonal, so
// the product forms of the inner product only see the full tensor without them.
void require_unpaired(const DenseTensor& a) {
  const auto& inds = a.indices();
  for (std::size_t i = 0; i + 1 < inds.size(); ++i)
    if (inds[i].same_group(inds[i + 1]))
      throw ShapeError("inner product via products needs distinct frames per space, got '" + a.spec_string() + "'");
}

}  // namespace

double inner_product_via_deltas(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "inner product");
  require_unpaired(a);
  DenseTensor lowered = a;
  DenseTensor moved = b;
  const IndexSpec& inds = a.indices();
  std::vector<std::uint32_t> next(a.registry()->size(), 0);
  for (const auto& idx : inds) next[idx.space] = std::max(next[idx.space], fresh_frame(inds, idx.space));
  for (const auto& idx : inds) {
    const std::uint32_t f = next[idx.space]++;
    const TensorIndex target{idx.space, f, idx.variance};
    // delta_{x x1} lowers A^x into A_{x1}; delta^{x1}_x moves B^x to B^{x1}.
    auto lower = make_delta(a.registry(), {{idx.flipped(), target.flipped()}});
    auto move = make_delta(a.registry(), {{target, idx.flipped()}});
    lowered = tensor_product(lowered, lower);
    moved = tensor_product(moved, move);
  }
  return tensor_product(lowered, moved).value();
}

double inner_product_via_merge(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "inner product");
  require_unpaired(a);
  auto ones = DenseTensor::constant(a.registry(), negate_spec(a.indices()), 1.0);
  return tensor_product(std::vector<DenseTensor>{a, b, ones}).value();
}

DenseTensor derivative_of_linear_map(const DenseTensor& a, const IndexSpec& u_spec,
                                     const IndexSpec& wrt_spec) {
  if (u_spec.size() != wrt_spec.size())
    throw ShapeError("derivative: variable spec and differentiation spec differ in length");
  for (std::size_t k = 0; k < u_spec.size(); ++k) {
    if (u_spec[k].space != wrt_spec[k].space || u_spec[k].variance != wrt_spec[k].variance)
      throw ShapeError("derivative: differentiation spec must match the variable's spaces and variances");
    const auto& inds = a.indices();
    if (std::find(inds.begin(), inds.end(), u_spec[k].flipped()) == inds.end())
      throw ShapeError("derivative: map '" + a.spec_string() +
                       "' has no index contracting with the variable");
  }
  return reindex(a, negate_spec(u_spec), negate_spec(wrt_spec));
}

DenseTensor derivative_of_linear_map(const DenseTensor& a, const IndexSpec& u_spec) {
  return derivative_of_linear_map(a, u_spec, u_spec);
}

namespace {

std::vector<std::size_t> positions_of(const DenseTensor& t, const IndexSpec& sub) {
  std::vector<std::size_t> pos;
  for (const auto& idx : sub) {
    auto it = std::find(t.indices().begin(), t.indices().end(), idx);
    if (it == t.indices().end())
      throw ShapeError("matricize: index not present in '" + t.spec_string() + "'");
    pos.push_back(static_cast<std::size_t>(it - t.indices().begin()));
  }
  return pos;
}

// Offsets into t of every row-major multi-index over the positions `pos`.
std::vector<std::size_t> flat_offsets(const DenseTensor& t, const std::vector<std::size_t>& pos) {
  const auto ext = t.extents();
  const auto str = t.strides();
  std::vector<std::size_t> offs{0};
  for (auto p : pos) {
    std::vector<std::size_t> next;
    next.reserve(offs.size() * ext[p]);
    for (auto o : offs)
      for (std::size_t i = 0; i < ext[p]; ++i) next.push_back(o + i * str[p]);
    offs = std::move(next);
  }
  return offs;
}

}  // namespace

Eigen::MatrixXd matricize(const DenseTensor& t, const IndexSpec& rows, const IndexSpec& cols) {
  if (rows.size() + cols.size() != t.order())
    throw ShapeError("matricize: rows and columns must cover the tensor's indices");
  const auto rpos = positions_of(t, rows);
  const auto cpos = positions_of(t, cols);
  const auto roff = flat_offsets(t, rpos);
  const auto coff = flat_offsets(t, cpos);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(roff.size()), static_cast<Eigen::Index>(coff.size()));
  const auto d = t.data();
  for (std::size_t i = 0; i < roff.size(); ++i)
    for (std::size_t j = 0; j < coff.size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d[roff[i] + coff[j]];
  return m;
}

DenseTensor from_matrix(RegistryPtr registry, const IndexSpec& rows, const IndexSpec& cols,
                        const Eigen::MatrixXd& m) {
  IndexSpec spec = rows;
  spec.insert(spec.end(), cols.begin(), cols.end());
  const auto nr = extent_product(*registry, rows);
  const auto nc = extent_product(*registry, cols);
  if (static_cast<std::size_t>(m.rows()) != nr || static_cast<std::size_t>(m.cols()) != nc)
    throw ShapeError("from_matrix: matrix dimensions do not match the index lists");
  std::vector<double> values(nr * nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j)
      values[i * nc + j] = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return DenseTensor(std::move(registry), spec, std::move(values));
}

double max_abs(const DenseTensor& t) {
  return t.size() ? t.vec().cwiseAbs().maxCoeff() : 0.0;
}

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "comparison");
  return a.size() ? (a.vec() - b.vec()).cwiseAbs().maxCoeff() : 0.0;
}

double relative_difference(const DenseTensor& a, const DenseTensor& b) {
  const double diff = max_abs_diff(a, b);
  const double scale = std::max(max_abs(a), max_abs(b));
  if (scale == 0.0) return diff;
  return diff / scale;
}

}  // namespace tensalg
