#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tensalg/index_notation.hpp"
#include "tensalg/space_registry.hpp"

namespace tensalg {

/// Dense tensor: canonical-ordered index list plus row-major components.
///
/// Indices are always stored sorted by (space rank, frame, variance); the
/// constructor accepts components in the order the caller wrote the indices and
/// permutes them into canonical layout. Components are plain doubles so that
/// `vec()` can hand out an Eigen view for componentwise arithmetic.
class DenseTensor {
 public:
  DenseTensor() = default;

  /// `values` is row-major in the order of `spec` as written. Empty `values`
  /// means all zeros.
  DenseTensor(RegistryPtr registry, const IndexSpec& spec, std::vector<double> values = {});
  DenseTensor(RegistryPtr registry, std::string_view spec, std::vector<double> values = {});

  static DenseTensor zeros(RegistryPtr registry, const IndexSpec& spec);
  static DenseTensor constant(RegistryPtr registry, const IndexSpec& spec, double value);
  static DenseTensor scalar(RegistryPtr registry, double value);

  /// Builds from components already in canonical layout for the sorted `indices`.
  static DenseTensor from_canonical(RegistryPtr registry, IndexSpec indices,
                                    std::vector<double> values);

  const RegistryPtr& registry() const noexcept { return registry_; }
  const IndexSpec& indices() const noexcept { return indices_; }
  std::size_t order() const noexcept { return indices_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::vector<std::size_t> extents() const;
  std::vector<std::size_t> strides() const;
  std::string spec_string() const;

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::vector<double>& storage() noexcept { return data_; }

  Eigen::Map<const Eigen::VectorXd> vec() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }
  Eigen::Map<Eigen::VectorXd> vec() {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }

  /// Component at a multi-index given in canonical index order.
  double operator()(std::initializer_list<std::size_t> idx) const;
  double& operator()(std::initializer_list<std::size_t> idx);
  double at(std::span<const std::size_t> idx) const;

  /// Value of an order-0 tensor.
  double value() const;

  bool operator==(const DenseTensor& other) const;

 private:
  std::size_t offset(std::span<const std::size_t> idx) const;

  RegistryPtr registry_;
  IndexSpec indices_;
  std::vector<double> data_;
};

std::size_t extent_product(const SpaceRegistry& registry, const IndexSpec& spec);

// Elementwise operations. Operands must share registry and index list.
DenseTensor add(const DenseTensor& a, const DenseTensor& b);
DenseTensor subtract(const DenseTensor& a, const DenseTensor& b);
DenseTensor scale(double lambda, const DenseTensor& a);

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator-(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator-(const DenseTensor& a);
DenseTensor operator*(double lambda, const DenseTensor& a);

/// Throws ShapeError unless `a` and `b` share registry and index list.
void require_same_shape(const DenseTensor& a, const DenseTensor& b, std::string_view what);

/// Kronecker delta over index pairs. Each pair lives in one space and the two
/// indices differ in frame or variance; components are 1 where every pair's
/// coordinates coincide.
DenseTensor make_delta(RegistryPtr registry,
                       const std::vector<std::pair<TensorIndex, TensorIndex>>& pairs);

/// Delta pairing `from[i]` with `to[i]`, e.g. `make_delta(w, c_inds, negate_spec(b_inds))`.
DenseTensor make_delta(RegistryPtr registry, const IndexSpec& from, const IndexSpec& to);

/// Replaces each index `from[i]` of `t` by `to[i]` (same space) and restores
/// canonical layout. Equal to multiplying by the matching Kronecker deltas,
/// without building them.
DenseTensor reindex(const DenseTensor& t, const IndexSpec& from, const IndexSpec& to);

/// Sum of elementwise products of two tensors with identical index lists.
double inner_product(const DenseTensor& a, const DenseTensor& b);

/// Inner product evaluated as (a · delta_lowering) · (b · delta_relabel):
/// variance flipped on one side, frames moved on both, then fully contracted.
double inner_product_via_deltas(const DenseTensor& a, const DenseTensor& b);

/// Inner product evaluated as (a · b) merged elementwise, then contracted with
/// an all-ones tensor of opposite variance.
double inner_product_via_merge(const DenseTensor& a, const DenseTensor& b);

/// Derivative of f(u) = a · u with respect to u carried in frames `wrt_spec`
/// (positionally matching `u_spec`): a with every covariant index that
/// contracts against `u_spec` moved to the corresponding `wrt_spec` frame.
DenseTensor derivative_of_linear_map(const DenseTensor& a, const IndexSpec& u_spec,
                                     const IndexSpec& wrt_spec);
DenseTensor derivative_of_linear_map(const DenseTensor& a, const IndexSpec& u_spec);

/// Flattens `t` into a matrix whose rows run over `rows` and columns over
/// `cols` (each row-major in the order given). rows ∪ cols must be t's indices.
Eigen::MatrixXd matricize(const DenseTensor& t, const IndexSpec& rows, const IndexSpec& cols);

/// Inverse of matricize.
DenseTensor from_matrix(RegistryPtr registry, const IndexSpec& rows, const IndexSpec& cols,
                        const Eigen::MatrixXd& m);

double max_abs(const DenseTensor& t);
double max_abs_diff(const DenseTensor& a, const DenseTensor& b);

/// max|a-b| / max(max|a|, max|b|), 0 when both are zero.
double relative_difference(const DenseTensor& a, const DenseTensor& b);

namespace detail {

/// Row-major transpose: `dims` are the source extents, `perm[k]` is the source
/// axis that becomes destination axis k.
std::vector<double> permute(std::span<const double> src, std::span<const std::size_t> dims,
                            std::span<const std::size_t> perm);

}  // namespace detail

}  // namespace tensalg
