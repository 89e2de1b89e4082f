#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Core>

#include "tensalg/separable.hpp"
#include "tensalg/tensor.hpp"

namespace tensalg {

/// System operator of a tensor equation A·U = B: either a dense tensor with
/// paired output/input frames or a separable operator. Output and input
/// indices are paired position by position in canonical order, which defines
/// the flattened square matrix and its main diagonal.
class LinearMap {
 public:
  /// `system` carries the contravariant outputs and the covariant partners of
  /// the inputs; the k-th output (canonical order) pairs with the k-th input.
  explicit LinearMap(DenseTensor system);
  LinearMap(SeparableOperator op);

  const RegistryPtr& registry() const noexcept { return registry_; }
  const IndexSpec& input_spec() const noexcept { return input_; }
  const IndexSpec& output_spec() const noexcept { return output_; }
  std::size_t size() const;

  bool is_separable() const noexcept { return separable_.has_value(); }
  const SeparableOperator* separable() const noexcept { return separable_ ? &*separable_ : nullptr; }
  const DenseTensor* dense() const noexcept { return dense_ ? &*dense_ : nullptr; }

  DenseTensor apply(const DenseTensor& u) const;
  /// Diagonal of the flattened system, laid out over the output spec.
  DenseTensor main_diagonal() const;
  /// Rows over the flattened output, columns over the flattened input.
  Eigen::MatrixXd to_matrix() const;

  /// Moves a tensor between the output frames and the input frames (the
  /// Kronecker delta bridge).
  DenseTensor output_to_input(const DenseTensor& r) const;
  DenseTensor input_to_output(const DenseTensor& u) const;

  DenseTensor zero_input() const;
  DenseTensor zero_output() const;

 private:
  RegistryPtr registry_;
  IndexSpec input_;
  IndexSpec output_;
  std::optional<DenseTensor> dense_;
  std::optional<SeparableOperator> separable_;
};

}  // namespace tensalg
