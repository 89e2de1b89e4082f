#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "tensalg/tensor.hpp"

namespace tensalg {

/// One dimension of a separable operator: input index `space^in_frame` is
/// mapped to output index `space^out_frame`.
struct SeparableAxis {
  std::size_t space = 0;
  std::uint32_t in_frame = 0;
  std::uint32_t out_frame = 1;

  bool operator==(const SeparableAxis&) const = default;
};

/// weight · (M_0 ⊗ M_1 ⊗ ...). An empty matrix stands for the identity on
/// that axis. Matrices are (output extent) × (input extent).
struct SeparableTerm {
  double weight = 1.0;
  std::vector<Eigen::MatrixXd> factors;
};

/// Sum of Kronecker-structured terms applied one dimension at a time, never
/// forming the full coefficient tensor.
class SeparableOperator {
 public:
  SeparableOperator() = default;
  SeparableOperator(RegistryPtr registry, std::vector<SeparableAxis> axes);

  static SeparableOperator identity(RegistryPtr registry, std::vector<SeparableAxis> axes);

  /// `factors[k]` belongs to axes()[k]; pass an empty matrix for identity.
  SeparableOperator& add_term(double weight, std::vector<Eigen::MatrixXd> factors);
  /// Order-2 factors `space^out, space_in`; axes without a factor are identity.
  SeparableOperator& add_term(double weight, const std::vector<DenseTensor>& factors);

  const RegistryPtr& registry() const noexcept { return registry_; }
  /// Sorted by input index.
  const std::vector<SeparableAxis>& axes() const noexcept { return axes_; }
  const std::vector<SeparableTerm>& terms() const noexcept { return terms_; }
  const IndexSpec& input_spec() const noexcept { return input_; }
  const IndexSpec& output_spec() const noexcept { return output_; }
  /// Indices of the materialized operator: outputs plus covariant inputs.
  IndexSpec dense_spec() const;
  std::size_t size() const;

  DenseTensor apply(const DenseTensor& u) const;
  /// Same result, visiting the axes of each term in `axis_order`.
  DenseTensor apply(const DenseTensor& u, std::span<const std::size_t> axis_order) const;

  /// Diagonal of the flattened operator, laid out over the output spec.
  DenseTensor main_diagonal() const;
  /// Full coefficient tensor built from tensor products of the factors and
  /// Kronecker deltas. Test and debugging aid only.
  DenseTensor materialize() const;
  DenseTensor factor_tensor(std::size_t term, std::size_t axis) const;
  /// Dense matrix over the flattened output (rows) and input (columns).
  Eigen::MatrixXd to_matrix() const;

 private:
  void check_input(const DenseTensor& u) const;

  RegistryPtr registry_;
  std::vector<SeparableAxis> axes_;
  std::vector<SeparableTerm> terms_;
  IndexSpec input_;
  IndexSpec output_;
};

/// a∘b; b's outputs must be a's inputs.
SeparableOperator compose(const SeparableOperator& a, const SeparableOperator& b);
/// Adjoint with input and output frames swapped.
SeparableOperator transpose(const SeparableOperator& op);
/// opᵀ∘op with op's input and output frames.
SeparableOperator gram(const SeparableOperator& op);
SeparableOperator operator+(const SeparableOperator& a, const SeparableOperator& b);
SeparableOperator scaled(double weight, const SeparableOperator& op);
/// Same operator writing to different output frames (one per axis).
SeparableOperator with_outputs(const SeparableOperator& op, std::span<const std::uint32_t> frames);

/// Second-difference Laplacian, one term per dimension, zero ghost values.
/// `spec` names an output and an input frame per space, e.g. "x^1,x_,y^1,y_".
SeparableOperator laplacian(RegistryPtr registry, const IndexSpec& spec, int order = 2);
SeparableOperator laplacian(RegistryPtr registry, std::string_view spec, int order = 2);

/// Frames of an order-2 factor `space^out, space_in`.
struct AxisFrames {
  std::uint32_t out = 1;
  std::uint32_t in = 0;
};

/// Banded matrix M[i][j] = kernel[c + i - j], c the kernel centre; samples
/// outside the grid are zero.
DenseTensor convolution_1d(RegistryPtr registry, std::size_t space, AxisFrames frames,
                           std::span<const double> kernel);

enum class Difference { forward, backward, central };

/// forward: u[i+1]-u[i]; backward: u[i]-u[i-1]; central: (u[i+1]-u[i-1])/2.
DenseTensor finite_difference_1d(RegistryPtr registry, std::size_t space, AxisFrames frames,
                                 Difference variant);

/// Real and imaginary planes of a complex tensor.
struct ComplexTensor {
  DenseTensor re;
  DenseTensor im;
};

/// F[k][n] = exp(-2πi·kn/N).
ComplexTensor dft_1d(RegistryPtr registry, std::size_t space, AxisFrames frames);

/// Applies complex order-2 factors one after another with complex arithmetic
/// over the two planes.
ComplexTensor apply_complex(std::span<const ComplexTensor> factors, const ComplexTensor& u);

enum class Resample { upsample, downsample };

/// Zero-insertion upsampling or decimation by `factor` from `space_in` to
/// `space_out`.
DenseTensor resample_1d(RegistryPtr registry, std::size_t space_in, std::size_t space_out,
                        AxisFrames frames, Resample mode, std::size_t factor);

struct RotationFrames {
  std::size_t x_space = 0;
  std::size_t y_space = 1;
  std::uint32_t in = 0;
  std::uint32_t mid = 1;  // x frame between the two x shears
  std::uint32_t out = 2;
};

/// Three linear-interpolation shears (x, y, x) rotating an image about the
/// grid centre. Each pass resamples one axis with weights that depend on the
/// other axis, so the factors are order 3: x^mid,x_in,y^in then
/// y^out,y_in,x^mid then x^out,x_mid,y^out. Apply them in sequence with
/// tensor_product.
std::vector<DenseTensor> shear_rotation_2d(RegistryPtr registry, const RotationFrames& frames,
                                           double angle);

namespace detail {

/// Multiplies axis `axis` of a row-major array with extents `dims` by `m`.
void mode_product(std::span<const double> src, std::span<const std::size_t> dims,
                  std::size_t axis, const Eigen::MatrixXd& m, std::vector<double>& out);

}  // namespace detail

}  // namespace tensalg
