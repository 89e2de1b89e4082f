#include "tensalg/linear_map.hpp"

#include <algorithm>

#include "tensalg/error.hpp"
#include "tensalg/product.hpp"

namespace tensalg {

LinearMap::LinearMap(DenseTensor system) : registry_(system.registry()) {
  for (const auto& i : system.indices()) {
    if (i.variance == Variance::contravariant) output_.push_back(i);
    else input_.push_back(i.flipped());
  }
  input_ = canonical(std::move(input_));
  if (input_.size() != output_.size())
    throw ShapeError("system '" + system.spec_string() + "' needs as many outputs as inputs");
  for (std::size_t k = 0; k < input_.size(); ++k) {
    if (input_[k].space != output_[k].space)
      throw ShapeError("system '" + system.spec_string() + "' pairs outputs and inputs of different spaces");
    if (input_[k] == output_[k])
      throw ShapeError("system '" + system.spec_string() + "' has an input frame equal to its output frame");
  }
  for (const auto& i : input_)
    if (std::find(output_.begin(), output_.end(), i) != output_.end())
      throw ShapeError("system '" + system.spec_string() + "' reuses an output frame as an input");
  dense_ = std::move(system);
}

LinearMap::LinearMap(SeparableOperator op)
    : registry_(op.registry()), input_(op.input_spec()), output_(op.output_spec()), separable_(std::move(op)) {}

std::size_t LinearMap::size() const { return extent_product(*registry_, input_); }

DenseTensor LinearMap::apply(const DenseTensor& u) const {
  if (separable_) return separable_->apply(u);
  if (!same_registry(u.registry(), registry_) || u.indices() != input_)
    throw ShapeError("system apply: expected '" + print_index_spec(*registry_, input_) + "', got '" +
                     u.spec_string() + "'");
  return tensor_product(*dense_, u);
}

DenseTensor LinearMap::main_diagonal() const {
  if (separable_) return separable_->main_diagonal();
  Eigen::VectorXd d = matricize(*dense_, output_, negate_spec(input_)).diagonal();
  return DenseTensor::from_canonical(registry_, output_, {d.data(), d.data() + d.size()});
}

Eigen::MatrixXd LinearMap::to_matrix() const {
  if (separable_) return separable_->to_matrix();
  return matricize(*dense_, output_, negate_spec(input_));
}

DenseTensor LinearMap::output_to_input(const DenseTensor& r) const { return reindex(r, output_, input_); }

DenseTensor LinearMap::input_to_output(const DenseTensor& u) const { return reindex(u, input_, output_); }

DenseTensor LinearMap::zero_input() const { return DenseTensor::zeros(registry_, input_); }

DenseTensor LinearMap::zero_output() const { return DenseTensor::zeros(registry_, output_); }

}  // namespace tensalg
