#include "tensalg/separable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "tensalg/error.hpp"
#include "tensalg/product.hpp"

namespace tensalg {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

std::string axis_text(const SpaceRegistry& r, const SeparableAxis& a) {
  return r.space(a.space).name + " " + std::to_string(a.in_frame) + "->" +
         std::to_string(a.out_frame);
}

}  // namespace

namespace detail {

void mode_product(std::span<const double> src, std::span<const std::size_t> dims,
                  std::size_t axis, const Eigen::MatrixXd& m, std::vector<double>& out) {
  std::size_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < axis; ++k) outer *= dims[k];
  for (std::size_t k = axis + 1; k < dims.size(); ++k) inner *= dims[k];
  const auto n = static_cast<Eigen::Index>(dims[axis]);
  const auto rows = m.rows();
  const auto cols = static_cast<Eigen::Index>(inner);
  if (m.cols() != n) throw ShapeError("mode product: factor width does not match the axis extent");
  out.resize(outer * static_cast<std::size_t>(rows) * inner);
  for (std::size_t o = 0; o < outer; ++o) {
    Eigen::Map<const RowMajor> block(src.data() + o * dims[axis] * inner, n, cols);
    Eigen::Map<RowMajor> dst(out.data() + o * static_cast<std::size_t>(rows) * inner, rows, cols);
    dst.noalias() = m * block;
  }
}

}  // namespace detail

SeparableOperator::SeparableOperator(RegistryPtr registry, std::vector<SeparableAxis> axes)
    : registry_(std::move(registry)), axes_(std::move(axes)) {
  if (!registry_) throw ShapeError("separable operator needs a registry");
  if (axes_.empty()) throw ShapeError("separable operator needs at least one axis");
  std::sort(axes_.begin(), axes_.end(), [](const auto& a, const auto& b) {
    return a.space != b.space ? a.space < b.space : a.in_frame < b.in_frame;
  });
  std::set<std::pair<std::size_t, std::uint32_t>> inputs, outputs;
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const auto& a = axes_[k];
    if (a.space >= registry_->size()) throw ShapeError("separable axis refers to an unknown space");
    if (!inputs.insert({a.space, a.in_frame}).second || !outputs.insert({a.space, a.out_frame}).second)
      throw ShapeError("separable axes repeat a frame on " + axis_text(*registry_, a));
    if (k > 0 && axes_[k - 1].space == a.space && axes_[k - 1].out_frame > a.out_frame)
      throw ShapeError("separable axes must keep input and output frames in the same order");
    input_.push_back(up(a.space, a.in_frame));
    output_.push_back(up(a.space, a.out_frame));
  }
  for (const auto& o : outputs)
    if (inputs.count(o))
      throw ShapeError("separable operator uses the same frame for an input and an output on space '" +
                       registry_->space(o.first).name + "'");
  registry_->freeze();
}

SeparableOperator SeparableOperator::identity(RegistryPtr registry, std::vector<SeparableAxis> axes) {
  SeparableOperator op(std::move(registry), std::move(axes));
  op.add_term(1.0, std::vector<Eigen::MatrixXd>(op.axes().size()));
  return op;
}

SeparableOperator& SeparableOperator::add_term(double weight, std::vector<Eigen::MatrixXd> factors) {
  if (factors.size() != axes_.size())
    throw ShapeError("separable term has " + std::to_string(factors.size()) + " factors for " +
                     std::to_string(axes_.size()) + " axes");
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const auto n = static_cast<Eigen::Index>(registry_->extent(axes_[k].space));
    if (factors[k].size() != 0 && (factors[k].rows() != n || factors[k].cols() != n))
      throw ShapeError("separable factor for " + axis_text(*registry_, axes_[k]) + " must be " +
                       std::to_string(n) + "x" + std::to_string(n));
  }
  terms_.push_back({weight, std::move(factors)});
  return *this;
}

SeparableOperator& SeparableOperator::add_term(double weight, const std::vector<DenseTensor>& factors) {
  std::vector<Eigen::MatrixXd> mats(axes_.size());
  for (const auto& f : factors) {
    if (!same_registry(f.registry(), registry_))
      throw ShapeError("separable factor uses a different registry");
    if (f.order() != 2) throw ShapeError("separable factor must be order 2, got '" + f.spec_string() + "'");
    const auto& idx = f.indices();
    const TensorIndex* out = nullptr;
    const TensorIndex* in = nullptr;
    for (const auto& i : idx) (i.variance == Variance::contravariant ? out : in) = &i;
    if (!out || !in || out->space != in->space)
      throw ShapeError("separable factor '" + f.spec_string() + "' must map one space to itself");
    auto it = std::find(axes_.begin(), axes_.end(), SeparableAxis{in->space, in->frame, out->frame});
    if (it == axes_.end())
      throw ShapeError("separable factor '" + f.spec_string() + "' matches no operator axis");
    auto& slot = mats[static_cast<std::size_t>(it - axes_.begin())];
    if (slot.size() != 0) throw ShapeError("two separable factors for the same axis");
    slot = matricize(f, {*out}, {*in});
  }
  return add_term(weight, std::move(mats));
}

IndexSpec SeparableOperator::dense_spec() const {
  IndexSpec spec = output_;
  for (const auto& i : input_) spec.push_back(i.flipped());
  return canonical(std::move(spec));
}

std::size_t SeparableOperator::size() const { return extent_product(*registry_, input_); }

void SeparableOperator::check_input(const DenseTensor& u) const {
  if (!same_registry(u.registry(), registry_))
    throw ShapeError("separable apply: operand uses a different registry");
  if (u.indices() != input_)
    throw ShapeError("separable apply: expected '" + print_index_spec(*registry_, input_) + "', got '" +
                     u.spec_string() + "'");
}

DenseTensor SeparableOperator::apply(const DenseTensor& u) const {
  std::vector<std::size_t> order(axes_.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  return apply(u, order);
}

DenseTensor SeparableOperator::apply(const DenseTensor& u, std::span<const std::size_t> axis_order) const {
  check_input(u);
  std::vector<bool> seen(axes_.size(), false);
  if (axis_order.size() != axes_.size()) throw ShapeError("axis order must list every axis once");
  for (auto k : axis_order) {
    if (k >= axes_.size() || seen[k]) throw ShapeError("axis order must list every axis once");
    seen[k] = true;
  }
  const auto dims = u.extents();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(u.size()));
  std::vector<double> a, b;
  for (const auto& term : terms_) {
    std::span<const double> cur = u.data();
    for (auto k : axis_order) {
      if (term.factors[k].size() == 0) continue;
      detail::mode_product(cur, dims, k, term.factors[k], a);
      std::swap(a, b);
      cur = b;
    }
    acc += term.weight * Eigen::Map<const Eigen::VectorXd>(cur.data(), acc.size());
  }
  return DenseTensor::from_canonical(registry_, output_, {acc.data(), acc.data() + acc.size()});
}

DenseTensor SeparableOperator::main_diagonal() const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
  for (const auto& term : terms_) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Constant(1, 1, term.weight);
    for (std::size_t k = 0; k < axes_.size(); ++k) {
      const auto n = static_cast<Eigen::Index>(registry_->extent(axes_[k].space));
      Eigen::MatrixXd diag = term.factors[k].size() ? Eigen::MatrixXd(term.factors[k].diagonal())
                                                    : Eigen::MatrixXd::Ones(n, 1);
      d = kron(d, diag);
    }
    acc += d.col(0);
  }
  return DenseTensor::from_canonical(registry_, output_, {acc.data(), acc.data() + acc.size()});
}

DenseTensor SeparableOperator::factor_tensor(std::size_t term, std::size_t axis) const {
  const auto& a = axes_.at(axis);
  const auto& m = terms_.at(term).factors.at(axis);
  if (m.size() == 0) return make_delta(registry_, {{up(a.space, a.out_frame), down(a.space, a.in_frame)}});
  return from_matrix(registry_, {up(a.space, a.out_frame)}, {down(a.space, a.in_frame)}, m);
}

DenseTensor SeparableOperator::materialize() const {
  DenseTensor acc = DenseTensor::zeros(registry_, dense_spec());
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    std::vector<DenseTensor> parts;
    for (std::size_t k = 0; k < axes_.size(); ++k) parts.push_back(factor_tensor(t, k));
    acc = acc + terms_[t].weight * tensor_product(parts);
  }
  return acc;
}

Eigen::MatrixXd SeparableOperator::to_matrix() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  for (const auto& term : terms_) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Constant(1, 1, term.weight);
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      const auto e = static_cast<Eigen::Index>(registry_->extent(axes_[a].space));
      k = kron(k, term.factors[a].size() ? term.factors[a] : Eigen::MatrixXd::Identity(e, e));
    }
    acc += k;
  }
  return acc;
}

namespace {

void require_same_axes(const SeparableOperator& a, const SeparableOperator& b, const char* what) {
  if (!same_registry(a.registry(), b.registry()) || a.axes() != b.axes())
    throw ShapeError(std::string(what) + ": operators act on different axes");
}

Eigen::MatrixXd product_or_identity(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.size() == 0) return b;
  if (b.size() == 0) return a;
  return a * b;
}

}  // namespace

SeparableOperator compose(const SeparableOperator& a, const SeparableOperator& b) {
  if (!same_registry(a.registry(), b.registry())) throw ShapeError("compose: different registries");
  if (a.input_spec() != b.output_spec())
    throw ShapeError("compose: outputs '" + print_index_spec(*b.registry(), b.output_spec()) +
                     "' do not feed inputs '" + print_index_spec(*a.registry(), a.input_spec()) + "'");
  std::vector<SeparableAxis> axes;
  for (std::size_t k = 0; k < a.axes().size(); ++k)
    axes.push_back({a.axes()[k].space, b.axes()[k].in_frame, a.axes()[k].out_frame});
  SeparableOperator out(a.registry(), axes);
  for (const auto& ta : a.terms())
    for (const auto& tb : b.terms()) {
      std::vector<Eigen::MatrixXd> f(axes.size());
      for (std::size_t k = 0; k < axes.size(); ++k) f[k] = product_or_identity(ta.factors[k], tb.factors[k]);
      out.add_term(ta.weight * tb.weight, std::move(f));
    }
  return out;
}

SeparableOperator transpose(const SeparableOperator& op) {
  std::vector<SeparableAxis> axes;
  for (const auto& a : op.axes()) axes.push_back({a.space, a.out_frame, a.in_frame});
  SeparableOperator out(op.registry(), axes);
  // Axes are re-sorted by the new inputs; the old order is kept when frames are monotone.
  for (const auto& t : op.terms()) {
    std::vector<Eigen::MatrixXd> f;
    for (const auto& m : t.factors) f.push_back(m.transpose());
    out.add_term(t.weight, std::move(f));
  }
  return out;
}

SeparableOperator gram(const SeparableOperator& op) {
  SeparableOperator out(op.registry(), op.axes());
  for (const auto& ta : op.terms())
    for (const auto& tb : op.terms()) {
      std::vector<Eigen::MatrixXd> f(op.axes().size());
      for (std::size_t k = 0; k < f.size(); ++k) {
        const auto& x = ta.factors[k];
        const auto& y = tb.factors[k];
        if (x.size() == 0) f[k] = y;
        else if (y.size() == 0) f[k] = x.transpose();
        else f[k] = x.transpose() * y;
      }
      out.add_term(ta.weight * tb.weight, std::move(f));
    }
  return out;
}

SeparableOperator operator+(const SeparableOperator& a, const SeparableOperator& b) {
  require_same_axes(a, b, "operator sum");
  SeparableOperator out = a;
  for (const auto& t : b.terms()) out.add_term(t.weight, t.factors);
  return out;
}

SeparableOperator scaled(double weight, const SeparableOperator& op) {
  SeparableOperator out(op.registry(), op.axes());
  for (const auto& t : op.terms()) out.add_term(weight * t.weight, t.factors);
  return out;
}

SeparableOperator with_outputs(const SeparableOperator& op, std::span<const std::uint32_t> frames) {
  if (frames.size() != op.axes().size()) throw ShapeError("with_outputs: one frame per axis required");
  auto axes = op.axes();
  for (std::size_t k = 0; k < axes.size(); ++k) axes[k].out_frame = frames[k];
  SeparableOperator out(op.registry(), axes);
  if (out.axes() != axes) throw ShapeError("with_outputs: frames would reorder the axes");
  for (const auto& t : op.terms()) out.add_term(t.weight, t.factors);
  return out;
}

SeparableOperator laplacian(RegistryPtr registry, const IndexSpec& spec, int order) {
  if (order != 2)
    throw Error("unsupported Laplacian order " + std::to_string(order) + " (only 2 is available)");
  check_no_duplicates(spec);
  std::vector<SeparableAxis> axes;
  std::vector<std::size_t> spaces;
  for (const auto& i : spec)
    if (std::find(spaces.begin(), spaces.end(), i.space) == spaces.end()) spaces.push_back(i.space);
  for (auto s : spaces) {
    const TensorIndex* out = nullptr;
    const TensorIndex* in = nullptr;
    int n_out = 0, n_in = 0;
    for (const auto& i : spec) {
      if (i.space != s) continue;
      if (i.variance == Variance::contravariant) out = &i, ++n_out;
      else in = &i, ++n_in;
    }
    if (n_out != 1 || n_in != 1)
      throw ShapeError("Laplacian spec needs exactly one output and one input index on space '" +
                       registry->space(s).name + "'");
    axes.push_back({s, in->frame, out->frame});
  }
  SeparableOperator op(registry, axes);
  for (std::size_t k = 0; k < op.axes().size(); ++k) {
    const auto n = static_cast<Eigen::Index>(registry->extent(op.axes()[k].space));
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      m(i, i) = -2.0;
      if (i > 0) m(i, i - 1) = 1.0;
      if (i + 1 < n) m(i, i + 1) = 1.0;
    }
    std::vector<Eigen::MatrixXd> f(op.axes().size());
    f[k] = std::move(m);
    op.add_term(1.0, std::move(f));
  }
  return op;
}

SeparableOperator laplacian(RegistryPtr registry, std::string_view spec, int order) {
  const auto parsed = parse_index_spec(*registry, spec);
  return laplacian(std::move(registry), parsed, order);
}

namespace {

DenseTensor axis_matrix(const RegistryPtr& registry, std::size_t space_out, std::size_t space_in,
                        AxisFrames frames, const Eigen::MatrixXd& m) {
  return from_matrix(registry, {up(space_out, frames.out)}, {down(space_in, frames.in)}, m);
}

// Correlation-style stencil: out[i] = sum_k w[k] u[i + k - c].
Eigen::MatrixXd stencil_matrix(std::size_t n, std::span<const double> w) {
  const auto c = static_cast<std::ptrdiff_t>(w.size() / 2);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(w.size()); ++k) {
      const std::ptrdiff_t j = i + k - c;
      if (j >= 0 && j < static_cast<std::ptrdiff_t>(n)) m(i, j) += w[static_cast<std::size_t>(k)];
    }
  return m;
}

}  // namespace

DenseTensor convolution_1d(RegistryPtr registry, std::size_t space, AxisFrames frames,
                           std::span<const double> kernel) {
  if (kernel.size() % 2 == 0)
    throw ShapeError("convolution kernel length must be odd, got " + std::to_string(kernel.size()));
  std::vector<double> flipped(kernel.rbegin(), kernel.rend());
  return axis_matrix(registry, space, space, frames, stencil_matrix(registry->extent(space), flipped));
}

DenseTensor finite_difference_1d(RegistryPtr registry, std::size_t space, AxisFrames frames,
                                 Difference variant) {
  std::vector<double> w;
  switch (variant) {
    case Difference::forward: w = {0.0, -1.0, 1.0}; break;
    case Difference::backward: w = {-1.0, 1.0, 0.0}; break;
    case Difference::central: w = {-0.5, 0.0, 0.5}; break;
  }
  return axis_matrix(registry, space, space, frames, stencil_matrix(registry->extent(space), w));
}

ComplexTensor dft_1d(RegistryPtr registry, std::size_t space, AxisFrames frames) {
  const std::size_t n = registry->extent(space);
  const auto en = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd re(en, en), im(en, en);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((k * j) % n) / static_cast<double>(n);
      re(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = std::cos(angle);
      im(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = std::sin(angle);
    }
  return {axis_matrix(registry, space, space, frames, re), axis_matrix(registry, space, space, frames, im)};
}

ComplexTensor apply_complex(std::span<const ComplexTensor> factors, const ComplexTensor& u) {
  require_same_shape(u.re, u.im, "complex tensor");
  ComplexTensor cur = u;
  for (const auto& f : factors) {
    require_same_shape(f.re, f.im, "complex factor");
    ComplexTensor next{tensor_product(f.re, cur.re) - tensor_product(f.im, cur.im),
                       tensor_product(f.re, cur.im) + tensor_product(f.im, cur.re)};
    cur = std::move(next);
  }
  return cur;
}

DenseTensor resample_1d(RegistryPtr registry, std::size_t space_in, std::size_t space_out,
                        AxisFrames frames, Resample mode, std::size_t factor) {
  if (factor == 0) throw ShapeError("resampling factor must be positive");
  const std::size_t n_in = registry->extent(space_in);
  const std::size_t n_out = registry->extent(space_out);
  const bool up_mode = mode == Resample::upsample;
  if ((up_mode && n_out != factor * n_in) || (!up_mode && n_in != factor * n_out))
    throw ShapeError("resampling by " + std::to_string(factor) + " cannot map extent " +
                     std::to_string(n_in) + " to " + std::to_string(n_out));
  if (space_in == space_out && frames.in == frames.out)
    throw ShapeError("resampling needs distinct input and output frames");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_out), static_cast<Eigen::Index>(n_in));
  if (up_mode) {
    for (std::size_t j = 0; j < n_in; ++j) m(static_cast<Eigen::Index>(factor * j), static_cast<Eigen::Index>(j)) = 1.0;
  } else {
    for (std::size_t i = 0; i < n_out; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(factor * i)) = 1.0;
  }
  return axis_matrix(registry, space_out, space_in, frames, m);
}

namespace {

// Resampling weights of one shear pass: out[a] = u(a - amount·(b - centre_b))
// along an axis of length n, for every position b of the other axis (length m).
// Values are laid out as [a][source][b].
std::vector<double> shear_weights(std::size_t n, std::size_t m, double amount) {
  std::vector<double> w(n * n * m, 0.0);
  const double cb = (static_cast<double>(m) - 1.0) / 2.0;
  for (std::size_t b = 0; b < m; ++b)
    for (std::size_t a = 0; a < n; ++a) {
      const double src = static_cast<double>(a) - amount * (static_cast<double>(b) - cb);
      const double base = std::floor(src);
      const double frac = src - base;
      const auto i0 = static_cast<std::ptrdiff_t>(base);
      for (int d = 0; d < 2; ++d) {
        const std::ptrdiff_t j = i0 + d;
        const double weight = d == 0 ? 1.0 - frac : frac;
        if (j < 0 || j >= static_cast<std::ptrdiff_t>(n) || weight == 0.0) continue;
        w[(a * n + static_cast<std::size_t>(j)) * m + b] += weight;
      }
    }
  return w;
}

}  // namespace

std::vector<DenseTensor> shear_rotation_2d(RegistryPtr registry, const RotationFrames& f, double angle) {
  if (!(std::abs(angle) < std::numbers::pi / 2))
    throw ShapeError("rotation angle must lie strictly between -pi/2 and pi/2");
  if (f.x_space == f.y_space) throw ShapeError("rotation needs two distinct spaces");
  if (f.in == f.mid || f.mid == f.out || f.in == f.out)
    throw ShapeError("rotation frames must be distinct");
  const std::size_t nx = registry->extent(f.x_space);
  const std::size_t ny = registry->extent(f.y_space);
  const double a = -std::tan(angle / 2);
  const double b = std::sin(angle);
  const auto x = f.x_space, y = f.y_space;
  return {
      DenseTensor(registry, IndexSpec{up(x, f.mid), down(x, f.in), up(y, f.in)}, shear_weights(nx, ny, a)),
      DenseTensor(registry, IndexSpec{up(y, f.out), down(y, f.in), up(x, f.mid)}, shear_weights(ny, nx, b)),
      DenseTensor(registry, IndexSpec{up(x, f.out), down(x, f.mid), up(y, f.out)}, shear_weights(nx, ny, a)),
  };
}

}  // namespace tensalg
