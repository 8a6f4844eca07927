#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tcnlab/errors.hpp"

namespace tcnlab {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape);

template <typename S>
struct TensorImpl {
  Shape shape;
  std::vector<S> data;
  std::vector<S> grad;  // empty until the first gradient is accumulated
  bool requires_grad = false;
};

/// Dense row-major array with an optional gradient buffer.
///
/// A Tensor is a shared handle: copies alias the same storage. Use clone()
/// for a deep copy. `float` is the training precision, `double` the extended
/// precision used by gradient checks.
template <typename S>
class Tensor {
 public:
  using value_type = S;

  Tensor() = default;

  explicit Tensor(Shape shape, S fill = S(0)) : impl_(std::make_shared<TensorImpl<S>>()) {
    impl_->data.assign(shape_numel(shape), fill);
    impl_->shape = std::move(shape);
  }

  Tensor(Shape shape, std::vector<S> data) : impl_(std::make_shared<TensorImpl<S>>()) {
    if (shape_numel(shape) != data.size()) {
      throw ShapeError("tensor data length " + std::to_string(data.size()) +
                       " does not match shape " + shape_str(shape));
    }
    impl_->shape = std::move(shape);
    impl_->data = std::move(data);
  }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), S(0)); }
  static Tensor ones(Shape shape) { return Tensor(std::move(shape), S(1)); }
  static Tensor scalar(S value) { return Tensor(Shape{}, value); }

  bool defined() const noexcept { return impl_ != nullptr; }
  bool same(const Tensor& other) const noexcept { return impl_ == other.impl_; }

  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t dim(std::size_t i) const { return impl_->shape.at(i); }
  std::size_t numel() const { return impl_->data.size(); }

  // Handle semantics: constness of the handle does not extend to the storage.
  std::span<S> data() const { return impl_->data; }
  S* ptr() const { return impl_->data.data(); }

  S item() const {
    if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
    return impl_->data[0];
  }

  bool requires_grad() const { return impl_ && impl_->requires_grad; }
  const Tensor& set_requires_grad(bool on) const {
    impl_->requires_grad = on;
    return *this;
  }

  bool has_grad() const { return !impl_->grad.empty(); }

  /// Gradient buffer, allocated (zero-filled) on first access.
  std::span<S> grad() const {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), S(0));
    return impl_->grad;
  }

  void zero_grad() const {
    if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), S(0));
  }
  void drop_grad() const {
    impl_->grad.clear();
    impl_->grad.shrink_to_fit();
  }

  Tensor clone() const {
    Tensor out(impl_->shape, impl_->data);
    out.impl_->requires_grad = impl_->requires_grad;
    return out;
  }

  template <typename T>
  Tensor<T> cast() const {
    std::vector<T> out(impl_->data.begin(), impl_->data.end());
    return Tensor<T>(impl_->shape, std::move(out));
  }

  bool all_finite() const {
    for (S v : impl_->data)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  std::shared_ptr<TensorImpl<S>> impl_;
};

/// Enables NaN/Inf checks on every op output. Off by default; tests turn it on.
void set_finite_checks(bool on);
bool finite_checks_enabled();

}  // namespace tcnlab
