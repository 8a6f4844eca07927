#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tcnlab/rng.hpp"
#include "tcnlab/tensor.hpp"

namespace tcnlab::nn {

template <typename S>
struct NamedParam {
  std::string name;
  Tensor<S> tensor;
};

/// Ordered, named collection of trainable tensors. Every parameter appears
/// exactly once.
template <typename S>
class ParamStore {
 public:
  void add(std::string name, Tensor<S> tensor) {
    for (const auto& p : params_) {
      if (p.name == name) throw ContractError("duplicate parameter name '" + name + "'");
      if (p.tensor.same(tensor)) throw ContractError("parameter '" + name + "' registered twice");
    }
    tensor.set_requires_grad(true);
    params_.push_back({std::move(name), std::move(tensor)});
  }

  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  NamedParam<S>& operator[](std::size_t i) { return params_[i]; }
  const NamedParam<S>& operator[](std::size_t i) const { return params_[i]; }

  const Tensor<S>* find(const std::string& name) const {
    for (const auto& p : params_)
      if (p.name == name) return &p.tensor;
    return nullptr;
  }

  std::vector<Tensor<S>> tensors() const {
    std::vector<Tensor<S>> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p.tensor);
    return out;
  }

  /// Exact number of scalar parameters.
  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.tensor.numel();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p.tensor.zero_grad();
  }

 private:
  std::vector<NamedParam<S>> params_;
};

template <typename S>
std::size_t param_count(const ParamStore<S>& params) {
  return params.count();
}

template <typename S>
void fill_normal(Tensor<S>& t, Rng& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (S& v : t.data()) v = static_cast<S>(dist(rng));
}

template <typename S>
void fill_uniform(Tensor<S>& t, Rng& rng, double bound) {
  for (S& v : t.data()) v = static_cast<S>((2.0 * uniform01(rng) - 1.0) * bound);
}

}  // namespace tcnlab::nn
