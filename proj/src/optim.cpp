#include "tcnlab/optim.hpp"

#include <cmath>

namespace tcnlab {

OptimizerKind parse_optimizer_kind(const std::string& s) {
  if (s == "adam") return OptimizerKind::kAdam;
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "rmsprop") return OptimizerKind::kRmsprop;
  throw ConfigError("unknown optimizer '" + s + "' (expected adam, sgd or rmsprop)");
}

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kAdam: return "adam";
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kRmsprop: return "rmsprop";
  }
  return "?";
}

template <typename S>
std::size_t Optimizer<S>::slots() const {
  switch (config_.kind) {
    case OptimizerKind::kAdam: return 2;
    case OptimizerKind::kRmsprop: return 1;
    case OptimizerKind::kSgd: return config_.momentum > 0 ? 1 : 0;
  }
  return 0;
}

template <typename S>
Optimizer<S>::Optimizer(const OptimizerConfig& config, const nn::ParamStore<S>& params) : config_(config) {
  if (!(config_.lr >= 0)) throw ConfigError("optimizer: learning rate must be >= 0");
  static const char* kAdamSlots[] = {"m", "v"};
  for (const auto& p : params) {
    for (std::size_t s = 0; s < slots(); ++s) {
      std::string suffix = config_.kind == OptimizerKind::kAdam     ? kAdamSlots[s]
                           : config_.kind == OptimizerKind::kRmsprop ? "square_avg"
                                                                     : "momentum";
      buffers_.push_back({p.name + ":" + suffix, std::vector<S>(p.tensor.numel(), S(0))});
    }
  }
}

template <typename S>
void Optimizer<S>::step(nn::ParamStore<S>& params) {
  for (auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    for (S g : p.tensor.grad()) {
      if (!std::isfinite(g)) throw NumericalError("non-finite gradient in parameter '" + p.name + "'");
    }
  }
  ++steps_;
  const std::size_t per = slots();
  const S lr = static_cast<S>(config_.lr);
  const S wd = static_cast<S>(config_.weight_decay);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    if (!p.tensor.has_grad()) continue;
    auto w = p.tensor.data();
    auto g = p.tensor.grad();
    const std::size_t n = w.size();
    switch (config_.kind) {
      case OptimizerKind::kAdam: {
        auto& m = buffers_[k * per].data;
        auto& v = buffers_[k * per + 1].data;
        const S b1 = static_cast<S>(config_.beta1), b2 = static_cast<S>(config_.beta2);
        const double t = static_cast<double>(steps_);
        const S c1 = static_cast<S>(1.0 - std::pow(config_.beta1, t));
        const S c2 = static_cast<S>(1.0 - std::pow(config_.beta2, t));
        const S eps = static_cast<S>(config_.eps);
        for (std::size_t i = 0; i < n; ++i) {
          const S gi = g[i] + wd * w[i];
          m[i] = b1 * m[i] + (S(1) - b1) * gi;
          v[i] = b2 * v[i] + (S(1) - b2) * gi * gi;
          const S mhat = m[i] / c1;
          const S vhat = v[i] / c2;
          w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
        break;
      }
      case OptimizerKind::kRmsprop: {
        auto& sq = buffers_[k * per].data;
        const S a = static_cast<S>(config_.alpha);
        const S eps = static_cast<S>(config_.eps);
        for (std::size_t i = 0; i < n; ++i) {
          const S gi = g[i] + wd * w[i];
          sq[i] = a * sq[i] + (S(1) - a) * gi * gi;
          w[i] -= lr * gi / (std::sqrt(sq[i]) + eps);
        }
        break;
      }
      case OptimizerKind::kSgd: {
        if (per == 0) {
          for (std::size_t i = 0; i < n; ++i) w[i] -= lr * (g[i] + wd * w[i]);
        } else {
          auto& buf = buffers_[k * per].data;
          const S mu = static_cast<S>(config_.momentum);
          for (std::size_t i = 0; i < n; ++i) {
            buf[i] = mu * buf[i] + g[i] + wd * w[i];
            w[i] -= lr * buf[i];
          }
        }
        break;
      }
    }
  }
}

template class Optimizer<float>;
template class Optimizer<double>;

PlateauScheduler::PlateauScheduler(double lr, std::size_t patience, double factor, Mode mode, double threshold)
    : lr_(lr), patience_(patience), factor_(factor), mode_(mode), threshold_(threshold) {
  if (patience_ < 1) throw ConfigError("plateau patience must be >= 1");
  if (!(factor_ > 0 && factor_ < 1)) throw ConfigError("plateau factor must lie in (0, 1)");
}

bool PlateauScheduler::improved(double metric) const {
  if (mode_ == Mode::kMin) return metric < best_ - threshold_ * std::abs(best_);
  return metric > best_ + threshold_ * std::abs(best_);
}

double PlateauScheduler::observe(double metric) {
  if (!has_best_ || improved(metric)) {
    has_best_ = true;
    best_ = metric;
    bad_ = 0;
    return lr_;
  }
  if (++bad_ >= patience_) {
    lr_ *= factor_;
    bad_ = 0;
    ++reductions_;
  }
  return lr_;
}

double anneal_on_plateau(double lr, std::span<const double> history, double factor, std::size_t patience) {
  PlateauScheduler sched(lr, patience, factor);
  for (double m : history) sched.observe(m);
  return sched.lr();
}

}  // namespace tcnlab
