#ifndef ADENET_HARNESS_ADAM_HPP
#define ADENET_HARNESS_ADAM_HPP

#include <cmath>

#include "adenet/nn/layers.hpp"

namespace adenet {

// Adam with L2 weight decay folded into the gradient and global-norm clipping
// applied to the raw gradients before the moment update.
template <class S>
class Adam {
 public:
  Adam() = default;
  Adam(const ParamSet<S>& ps, double weight_decay, double grad_clip)
      : weight_decay_(weight_decay), grad_clip_(grad_clip) {
    for (const auto& [name, v] : ps.params()) {
      m_.push_back(Tensor<S>::zeros(v->value.shape));
      v_.push_back(Tensor<S>::zeros(v->value.shape));
    }
  }

  void step(ParamSet<S>& ps, double lr) {
    auto& params = ps.params();
    check(params.size() == m_.size(), ErrorKind::kConfig,
          "adam: parameter set changed size");
    if (grad_clip_ > 0) {
      double sq = 0;
      for (auto& [name, p] : params) {
        if (!p->grad.numel()) continue;
        for (const auto& g : p->grad.data) sq += double(g) * double(g);
      }
      const double norm = std::sqrt(sq);
      if (norm > grad_clip_) {
        const S scale = S(grad_clip_ / norm);
        for (auto& [name, p] : params) {
          if (!p->grad.numel()) continue;
          for (auto& g : p->grad.data) g *= scale;
        }
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, double(t_));
    const double bc2 = 1.0 - std::pow(beta2_, double(t_));
    for (size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i].second;
      p->ensure_grad();
      auto& m = m_[i];
      auto& v = v_[i];
      for (int64_t j = 0; j < p->value.numel(); ++j) {
        const double g =
            double(p->grad[j]) + weight_decay_ * double(p->value[j]);
        const double mj = beta1_ * double(m[j]) + (1.0 - beta1_) * g;
        const double vj = beta2_ * double(v[j]) + (1.0 - beta2_) * g * g;
        m[j] = S(mj);
        v[j] = S(vj);
        p->value[j] -=
            S(lr * (mj / bc1) / (std::sqrt(vj / bc2) + eps_));
      }
    }
  }

  int64_t steps() const { return t_; }
  std::vector<Tensor<S>>& moment1() { return m_; }
  std::vector<Tensor<S>>& moment2() { return v_; }
  void set_steps(int64_t t) { t_ = t; }

 private:
  std::vector<Tensor<S>> m_, v_;
  int64_t t_ = 0;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  double weight_decay_ = 0.0;
  double grad_clip_ = 0.0;
};

}  // namespace adenet

#endif  // ADENET_HARNESS_ADAM_HPP
