#ifndef ADENET_NN_LAYERS_HPP
#define ADENET_NN_LAYERS_HPP

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "adenet/core/ops.hpp"
#include "adenet/core/ops_conv.hpp"

namespace adenet {

// Owns every trainable tensor and every running-stat buffer of a model, in
// construction order. Checkpoints and the optimizer walk this list; layer
// objects only hold handles. Names follow <module>.<layer>.<index>.{weight,...}.
template <class S>
class ParamSet {
 public:
  explicit ParamSet(uint64_t seed) : rng_(seed) {}

  Var<S> fan_in_uniform(const std::string& name, Shape shape, int64_t fan_in) {
    const double bound = 1.0 / std::sqrt(double(fan_in));
    auto v = leaf(Tensor<S>::uniform(std::move(shape), rng_, -bound, bound), name);
    params_.emplace_back(name, v);
    return v;
  }

  Var<S> constant_param(const std::string& name, Shape shape, double value) {
    auto v = leaf(Tensor<S>::full(std::move(shape), S(value)), name);
    params_.emplace_back(name, v);
    return v;
  }

  std::shared_ptr<Tensor<S>> buffer(const std::string& name, Shape shape,
                                    double value) {
    auto t = std::make_shared<Tensor<S>>(Tensor<S>::full(std::move(shape), S(value)));
    buffers_.emplace_back(name, t);
    return t;
  }

  std::vector<std::pair<std::string, Var<S>>>& params() { return params_; }
  const std::vector<std::pair<std::string, Var<S>>>& params() const {
    return params_;
  }
  std::vector<std::pair<std::string, std::shared_ptr<Tensor<S>>>>& buffers() {
    return buffers_;
  }
  const std::vector<std::pair<std::string, std::shared_ptr<Tensor<S>>>>& buffers()
      const {
    return buffers_;
  }

  Var<S> find(const std::string& name) const {
    for (const auto& [n, v] : params_)
      if (n == name) return v;
    return nullptr;
  }

  bool has_param_containing(const std::string& fragment) const {
    for (const auto& [n, v] : params_)
      if (n.find(fragment) != std::string::npos) return true;
    return false;
  }

  void zero_grads() {
    for (auto& [n, v] : params_) v->zero_grad();
  }

  int64_t total_elements() const {
    int64_t n = 0;
    for (const auto& [nm, v] : params_) n += v->value.numel();
    return n;
  }

 private:
  Rng rng_;
  std::vector<std::pair<std::string, Var<S>>> params_;
  std::vector<std::pair<std::string, std::shared_ptr<Tensor<S>>>> buffers_;
};

// ---- basic layers ---------------------------------------------------------

template <class S>
struct Linear {
  Var<S> w, b;

  Linear() = default;
  Linear(ParamSet<S>& ps, const std::string& prefix, int64_t in, int64_t out) {
    w = ps.fan_in_uniform(prefix + ".weight", {in, out}, in);
    b = ps.constant_param(prefix + ".bias", {out}, 0.0);
  }
  Var<S> forward(const Var<S>& x) const {  // x[T,in] -> [T,out]
    return add_rowvec(matmul(x, w), b);
  }
};

template <class S>
struct Conv1dLayer {
  Var<S> w, b;
  int64_t stride = 1, pad = 0, dilation = 1, groups = 1;

  Conv1dLayer() = default;
  Conv1dLayer(ParamSet<S>& ps, const std::string& prefix, int64_t ci, int64_t co,
              int64_t k, int64_t stride_, int64_t pad_, int64_t dilation_ = 1,
              int64_t groups_ = 1, bool bias = true)
      : stride(stride_), pad(pad_), dilation(dilation_), groups(groups_) {
    w = ps.fan_in_uniform(prefix + ".weight", {co, ci / groups_, k},
                          (ci / groups_) * k);
    if (bias) b = ps.constant_param(prefix + ".bias", {co}, 0.0);
  }
  Var<S> forward(const Var<S>& x) const {
    return conv1d(x, w, b, stride, pad, pad, dilation, groups);
  }
};

template <class S>
struct ConvT1dLayer {
  Var<S> w, b;
  int64_t stride = 1;

  ConvT1dLayer() = default;
  ConvT1dLayer(ParamSet<S>& ps, const std::string& prefix, int64_t ci, int64_t co,
               int64_t k, int64_t stride_, bool bias = true)
      : stride(stride_) {
    w = ps.fan_in_uniform(prefix + ".weight", {ci, co, k}, ci * k);
    if (bias) b = ps.constant_param(prefix + ".bias", {co}, 0.0);
  }
  Var<S> forward(const Var<S>& x) const { return conv_transpose1d(x, w, b, stride); }
};

template <class S>
struct Conv2dLayer {
  Var<S> w, b;
  int64_t sh = 1, sw = 1, ph = 0, pw = 0;

  Conv2dLayer() = default;
  Conv2dLayer(ParamSet<S>& ps, const std::string& prefix, int64_t ci, int64_t co,
              int64_t kh, int64_t kw, int64_t sh_, int64_t sw_, int64_t ph_,
              int64_t pw_, bool bias = true)
      : sh(sh_), sw(sw_), ph(ph_), pw(pw_) {
    w = ps.fan_in_uniform(prefix + ".weight", {co, ci, kh, kw}, ci * kh * kw);
    if (bias) b = ps.constant_param(prefix + ".bias", {co}, 0.0);
  }
  Var<S> forward(const Var<S>& x) const { return conv2d(x, w, b, sh, sw, ph, pw); }
};

template <class S>
struct Conv3dLayer {
  Var<S> w, b;
  int64_t st = 1, sh = 1, sw = 1, pt = 0, ph = 0, pw = 0;

  Conv3dLayer() = default;
  Conv3dLayer(ParamSet<S>& ps, const std::string& prefix, int64_t ci, int64_t co,
              int64_t kt, int64_t kh, int64_t kw, int64_t st_, int64_t sh_,
              int64_t sw_, int64_t pt_, int64_t ph_, int64_t pw_,
              bool bias = true)
      : st(st_), sh(sh_), sw(sw_), pt(pt_), ph(ph_), pw(pw_) {
    w = ps.fan_in_uniform(prefix + ".weight", {co, ci, kt, kh, kw},
                          ci * kt * kh * kw);
    if (bias) b = ps.constant_param(prefix + ".bias", {co}, 0.0);
  }
  Var<S> forward(const Var<S>& x) const {
    return conv3d(x, w, b, st, sh, sw, pt, ph, pw);
  }
};

enum class BnLayout { kChannelMajor, kNchw };

template <class S>
struct BatchNorm {
  Var<S> gamma, beta;
  std::shared_ptr<Tensor<S>> running_mean, running_var;
  BnLayout layout = BnLayout::kChannelMajor;
  double momentum = 0.1;
  double eps = 1e-5;

  BatchNorm() = default;
  BatchNorm(ParamSet<S>& ps, const std::string& prefix, int64_t c, BnLayout lay)
      : layout(lay) {
    gamma = ps.constant_param(prefix + ".weight", {c}, 1.0);
    beta = ps.constant_param(prefix + ".bias", {c}, 0.0);
    running_mean = ps.buffer(prefix + ".running_mean", {c}, 0.0);
    running_var = ps.buffer(prefix + ".running_var", {c}, 1.0);
  }
  Var<S> forward(const Var<S>& x, bool training) const {
    if (layout == BnLayout::kChannelMajor)
      return batch_norm_cm(x, gamma, beta, *running_mean, *running_var, training,
                           momentum, eps);
    return batch_norm_nchw(x, gamma, beta, *running_mean, *running_var, training,
                           momentum, eps);
  }
};

template <class S>
struct LayerNorm {
  Var<S> gamma, beta;
  double eps = 1e-5;

  LayerNorm() = default;
  LayerNorm(ParamSet<S>& ps, const std::string& prefix, int64_t c) {
    gamma = ps.constant_param(prefix + ".weight", {c}, 1.0);
    beta = ps.constant_param(prefix + ".bias", {c}, 0.0);
  }
  Var<S> forward(const Var<S>& x) const {
    return norm_affine<S>(x, nullptr, gamma, beta, eps);
  }
};

// Layer norm with the tanh-bounded per-channel affine constraint term. With
// f_weight = f_bias = 0 it reproduces plain layer norm bit-for-bit (same op).
template <class S>
struct Mln {
  Var<S> gamma, beta, f_weight, f_bias;
  double eps = 1e-5;

  Mln() = default;
  Mln(ParamSet<S>& ps, const std::string& prefix, int64_t c) {
    gamma = ps.constant_param(prefix + ".weight", {c}, 1.0);
    beta = ps.constant_param(prefix + ".bias", {c}, 0.0);
    f_weight = ps.constant_param(prefix + ".f_weight", {c}, 0.0);
    f_bias = ps.constant_param(prefix + ".f_bias", {c}, 0.0);
  }
  Var<S> forward(const Var<S>& x, const Var<S>& y) const {
    auto t = tanh_act(add_rowvec(mul_rowvec(y, f_weight), f_bias));
    return norm_affine<S>(x, t, gamma, beta, eps);
  }
};

// Squeeze-and-excitation channel gate, bottleneck ratio 16 (floored at one
// unit). The squeeze may read a different tensor than the one being gated:
// gating a batch-norm output while squeezing it too would hand the gate an
// exactly-zero statistic whenever the batch is a single clip (the batch mean
// IS the spatial mean), so blocks squeeze the pre-norm conv features.
// freeze_gate bypasses the gate for linearity probes.
template <class S>
struct SeGate {
  Linear<S> fc1, fc2;
  bool freeze_gate = false;

  SeGate() = default;
  SeGate(ParamSet<S>& ps, const std::string& prefix, int64_t c, int64_t ratio = 16) {
    const int64_t mid = std::max<int64_t>(1, c / ratio);
    fc1 = Linear<S>(ps, prefix + ".fc1", c, mid);
    fc2 = Linear<S>(ps, prefix + ".fc2", mid, c);
  }
  Var<S> forward(const Var<S>& x) const { return forward(x, x); }
  Var<S> forward(const Var<S>& x, const Var<S>& squeeze_src) const {
    if (freeze_gate) return x;
    auto s = global_avg_pool_nchw(squeeze_src);
    auto g = sigmoid(fc2.forward(relu(fc1.forward(s))));
    return mul_gate_nchw(x, g);
  }
};

// Basic 2-D residual block, optionally SE-gated, with a 1x1 projection
// shortcut when shape changes.
template <class S>
struct ResBlock2d {
  Conv2dLayer<S> conv1, conv2;
  BatchNorm<S> bn1, bn2;
  std::unique_ptr<SeGate<S>> se;
  bool has_shortcut = false;
  Conv2dLayer<S> sc_conv;
  BatchNorm<S> sc_bn;

  ResBlock2d() = default;
  ResBlock2d(ParamSet<S>& ps, const std::string& prefix, int64_t ci, int64_t co,
             int64_t sh, int64_t sw, bool with_se) {
    conv1 = Conv2dLayer<S>(ps, prefix + ".conv1", ci, co, 3, 3, sh, sw, 1, 1,
                           /*bias=*/false);
    bn1 = BatchNorm<S>(ps, prefix + ".bn1", co, BnLayout::kNchw);
    conv2 = Conv2dLayer<S>(ps, prefix + ".conv2", co, co, 3, 3, 1, 1, 1, 1,
                           /*bias=*/false);
    bn2 = BatchNorm<S>(ps, prefix + ".bn2", co, BnLayout::kNchw);
    if (with_se) se = std::make_unique<SeGate<S>>(ps, prefix + ".se", co);
    if (ci != co || sh != 1 || sw != 1) {
      has_shortcut = true;
      sc_conv = Conv2dLayer<S>(ps, prefix + ".shortcut", ci, co, 1, 1, sh, sw, 0,
                               0, /*bias=*/false);
      sc_bn = BatchNorm<S>(ps, prefix + ".shortcut_bn", co, BnLayout::kNchw);
    }
  }
  Var<S> forward(const Var<S>& x, bool training) const {
    auto h = relu(bn1.forward(conv1.forward(x), training));
    auto pre_norm = conv2.forward(h);
    auto out = bn2.forward(pre_norm, training);
    if (se) out = se->forward(out, pre_norm);
    auto sc = has_shortcut ? sc_bn.forward(sc_conv.forward(x), training) : x;
    return relu(add(out, sc));
  }
};

}  // namespace adenet

#endif  // ADENET_NN_LAYERS_HPP
