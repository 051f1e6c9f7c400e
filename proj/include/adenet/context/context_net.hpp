#ifndef ADENET_CONTEXT_CONTEXT_NET_HPP
#define ADENET_CONTEXT_CONTEXT_NET_HPP

#include "adenet/nn/conformer.hpp"

namespace adenet {

enum class ContextVariant { kConformer, kTcn };

// Dilated residual temporal conv block, kernel 3.
template <class S>
struct TcnBlock {
  Conv1dLayer<S> conv, pw;
  BatchNorm<S> bn;

  TcnBlock() = default;
  TcnBlock(ParamSet<S>& ps, const std::string& prefix, int64_t c, int64_t dilation) {
    // bias omitted: the conv feeds straight into a batch norm
    conv = Conv1dLayer<S>(ps, prefix + ".conv", c, c, 3, 1, dilation, dilation,
                          1, /*bias=*/false);
    bn = BatchNorm<S>(ps, prefix + ".bn", c, BnLayout::kChannelMajor);
    pw = Conv1dLayer<S>(ps, prefix + ".pw", c, c, 1, 1, 0);
  }
  Var<S> forward(const Var<S>& x, bool training) const {  // x[C,T]
    auto h = relu(bn.forward(conv.forward(x), training));
    return add(x, pw.forward(h));
  }
};

struct ContextNetConfig {
  int64_t num_blocks = 4;
  int64_t c_se = 128;
  int64_t heads = 8;
  ContextVariant variant = ContextVariant::kConformer;

  void validate() const {
    check(num_blocks >= 1, ErrorKind::kConfig, "context net: num_blocks < 1");
  }
};

// The separation network: F_e -> F'_e, shape preserved. Conformer stack by
// default; the TCN variant (dilations 1,2,4,8 cycling) exists for the
// separation-network ablation.
template <class S>
struct ContextNet {
  std::vector<ConformerBlock<S>> conformers;
  std::vector<TcnBlock<S>> tcn;
  ContextVariant variant = ContextVariant::kConformer;

  ContextNet() = default;
  ContextNet(ParamSet<S>& ps, const std::string& prefix,
             const ContextNetConfig& cfg)
      : variant(cfg.variant) {
    cfg.validate();
    for (int64_t i = 0; i < cfg.num_blocks; ++i) {
      if (cfg.variant == ContextVariant::kConformer)
        conformers.emplace_back(ps, prefix + ".block" + std::to_string(i),
                                cfg.c_se, cfg.heads);
      else
        tcn.emplace_back(ps, prefix + ".tcn" + std::to_string(i), cfg.c_se,
                         int64_t(1) << (i % 4));
    }
  }

  // fe[C,T_a] -> [C,T_a]
  Var<S> forward(const Var<S>& fe, bool training) const {
    check(fe->value.rank() == 2, ErrorKind::kShape, "separate_context: rank != 2");
    if (variant == ContextVariant::kTcn) {
      auto x = fe;
      for (const auto& b : tcn) x = b.forward(x, training);
      return x;
    }
    auto x = transpose2d(fe);  // [T_a,C]
    for (const auto& b : conformers) x = b.forward(x, training);
    return transpose2d(x);
  }
};

}  // namespace adenet

#endif  // ADENET_CONTEXT_CONTEXT_NET_HPP
