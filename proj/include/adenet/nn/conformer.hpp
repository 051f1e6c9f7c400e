#ifndef ADENET_NN_CONFORMER_HPP
#define ADENET_NN_CONFORMER_HPP

#include "adenet/nn/attention.hpp"

namespace adenet {

// Feed-forward module, x4 expansion, swish.
template <class S>
struct FeedForward {
  Linear<S> lin1, lin2;

  FeedForward() = default;
  FeedForward(ParamSet<S>& ps, const std::string& prefix, int64_t d) {
    lin1 = Linear<S>(ps, prefix + ".lin1", d, 4 * d);
    lin2 = Linear<S>(ps, prefix + ".lin2", 4 * d, d);
  }
  Var<S> forward(const Var<S>& x) const {
    return lin2.forward(swish(lin1.forward(x)));
  }
};

// Pointwise(2C) -> GLU -> depthwise k15 -> BN -> swish -> pointwise.
template <class S>
struct ConvModule {
  Linear<S> pw1, pw2;
  Conv1dLayer<S> dw;
  BatchNorm<S> bn;
  int64_t dim = 0;

  ConvModule() = default;
  ConvModule(ParamSet<S>& ps, const std::string& prefix, int64_t d,
             int64_t kernel = 15)
      : dim(d) {
    pw1 = Linear<S>(ps, prefix + ".pw1", d, 2 * d);
    // depthwise conv feeds the batch norm; a bias would be normalized away
    dw = Conv1dLayer<S>(ps, prefix + ".dw", d, d, kernel, 1, (kernel - 1) / 2, 1,
                        /*groups=*/d, /*bias=*/false);
    bn = BatchNorm<S>(ps, prefix + ".bn", d, BnLayout::kChannelMajor);
    pw2 = Linear<S>(ps, prefix + ".pw2", d, d);
  }
  Var<S> forward(const Var<S>& x, bool training) const {  // x[T,C]
    auto h = pw1.forward(x);
    auto a = slice_cols(h, 0, dim);
    auto g = slice_cols(h, dim, 2 * dim);
    auto glu = mul(a, sigmoid(g));
    auto cm = dw.forward(transpose2d(glu));  // [C,T]
    cm = swish(bn.forward(cm, training));
    return pw2.forward(transpose2d(cm));
  }
};

// Self-attention conformer block, pre-norm, half-step FFN residuals, trailing
// layer norm.
template <class S>
struct ConformerBlock {
  LayerNorm<S> ln_ffn1, ln_attn, ln_conv, ln_ffn2, ln_final;
  FeedForward<S> ffn1, ffn2;
  MultiHeadSelfAttention<S> attn;
  ConvModule<S> conv;

  ConformerBlock() = default;
  ConformerBlock(ParamSet<S>& ps, const std::string& prefix, int64_t d,
                 int64_t heads) {
    ln_ffn1 = LayerNorm<S>(ps, prefix + ".ln_ffn1", d);
    ffn1 = FeedForward<S>(ps, prefix + ".ffn1", d);
    ln_attn = LayerNorm<S>(ps, prefix + ".ln_attn", d);
    attn = MultiHeadSelfAttention<S>(ps, prefix + ".attn", d, heads);
    ln_conv = LayerNorm<S>(ps, prefix + ".ln_conv", d);
    conv = ConvModule<S>(ps, prefix + ".conv", d);
    ln_ffn2 = LayerNorm<S>(ps, prefix + ".ln_ffn2", d);
    ffn2 = FeedForward<S>(ps, prefix + ".ffn2", d);
    ln_final = LayerNorm<S>(ps, prefix + ".ln_final", d);
  }
  Var<S> forward(Var<S> x, bool training) const {  // x[T,C]
    check(x->value.rank() == 2 && x->value.dim(1) == ln_final.gamma->value.numel(),
          ErrorKind::kShape, "conformer_block: channel mismatch");
    x = add(x, mul_scalar(ffn1.forward(ln_ffn1.forward(x)), 0.5));
    x = add(x, attn.forward(ln_attn.forward(x)));
    x = add(x, conv.forward(ln_conv.forward(x), training));
    x = add(x, mul_scalar(ffn2.forward(ln_ffn2.forward(x)), 0.5));
    return ln_final.forward(x);
  }
};

}  // namespace adenet

#endif  // ADENET_NN_CONFORMER_HPP
