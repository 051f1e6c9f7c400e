#ifndef ADENET_XMODAL_CROSS_MODAL_CONFORMER_HPP
#define ADENET_XMODAL_CROSS_MODAL_CONFORMER_HPP

#include "adenet/nn/conformer.hpp"

namespace adenet {

// Where the multi-modal layer norm sits inside the five-stage pipeline.
// kFinal replaces the trailing layer norm (the strongest configuration);
// earlier positions insert an MLN right after that stage's residual add.
enum class MlnPosition { kNone, kFfn1, kCma, kConv, kFfn2, kFinal };

inline const char* mln_position_name(MlnPosition p) {
  switch (p) {
    case MlnPosition::kNone: return "none";
    case MlnPosition::kFfn1: return "ffn1";
    case MlnPosition::kCma: return "cma";
    case MlnPosition::kConv: return "conv";
    case MlnPosition::kFfn2: return "ffn2";
    case MlnPosition::kFinal: return "final";
  }
  return "?";
}

inline MlnPosition mln_position_from_name(const std::string& s) {
  if (s == "none") return MlnPosition::kNone;
  if (s == "ffn1") return MlnPosition::kFfn1;
  if (s == "cma") return MlnPosition::kCma;
  if (s == "conv") return MlnPosition::kConv;
  if (s == "ffn2") return MlnPosition::kFfn2;
  if (s == "final") return MlnPosition::kFinal;
  throw Error(ErrorKind::kConfig, "unknown mln position: " + s);
}

// The relational backend: FFN -> cross-modal attention -> conv module -> FFN
// -> norm, run on both streams with the attention stage shared. Each stream's
// MLN constraint variable is the opposite stream at the same stage.
template <class S>
struct CrossModalConformer {
  struct StreamParts {
    LayerNorm<S> ln_ffn1, ln_attn, ln_conv, ln_ffn2;
    FeedForward<S> ffn1, ffn2;
    ConvModule<S> conv;
    LayerNorm<S> ln_final;           // used when MLN is not at kFinal
    std::unique_ptr<Mln<S>> mln;     // at the configured position
    std::unique_ptr<MultiHeadSelfAttention<S>> self_attn;  // no_cmc variant
  };

  StreamParts a, v;
  std::unique_ptr<CrossModalAttention<S>> cma;
  MlnPosition mln_position = MlnPosition::kFinal;
  bool no_cmc = false;

  CrossModalConformer() = default;
  CrossModalConformer(ParamSet<S>& ps, const std::string& prefix, int64_t d,
                      int64_t heads, MlnPosition pos, CmaVariant variant,
                      bool no_cmc_)
      : mln_position(pos), no_cmc(no_cmc_) {
    auto build = [&](StreamParts& sp, const std::string& sfx) {
      sp.ln_ffn1 = LayerNorm<S>(ps, prefix + ".ln_ffn1_" + sfx, d);
      sp.ffn1 = FeedForward<S>(ps, prefix + ".ffn1_" + sfx, d);
      sp.ln_attn = LayerNorm<S>(ps, prefix + ".ln_attn_" + sfx, d);
      sp.ln_conv = LayerNorm<S>(ps, prefix + ".ln_conv_" + sfx, d);
      sp.conv = ConvModule<S>(ps, prefix + ".conv_" + sfx, d);
      sp.ln_ffn2 = LayerNorm<S>(ps, prefix + ".ln_ffn2_" + sfx, d);
      sp.ffn2 = FeedForward<S>(ps, prefix + ".ffn2_" + sfx, d);
      if (pos != MlnPosition::kFinal)
        sp.ln_final = LayerNorm<S>(ps, prefix + ".ln_final_" + sfx, d);
      if (pos != MlnPosition::kNone)
        sp.mln = std::make_unique<Mln<S>>(ps, prefix + ".mln_" + sfx, d);
      if (no_cmc_)
        sp.self_attn = std::make_unique<MultiHeadSelfAttention<S>>(
            ps, prefix + ".self_attn_" + sfx, d, heads);
    };
    build(a, "a");
    build(v, "v");
    if (!no_cmc_)
      cma = std::make_unique<CrossModalAttention<S>>(ps, prefix + ".cma", d,
                                                     heads, variant);
  }

  struct Output {
    Var<S> out_a, out_v;
    Var<S> pre_norm_a, pre_norm_v;  // inputs of the final norm stage
  };

  Output forward(Var<S> xa, Var<S> xv, bool training) const {
    check(xa->value.dim(0) == xv->value.dim(0), ErrorKind::kShape,
          "cross_modal_conformer: stream lengths differ");
    auto maybe_mln = [&](MlnPosition here, Var<S>& sa, Var<S>& sv) {
      if (mln_position != here) return;
      auto na = a.mln->forward(sa, sv);
      auto nv = v.mln->forward(sv, sa);
      sa = na;
      sv = nv;
    };

    xa = add(xa, mul_scalar(a.ffn1.forward(a.ln_ffn1.forward(xa)), 0.5));
    xv = add(xv, mul_scalar(v.ffn1.forward(v.ln_ffn1.forward(xv)), 0.5));
    maybe_mln(MlnPosition::kFfn1, xa, xv);

    if (no_cmc) {
      xa = add(xa, a.self_attn->forward(a.ln_attn.forward(xa)));
      xv = add(xv, v.self_attn->forward(v.ln_attn.forward(xv)));
    } else {
      auto [da, dv] = cma->forward(a.ln_attn.forward(xa), v.ln_attn.forward(xv));
      xa = add(xa, da);
      xv = add(xv, dv);
    }
    maybe_mln(MlnPosition::kCma, xa, xv);

    xa = add(xa, a.conv.forward(a.ln_conv.forward(xa), training));
    xv = add(xv, v.conv.forward(v.ln_conv.forward(xv), training));
    maybe_mln(MlnPosition::kConv, xa, xv);

    xa = add(xa, mul_scalar(a.ffn2.forward(a.ln_ffn2.forward(xa)), 0.5));
    xv = add(xv, mul_scalar(v.ffn2.forward(v.ln_ffn2.forward(xv)), 0.5));
    maybe_mln(MlnPosition::kFfn2, xa, xv);

    Output out;
    out.pre_norm_a = xa;
    out.pre_norm_v = xv;
    if (mln_position == MlnPosition::kFinal) {
      out.out_a = a.mln->forward(xa, xv);
      out.out_v = v.mln->forward(xv, xa);
    } else {
      out.out_a = a.ln_final.forward(xa);
      out.out_v = v.ln_final.forward(xv);
    }
    return out;
  }
};

}  // namespace adenet

#endif  // ADENET_XMODAL_CROSS_MODAL_CONFORMER_HPP
