#ifndef ADENET_FUSION_FUSION_HPP
#define ADENET_FUSION_FUSION_HPP

#include "adenet/nn/conformer.hpp"

namespace adenet {

struct FusionConfig {
  int64_t resample_scale = 32;
  bool ablate_a_to_s = false;  // severs detection -> enhancement
  bool ablate_s_to_a = false;  // severs enhancement -> detection
  int64_t d = 128;
  int64_t c_se = 128;

  void validate() const {
    check(resample_scale >= 1, ErrorKind::kConfig, "fusion: bad resample scale");
    check(c_se == d, ErrorKind::kConfig, "fusion: C_se must equal d");
  }
};

// Linear up-sampling of the correlation feature onto the contextual grid:
// [T_v,d] -> [d, scale*T_v].
template <class S>
Var<S> upsample_embed(const Var<S>& f_av, int64_t scale, int64_t t_a) {
  check(t_a == scale * f_av->value.dim(0), ErrorKind::kAlignment,
        "upsample_embed: T_a != scale * T_v");
  return transpose2d(upsample_time(f_av, scale));
}

// The bidirectional detection/enhancement bridge. A->S: the correlation
// feature conditions the mask; S->A: the max-pooled mask gates the
// correlation feature. Ablation flags replace one operand with a constant so
// the severed direction carries no gradient.
template <class S>
struct FusionModule {
  FusionConfig cfg;
  Linear<S> fuse;       // 2d -> d, merges the two cross-modal streams
  ConformerBlock<S> temporal;
  Linear<S> mask_fc;    // 2*C_se -> C_se
  ConformerBlock<S> mask_block;
  Linear<S> asd_head;   // d -> 1

  FusionModule() = default;
  FusionModule(ParamSet<S>& ps, const std::string& prefix, const FusionConfig& c,
               int64_t heads)
      : cfg(c) {
    cfg.validate();
    fuse = Linear<S>(ps, prefix + ".fuse", 2 * cfg.d, cfg.d);
    temporal = ConformerBlock<S>(ps, prefix + ".temporal", cfg.d, heads);
    mask_fc = Linear<S>(ps, prefix + ".mask_fc", 2 * cfg.c_se, cfg.c_se);
    mask_block = ConformerBlock<S>(ps, prefix + ".mask_block", cfg.c_se, heads);
    asd_head = Linear<S>(ps, prefix + ".asd_head", cfg.d, 1);
  }

  // F_av from the two cross-modal streams: concat + pointwise linear.
  Var<S> fuse_av(const Var<S>& fa, const Var<S>& fv) const {
    check(fa->value.dim(0) == fv->value.dim(0), ErrorKind::kShape,
          "fuse_av: length mismatch");
    return fuse.forward(concat_cols<S>({fa, fv}));
  }

  Var<S> temporal_model(const Var<S>& f_av, bool training) const {
    return temporal.forward(f_av, training);
  }

  // M = ReLU(CB(FC([F'_e ; Up(F'_av)]))), non-negative by construction.
  Var<S> estimate_mask(const Var<S>& fe_ctx, const Var<S>& f_av,
                       bool training) const {
    const int64_t t_a = fe_ctx->value.dim(1);
    Var<S> up;
    if (cfg.ablate_a_to_s) {
      up = constant(Tensor<S>::zeros({t_a, cfg.d}));
      check(t_a == cfg.resample_scale * f_av->value.dim(0), ErrorKind::kAlignment,
            "estimate_mask: T_a != scale * T_v");
    } else {
      up = transpose2d(upsample_embed(f_av, cfg.resample_scale, t_a));  // [T_a,d]
    }
    auto cat = concat_cols<S>({transpose2d(fe_ctx), up});  // [T_a, 2C]
    auto m = relu(mask_block.forward(mask_fc.forward(cat), training));
    auto mask = transpose2d(m);  // [C,T_a]
    check(double(*std::min_element(mask->value.data.begin(),
                                   mask->value.data.end())) >= 0.0,
          ErrorKind::kTrain, "estimate_mask: negative mask entry");
    return mask;
  }

  // F''_av = MaxPool(M) (x) F'_av, elementwise over [T_v,d].
  Var<S> refine_av(const Var<S>& mask, const Var<S>& f_av) const {
    const int64_t tv = f_av->value.dim(0);
    check(mask->value.dim(0) == cfg.c_se &&
              mask->value.dim(1) == cfg.resample_scale * tv,
          ErrorKind::kShape, "refine_av: mask/feature mismatch");
    Var<S> pooled;
    if (cfg.ablate_s_to_a)
      pooled = constant(Tensor<S>::full({tv, cfg.c_se}, S(1)));
    else
      pooled = transpose2d(max_pool_time(mask, cfg.resample_scale));  // [T_v,C]
    return mul(pooled, f_av);
  }

  // per-frame speaking probability, pointwise
  Var<S> asd_decode(const Var<S>& f_av2) const {
    auto logits = asd_head.forward(f_av2);  // [T_v,1]
    return reshape(sigmoid(logits), {f_av2->value.dim(0)});
  }
};

// M (x) F_e, the masked contextual embedding fed to the decoder.
template <class S>
Var<S> se_apply_mask(const Var<S>& mask, const Var<S>& fe) {
  check_same_shape(mask, fe, "se_apply_mask");
  return mul(mask, fe);
}

}  // namespace adenet

#endif  // ADENET_FUSION_FUSION_HPP
