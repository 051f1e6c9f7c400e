#ifndef ADENET_MODEL_ADENET_MODEL_HPP
#define ADENET_MODEL_ADENET_MODEL_HPP

#include "adenet/context/context_net.hpp"
#include "adenet/encoders/se_codec.hpp"
#include "adenet/encoders/visual_encoder.hpp"
#include "adenet/fusion/fusion.hpp"
#include "adenet/xmodal/cross_modal_conformer.hpp"

namespace adenet {

enum class AudioInput { kMfcc, kRaw };

struct ModelConfig {
  EncoderConfig enc;
  ContextNetConfig ctx;
  FusionConfig fus;
  int64_t heads = 8;
  MlnPosition mln_position = MlnPosition::kFinal;
  CmaVariant cma_variant = CmaVariant::kAsPrinted;
  AudioInput audio_input = AudioInput::kMfcc;
  bool no_cmc = false;

  void validate() const {
    enc.validate();
    ctx.validate();
    fus.validate();
    check(enc.d % heads == 0, ErrorKind::kConfig,
          "model config: d not divisible by heads");
    check(ctx.c_se == enc.c_se && fus.d == enc.d && fus.c_se == enc.c_se,
          ErrorKind::kConfig, "model config: dimension plumbing mismatch");
  }

  // Tiny float64 configuration used by the gradient suite.
  static ModelConfig tiny() {
    ModelConfig c;
    c.enc.d = 8;
    c.enc.c_se = 8;
    c.enc.scale = 0.25;
    c.heads = 2;
    c.ctx.c_se = 8;
    c.ctx.heads = 2;
    c.ctx.num_blocks = 1;
    c.fus.d = 8;
    c.fus.c_se = 8;
    return c;
  }
};

// One training/eval example, already feature-extracted and aligned.
template <class S>
struct ModelInputs {
  Tensor<S> mfcc;     // [T_mfcc,13] (empty when audio_input == raw)
  Tensor<S> faces;    // [T_v,1,112,112]
  Tensor<S> mixture;  // [T]
};

template <class S>
struct ModelOutputs {
  Var<S> y_a;      // [T_v] speaking probabilities
  Var<S> y_s;      // [T] enhanced waveform
  Var<S> mask;     // [C,T_a]
  Var<S> f_e;      // [C,T_a] contextual input feature
  // final-norm-stage embeddings for the distribution diagnostics
  Var<S> embed_a_pre, embed_v_pre, embed_a_post, embed_v_post;
};

// The full graph: correlation learning (encoders + cross-modal conformer),
// contextual learning (codec + separation stack) and the circulant fusion
// bridge with both decoders.
template <class S>
class AdenetModel {
 public:
  explicit AdenetModel(const ModelConfig& cfg, uint64_t seed)
      : cfg_(cfg), params_(seed) {
    cfg_.validate();
    if (cfg_.audio_input == AudioInput::kMfcc)
      speech_enc_ = std::make_unique<SpeechEncoder<S>>(params_, "speech_enc",
                                                       cfg_.enc);
    else
      raw_enc_ = std::make_unique<RawAudioEncoder<S>>(
          params_, "raw_enc", cfg_.enc, cfg_.fus.resample_scale);
    visual_enc_ = std::make_unique<VisualEncoder<S>>(params_, "visual_enc",
                                                     cfg_.enc);
    xmodal_ = std::make_unique<CrossModalConformer<S>>(
        params_, "xmodal", cfg_.enc.d, cfg_.heads, cfg_.mln_position,
        cfg_.cma_variant, cfg_.no_cmc);
    se_enc_ = std::make_unique<SeEncoder<S>>(params_, "se_enc", cfg_.enc);
    context_ = std::make_unique<ContextNet<S>>(params_, "context", cfg_.ctx);
    fusion_ = std::make_unique<FusionModule<S>>(params_, "fusion", cfg_.fus,
                                                cfg_.heads);
    se_dec_ = std::make_unique<SeDecoder<S>>(params_, "se_dec", cfg_.enc);
  }

  ModelOutputs<S> forward(const ModelInputs<S>& in, bool training) {
    const int64_t tv = in.faces.dim(0);
    const int64_t t = in.mixture.numel();
    check(t > 0 && tv > 0, ErrorKind::kLength, "forward: empty input");

    auto faces = constant(in.faces);
    auto mixture = constant(in.mixture);

    Var<S> f_a;
    if (cfg_.audio_input == AudioInput::kMfcc) {
      check(in.mfcc.rank() == 2 && in.mfcc.dim(0) == 4 * tv, ErrorKind::kShape,
            "forward: MFCC frames must equal 4*T_v");
      f_a = speech_enc_->forward(constant(in.mfcc), training);
    } else {
      f_a = raw_enc_->forward(mixture);
    }
    auto f_v = visual_enc_->forward(faces, training);
    check(f_a->value.dim(0) == tv && f_v->value.dim(0) == tv, ErrorKind::kShape,
          "forward: encoder emitted wrong frame count");

    auto xm = xmodal_->forward(f_a, f_v, training);

    auto f_av = fusion_->fuse_av(xm.out_a, xm.out_v);
    auto f_av_t = fusion_->temporal_model(f_av, training);

    auto f_e = se_enc_->forward(mixture);  // [C,T_a]
    check(f_e->value.dim(1) == cfg_.fus.resample_scale * tv, ErrorKind::kAlignment,
          "forward: T_a != resample_scale * T_v (clip length must be a "
          "multiple of the fusion grid)");
    auto f_e_ctx = context_->forward(f_e, training);

    auto mask = fusion_->estimate_mask(f_e_ctx, f_av_t, training);
    auto f_av2 = fusion_->refine_av(mask, f_av_t);

    ModelOutputs<S> out;
    out.y_a = fusion_->asd_decode(f_av2);
    out.y_s = se_dec_->forward(se_apply_mask(mask, f_e), t);
    out.mask = mask;
    out.f_e = f_e;
    out.embed_a_pre = xm.pre_norm_a;
    out.embed_v_pre = xm.pre_norm_v;
    out.embed_a_post = xm.out_a;
    out.embed_v_post = xm.out_v;
    return out;
  }

  const ModelConfig& config() const { return cfg_; }
  ParamSet<S>& params() { return params_; }
  const ParamSet<S>& params() const { return params_; }

  SpeechEncoder<S>* speech_encoder() { return speech_enc_.get(); }
  VisualEncoder<S>* visual_encoder() { return visual_enc_.get(); }
  CrossModalConformer<S>* xmodal() { return xmodal_.get(); }
  ContextNet<S>* context() { return context_.get(); }
  FusionModule<S>* fusion() { return fusion_.get(); }
  SeEncoder<S>* se_encoder() { return se_enc_.get(); }
  SeDecoder<S>* se_decoder() { return se_dec_.get(); }

  // Parameter names grouped by top-level module, for ablation gradient checks.
  std::vector<std::pair<std::string, Var<S>>> params_with_prefix(
      const std::string& prefix) const {
    std::vector<std::pair<std::string, Var<S>>> out;
    for (const auto& [n, v] : params_.params())
      if (n.rfind(prefix, 0) == 0) out.emplace_back(n, v);
    return out;
  }

 private:
  ModelConfig cfg_;
  ParamSet<S> params_;
  std::unique_ptr<SpeechEncoder<S>> speech_enc_;
  std::unique_ptr<RawAudioEncoder<S>> raw_enc_;
  std::unique_ptr<VisualEncoder<S>> visual_enc_;
  std::unique_ptr<CrossModalConformer<S>> xmodal_;
  std::unique_ptr<SeEncoder<S>> se_enc_;
  std::unique_ptr<ContextNet<S>> context_;
  std::unique_ptr<FusionModule<S>> fusion_;
  std::unique_ptr<SeDecoder<S>> se_dec_;
};

}  // namespace adenet

#endif  // ADENET_MODEL_ADENET_MODEL_HPP
