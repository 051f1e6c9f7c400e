#ifndef ADENET_ENCODERS_SPEECH_ENCODER_HPP
#define ADENET_ENCODERS_SPEECH_ENCODER_HPP

#include <array>

#include "adenet/nn/layers.hpp"

namespace adenet {

// Channel plan etc. for the front-end encoders. `scale` shrinks channel widths
// for the tiny float64 models used by the gradient tests.
struct EncoderConfig {
  int64_t d = 128;
  std::array<int64_t, 4> se_stage_blocks{3, 4, 6, 3};
  std::array<int64_t, 4> se_stage_channels{16, 32, 64, 128};
  std::array<int64_t, 4> v_stage_channels{8, 16, 32, 64};
  int64_t c_se = 128;
  int64_t kernel = 40;  // K, enhancement encoder
  int64_t stride = 20;  // S == K/2
  int64_t vtcn_depth = 5;
  double scale = 1.0;

  int64_t se_ch(int i) const {
    return std::max<int64_t>(1, int64_t(double(se_stage_channels[size_t(i)]) * scale));
  }
  int64_t v_ch(int i) const {
    return std::max<int64_t>(1, int64_t(double(v_stage_channels[size_t(i)]) * scale));
  }
  void validate() const {
    check(kernel == 2 * stride, ErrorKind::kConfig,
          "encoder config: kernel must equal 2*stride");
    check(c_se == d, ErrorKind::kConfig, "encoder config: C_se must equal d");
    check(d > 0 && vtcn_depth >= 1, ErrorKind::kConfig, "encoder config: bad dims");
  }
};

// MFCC -> frame-synchronous audio embeddings. 2-D residual stages with block
// counts [3,4,6,3], SE gating in every block, cumulative temporal stride 4;
// the 13-bin frequency axis is strided down to 2 and then averaged away.
template <class S>
struct SpeechEncoder {
  Conv2dLayer<S> stem;
  BatchNorm<S> stem_bn;
  std::vector<ResBlock2d<S>> blocks;
  Linear<S> proj;
  bool se_gates_frozen = false;

  SpeechEncoder() = default;
  SpeechEncoder(ParamSet<S>& ps, const std::string& prefix,
                const EncoderConfig& cfg) {
    const int64_t c0 = cfg.se_ch(0);
    stem = Conv2dLayer<S>(ps, prefix + ".stem", 1, c0, 3, 3, 1, 1, 1, 1,
                          /*bias=*/false);
    stem_bn = BatchNorm<S>(ps, prefix + ".stem_bn", c0, BnLayout::kNchw);
    // stage strides: (time, freq) = (1,1), (2,2), (2,2), (1,2)
    const int64_t strides_t[4] = {1, 2, 2, 1};
    const int64_t strides_f[4] = {1, 2, 2, 2};
    int64_t cin = c0;
    for (int st = 0; st < 4; ++st) {
      const int64_t cout = cfg.se_ch(st);
      for (int64_t bi = 0; bi < cfg.se_stage_blocks[size_t(st)]; ++bi) {
        const bool first = bi == 0;
        blocks.emplace_back(ps,
                            prefix + ".stage" + std::to_string(st + 1) + "." +
                                std::to_string(bi),
                            cin, cout, first ? strides_t[st] : 1,
                            first ? strides_f[st] : 1, /*with_se=*/true);
        cin = cout;
      }
    }
    proj = Linear<S>(ps, prefix + ".proj", cin, cfg.d);
  }

  void set_se_frozen(bool frozen) {
    se_gates_frozen = frozen;
    for (auto& b : blocks)
      if (b.se) b.se->freeze_gate = frozen;
  }

  // mfcc[T_mfcc,13] -> [T_v,d], T_v = T_mfcc/4
  Var<S> forward(const Var<S>& mfcc, bool training) const {
    check(mfcc->value.rank() == 2 && mfcc->value.dim(1) == 13, ErrorKind::kShape,
          "speech encoder: expected [T,13] MFCC input");
    const int64_t tm = mfcc->value.dim(0);
    check(tm % 4 == 0, ErrorKind::kShape,
          "speech encoder: MFCC length must be a multiple of 4 (aligned input)");
    auto x = reshape(mfcc, {1, 1, tm, 13});
    x = relu(stem_bn.forward(stem.forward(x), training));
    for (const auto& b : blocks) x = b.forward(x, training);
    // [1,C,T/4,2] -> average frequency -> [T/4,C] -> project to d
    auto pooled = mean_last(x);  // [1,C,T/4]
    const int64_t c = pooled->value.dim(1), tv = pooled->value.dim(2);
    auto seq = transpose2d(reshape(pooled, {c, tv}));  // [T/4, C]
    return proj.forward(seq);
  }
};

}  // namespace adenet

#endif  // ADENET_ENCODERS_SPEECH_ENCODER_HPP
