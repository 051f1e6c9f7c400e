#ifndef ADENET_ENCODERS_VISUAL_ENCODER_HPP
#define ADENET_ENCODERS_VISUAL_ENCODER_HPP

#include "adenet/encoders/speech_encoder.hpp"

namespace adenet {

// Residual ReLU -> BN -> depthwise-separable temporal conv, kernel 3.
template <class S>
struct VtcnBlock {
  BatchNorm<S> bn;
  Conv1dLayer<S> dw, pw;

  VtcnBlock() = default;
  VtcnBlock(ParamSet<S>& ps, const std::string& prefix, int64_t c) {
    bn = BatchNorm<S>(ps, prefix + ".bn", c, BnLayout::kChannelMajor);
    dw = Conv1dLayer<S>(ps, prefix + ".dw", c, c, 3, 1, 0, 1, /*groups=*/c);
    pw = Conv1dLayer<S>(ps, prefix + ".pw", c, c, 1, 1, 0);
  }
  Var<S> forward(const Var<S>& x, bool training) const {  // x[C,T]
    auto h = bn.forward(relu(x), training);
    // edge padding keeps temporally constant inputs exactly constant
    h = pw.forward(dw.forward(replicate_pad_time(h, 1, 1)));
    return add(x, h);
  }
};

// Face clips -> frame-synchronous visual embeddings. 3-D conv stem (temporal
// kernel 5, stride 1) captures short-range motion, a per-frame 2-D residual
// trunk summarizes appearance, and the V-TCN models the frame sequence.
// Temporal length is preserved end to end.
template <class S>
struct VisualEncoder {
  Conv3dLayer<S> stem3d;
  BatchNorm<S> stem_bn;  // over channels, channel-major on [C, T*H*W]
  std::vector<ResBlock2d<S>> blocks;
  std::vector<VtcnBlock<S>> vtcn;
  Conv1dLayer<S> head;  // pointwise conv to d
  int64_t c0 = 0;

  VisualEncoder() = default;
  VisualEncoder(ParamSet<S>& ps, const std::string& prefix,
                const EncoderConfig& cfg) {
    c0 = cfg.v_ch(0);
    // no bias: the stem feeds straight into a batch norm
    stem3d = Conv3dLayer<S>(ps, prefix + ".stem3d", 1, c0, 5, 3, 3, 1, 2, 2, 0,
                            1, 1, /*bias=*/false);
    stem_bn = BatchNorm<S>(ps, prefix + ".stem_bn", c0, BnLayout::kChannelMajor);
    const int64_t strides[4] = {1, 2, 2, 2};
    int64_t cin = c0;
    for (int st = 0; st < 4; ++st) {
      const int64_t cout = cfg.v_ch(st);
      for (int64_t bi = 0; bi < 2; ++bi) {
        const bool first = bi == 0;
        blocks.emplace_back(ps,
                            prefix + ".stage" + std::to_string(st + 1) + "." +
                                std::to_string(bi),
                            cin, cout, first ? strides[st] : 1,
                            first ? strides[st] : 1, /*with_se=*/false);
        cin = cout;
      }
    }
    for (int64_t i = 0; i < cfg.vtcn_depth; ++i)
      vtcn.emplace_back(ps, prefix + ".vtcn." + std::to_string(i), cin);
    head = Conv1dLayer<S>(ps, prefix + ".head", cin, cfg.d, 1, 1, 0);
  }

  // faces[T_v,1,112,112] in [0,1] -> [T_v,d]
  Var<S> forward(const Var<S>& faces, bool training) const {
    check(faces->value.rank() == 4 && faces->value.dim(1) == 1 &&
              faces->value.dim(2) == 112 && faces->value.dim(3) == 112,
          ErrorKind::kShape, "visual encoder: expected [T,1,112,112] faces");
    const int64_t tv = faces->value.dim(0);
    // temporal kernel 5 with edge-replicated frames, then [T+4,1,112,112]
    // relabels to [1,T+4,112,112] since C==1
    auto padded = replicate_pad_dim0(faces, 2, 2);
    auto x = reshape(padded, {1, tv + 4, 112, 112});
    x = stem3d.forward(x);  // [C0,T,56,56]
    const int64_t hw = x->value.dim(2) * x->value.dim(3);
    x = reshape(stem_bn.forward(reshape(x, {c0, tv * hw}), training),
                {c0, tv, 56, 56});
    x = relu(x);
    x = transpose_01(x);    // [T,C0,56,56]
    x = max_pool2d(x, 2);   // [T,C0,28,28]
    for (const auto& b : blocks) x = b.forward(x, training);
    auto feat = global_avg_pool_nchw(x);       // [T,C]
    auto seq = transpose2d(feat);              // [C,T]
    for (const auto& blk : vtcn) seq = blk.forward(seq, training);
    return transpose2d(head.forward(seq));     // [T,d]
  }
};

}  // namespace adenet

#endif  // ADENET_ENCODERS_VISUAL_ENCODER_HPP
