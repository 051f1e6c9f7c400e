#ifndef ADENET_ENCODERS_SE_CODEC_HPP
#define ADENET_ENCODERS_SE_CODEC_HPP

#include "adenet/encoders/speech_encoder.hpp"

namespace adenet {

inline int64_t context_frames(int64_t samples, int64_t stride) {
  return (samples + stride - 1) / stride;  // ceil
}

// Symmetric padding that lands the 1-D conv on exactly ceil(T/S) frames.
inline std::pair<int64_t, int64_t> codec_padding(int64_t samples, int64_t kernel,
                                                 int64_t stride) {
  const int64_t t_a = context_frames(samples, stride);
  const int64_t total = (t_a - 1) * stride + kernel - samples;
  return {total / 2, total - total / 2};
}

// Waveform -> F_e. Single 1-D conv bank, kernel K, stride S=K/2, ReLU.
template <class S>
struct SeEncoder {
  Var<S> w, b;
  int64_t c = 0, kernel = 40, stride = 20;

  SeEncoder() = default;
  SeEncoder(ParamSet<S>& ps, const std::string& prefix, const EncoderConfig& cfg)
      : c(cfg.c_se), kernel(cfg.kernel), stride(cfg.stride) {
    w = ps.fan_in_uniform(prefix + ".weight", {c, 1, kernel}, kernel);
    b = ps.constant_param(prefix + ".bias", {c}, 0.0);
  }
  // wave[T] -> [C, ceil(T/S)]
  Var<S> forward(const Var<S>& wave) const {
    check(wave->value.rank() == 1 && wave->value.numel() > 0, ErrorKind::kLength,
          "se_encode: empty waveform");
    const int64_t t = wave->value.numel();
    auto [pl, pr] = codec_padding(t, kernel, stride);
    return relu(conv1d(reshape(wave, {1, t}), w, b, stride, pl, pr));
  }
};

// Masked F_e -> waveform. 1-D transposed conv, cropped back to the original
// sample count.
template <class S>
struct SeDecoder {
  Var<S> w, b;
  int64_t c = 0, kernel = 40, stride = 20;

  SeDecoder() = default;
  SeDecoder(ParamSet<S>& ps, const std::string& prefix, const EncoderConfig& cfg)
      : c(cfg.c_se), kernel(cfg.kernel), stride(cfg.stride) {
    w = ps.fan_in_uniform(prefix + ".weight", {c, 1, kernel}, c * kernel);
    b = ps.constant_param(prefix + ".bias", {1}, 0.0);
  }
  // feat[C,T_a] -> wave[orig_samples]
  Var<S> forward(const Var<S>& feat, int64_t orig_samples) const {
    check(feat->value.rank() == 2 && feat->value.dim(0) == c, ErrorKind::kShape,
          "se_decode: expected [C,T_a] feature");
    const int64_t t_a = feat->value.dim(1);
    check(context_frames(orig_samples, stride) == t_a, ErrorKind::kAlignment,
          "se_decode: frame count does not match sample count");
    auto [pl, pr] = codec_padding(orig_samples, kernel, stride);
    (void)pr;
    auto full = conv_transpose1d(feat, w, b, stride);  // [1,(T_a-1)S+K]
    auto crop = slice_cols(full, pl, pl + orig_samples);
    return reshape(crop, {orig_samples});
  }
};

// Ablation front-end (audio_input == raw): the filter-bank encoder followed by
// x32 temporal average pooling and a pointwise projection to d.
template <class S>
struct RawAudioEncoder {
  SeEncoder<S> enc;
  Linear<S> proj;
  int64_t pool = 32;

  RawAudioEncoder() = default;
  RawAudioEncoder(ParamSet<S>& ps, const std::string& prefix,
                  const EncoderConfig& cfg, int64_t resample_scale)
      : pool(resample_scale) {
    enc = SeEncoder<S>(ps, prefix + ".enc", cfg);
    proj = Linear<S>(ps, prefix + ".proj", cfg.c_se, cfg.d);
  }
  // wave[T] -> [T_v,d], T_v = ceil(T/S)/32
  Var<S> forward(const Var<S>& wave) const {
    auto fe = enc.forward(wave);
    check(fe->value.dim(1) % pool == 0, ErrorKind::kAlignment,
          "raw_audio_encode: frame count not divisible by pool factor");
    auto pooled = avg_pool_time(fe, pool);     // [C,T_v]
    return proj.forward(transpose2d(pooled));  // [T_v,d]
  }
};

}  // namespace adenet

#endif  // ADENET_ENCODERS_SE_CODEC_HPP
