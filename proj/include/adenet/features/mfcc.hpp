#ifndef ADENET_FEATURES_MFCC_HPP
#define ADENET_FEATURES_MFCC_HPP

#include "adenet/signalio/wav.hpp"

namespace adenet {

constexpr int kMfccDim = 13;
constexpr int kMfccWindow = 400;  // 25 ms @ 16 kHz
constexpr int kMfccHop = 160;     // 10 ms
constexpr int kMfccFft = 512;
constexpr int kMelBands = 40;

struct MfccSequence {
  int64_t frames = 0;
  std::vector<float> coeffs;  // frames x 13, row-major
  double frame_rate = 100.0;

  float at(int64_t fi, int64_t ci) const {
    return coeffs[size_t(fi * kMfccDim + ci)];
  }
};

// 25 ms Hann windows, 10 ms hop, 512-point magnitude spectrum, 40-band mel
// filter bank over 0-8 kHz, log with a 1e-10 floor, orthonormal DCT-II, first
// 13 coefficients. frames = 1 + floor((N-400)/160).
MfccSequence mfcc(const Waveform& wave);

}  // namespace adenet

#endif  // ADENET_FEATURES_MFCC_HPP
