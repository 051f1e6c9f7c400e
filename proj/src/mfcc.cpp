#include "adenet/features/mfcc.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <vector>

namespace adenet {

namespace {

// Iterative radix-2 FFT, size 512.
void fft512(std::complex<double>* a) {
  constexpr int n = kMfccFft;
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / len;
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (int k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

struct MfccTables {
  std::array<double, kMfccWindow> window;
  // triangular mel filters over the 257 magnitude bins
  std::array<std::array<double, kMfccFft / 2 + 1>, kMelBands> mel;
  std::array<std::array<double, kMelBands>, kMfccDim> dct;

  MfccTables() {
    for (int i = 0; i < kMfccWindow; ++i)
      window[size_t(i)] =
          0.5 - 0.5 * std::cos(2.0 * M_PI * i / (kMfccWindow - 1));
    const double mel_lo = hz_to_mel(0.0), mel_hi = hz_to_mel(8000.0);
    std::array<double, kMelBands + 2> edges;
    for (int i = 0; i < kMelBands + 2; ++i)
      edges[size_t(i)] =
          mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (kMelBands + 1));
    for (int b = 0; b < kMelBands; ++b) {
      const double lo = edges[size_t(b)], mid = edges[size_t(b + 1)],
                   hi = edges[size_t(b + 2)];
      for (int k = 0; k <= kMfccFft / 2; ++k) {
        const double hz = double(k) * kSampleRate / kMfccFft;
        double wgt = 0.0;
        if (hz > lo && hz < hi)
          wgt = hz <= mid ? (hz - lo) / (mid - lo) : (hi - hz) / (hi - mid);
        mel[size_t(b)][size_t(k)] = wgt;
      }
    }
    for (int i = 0; i < kMfccDim; ++i) {
      const double scale =
          i == 0 ? std::sqrt(1.0 / kMelBands) : std::sqrt(2.0 / kMelBands);
      for (int j = 0; j < kMelBands; ++j)
        dct[size_t(i)][size_t(j)] =
            scale * std::cos(M_PI * i * (j + 0.5) / kMelBands);
    }
  }
};

const MfccTables& tables() {
  static const MfccTables t;
  return t;
}

}  // namespace

MfccSequence mfcc(const Waveform& wave) {
  check(wave.sample_rate == kSampleRate, ErrorKind::kConfig,
        "mfcc: expected 16 kHz input");
  const int64_t n = wave.size();
  check(n >= kMfccWindow, ErrorKind::kLength,
        "mfcc: input shorter than one window");
  const auto& tb = tables();
  MfccSequence out;
  out.frames = 1 + (n - kMfccWindow) / kMfccHop;
  out.coeffs.resize(size_t(out.frames * kMfccDim));

  std::vector<std::complex<double>> buf(kMfccFft);
  std::array<double, kMelBands> mel_log;
  for (int64_t fi = 0; fi < out.frames; ++fi) {
    const float* src = wave.samples.data() + fi * kMfccHop;
    for (int i = 0; i < kMfccWindow; ++i)
      buf[size_t(i)] = {double(src[i]) * tb.window[size_t(i)], 0.0};
    for (int i = kMfccWindow; i < kMfccFft; ++i) buf[size_t(i)] = {0.0, 0.0};
    fft512(buf.data());
    std::array<double, kMfccFft / 2 + 1> mag;
    for (int k = 0; k <= kMfccFft / 2; ++k) mag[size_t(k)] = std::abs(buf[size_t(k)]);
    for (int b = 0; b < kMelBands; ++b) {
      double acc = 0;
      for (int k = 0; k <= kMfccFft / 2; ++k)
        acc += tb.mel[size_t(b)][size_t(k)] * mag[size_t(k)];
      mel_log[size_t(b)] = std::log(std::max(acc, 1e-10));
    }
    for (int i = 0; i < kMfccDim; ++i) {
      double acc = 0;
      for (int j = 0; j < kMelBands; ++j)
        acc += tb.dct[size_t(i)][size_t(j)] * mel_log[size_t(j)];
      out.coeffs[size_t(fi * kMfccDim + i)] = float(acc);
    }
  }
  return out;
}

}  // namespace adenet
