#ifndef ADENET_SIGNALIO_WAV_HPP
#define ADENET_SIGNALIO_WAV_HPP

#include <string>
#include <vector>

#include "adenet/core/error.hpp"

namespace adenet {

constexpr int kSampleRate = 16000;
constexpr int kVideoFps = 25;
constexpr int kSamplesPerFrame = kSampleRate / kVideoFps;  // 640

struct Waveform {
  std::vector<float> samples;  // nominal range [-1,1]
  int sample_rate = kSampleRate;

  int64_t size() const { return int64_t(samples.size()); }
  double duration_s() const { return double(samples.size()) / sample_rate; }
};

// Reads RIFF/WAVE PCM-16 (1 or 2 channels, any rate); channels are averaged,
// the result is resampled to 16 kHz and scaled by 1/32768.
Waveform load_wav(const std::string& path);

// Writes PCM-16 little-endian mono; samples clamped to [-1,1].
void save_wav(const std::string& path, const Waveform& wave);

std::vector<float> resample_linear(const std::vector<float>& in, int sr_in,
                                   int sr_out);

}  // namespace adenet

#endif  // ADENET_SIGNALIO_WAV_HPP
