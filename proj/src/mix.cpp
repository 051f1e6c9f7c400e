#include "adenet/signalio/mix.hpp"

#include <cmath>

namespace adenet {

double signal_power(const std::vector<float>& x) {
  if (x.empty()) return 0.0;
  double acc = 0;
  for (float v : x) acc += double(v) * double(v);
  return acc / double(x.size());
}

MixResult mix_at_snr(const Waveform& speech, const Waveform& noise,
                     double snr_db) {
  check(speech.size() == noise.size() && speech.size() > 0, ErrorKind::kLength,
        "mix_at_snr: length mismatch");
  const double p_s = signal_power(speech.samples);
  const double p_n = signal_power(noise.samples);
  check(p_s > 0, ErrorKind::kDegenerate, "mix_at_snr: zero-power speech");
  check(p_n > 0, ErrorKind::kDegenerate, "mix_at_snr: zero-power noise");
  // 10*log10(p_s / (g^2 p_n)) == snr_db  =>  g = sqrt(p_s / (p_n 10^(snr/10)))
  const double g = std::sqrt(p_s / (p_n * std::pow(10.0, snr_db / 10.0)));
  MixResult out;
  out.gain = g;
  out.scaled_noise.sample_rate = noise.sample_rate;
  out.mixture.sample_rate = speech.sample_rate;
  out.scaled_noise.samples.resize(noise.samples.size());
  out.mixture.samples.resize(noise.samples.size());
  for (size_t i = 0; i < noise.samples.size(); ++i) {
    out.scaled_noise.samples[i] = float(g * double(noise.samples[i]));
    out.mixture.samples[i] =
        float(double(speech.samples[i]) + double(out.scaled_noise.samples[i]));
  }
  return out;
}

}  // namespace adenet
