#ifndef ADENET_SIGNALIO_MIX_HPP
#define ADENET_SIGNALIO_MIX_HPP

#include "adenet/signalio/wav.hpp"

namespace adenet {

// mean squared amplitude
double signal_power(const std::vector<float>& x);

struct MixResult {
  Waveform mixture;
  Waveform scaled_noise;
  double gain = 1.0;
};

// mixture = speech + g*noise with g solving 10*log10(P_speech/P_gnoise) == snr_db.
// SNR is defined over the full clip.
MixResult mix_at_snr(const Waveform& speech, const Waveform& noise, double snr_db);

}  // namespace adenet

#endif  // ADENET_SIGNALIO_MIX_HPP
