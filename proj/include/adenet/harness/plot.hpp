#ifndef ADENET_HARNESS_PLOT_HPP
#define ADENET_HARNESS_PLOT_HPP

#include "adenet/harness/evaluator.hpp"

namespace adenet {

// Text renders of model internals and results.
//  embed_stats: per-channel mean/variance of the audio and visual streams
//    before and after the final norm stage (2*d rows per stream), plus a
//    seeded random 2-D linear projection scatter of the post-norm embeddings.
//  scores: per clip, one "frame score label" row per video frame.
//  waveforms: per clip, "index mixture clean enhanced" columns.
void plot_embed_stats(AdenetModel<float>& model, const Dataset& ds,
                      const std::string& out_dir, uint64_t seed);
void plot_scores(AdenetModel<float>& model, const Dataset& ds,
                 const std::string& out_dir);
void plot_waveforms(AdenetModel<float>& model, const Dataset& ds,
                    const std::string& out_dir);

}  // namespace adenet

#endif  // ADENET_HARNESS_PLOT_HPP
