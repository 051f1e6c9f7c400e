#ifndef ADENET_HARNESS_EVALUATOR_HPP
#define ADENET_HARNESS_EVALUATOR_HPP

#include <functional>

#include "adenet/harness/dataset.hpp"
#include "adenet/objectives/metrics.hpp"

namespace adenet {

struct ClipScore {
  std::vector<double> scores;    // per-frame speaking probability
  std::vector<float> enhanced;   // enhanced waveform
};

// Scorer abstraction so the evaluation protocol can be exercised with oracle
// stubs as well as real models.
using ClipScorer = std::function<ClipScore(const Dataset&, size_t)>;

// Pools frames across clips for mAP/AUC/F1; averages SDR/SI-SDR over speaking
// clips and the suppression ratio over silent ones, with a per-SNR breakdown.
EvalReport evaluate_with_scorer(const Dataset& ds, const ClipScorer& scorer);

ClipScore score_clip(AdenetModel<float>& model, const Dataset& ds, size_t i);
EvalReport evaluate_model(AdenetModel<float>& model, const Dataset& ds);

}  // namespace adenet

#endif  // ADENET_HARNESS_EVALUATOR_HPP
