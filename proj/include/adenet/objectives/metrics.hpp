#ifndef ADENET_OBJECTIVES_METRICS_HPP
#define ADENET_OBJECTIVES_METRICS_HPP

#include <string>
#include <vector>

#include "adenet/core/error.hpp"

namespace adenet {

// Frame-level detection metrics. AP walks descending scores with ties broken
// by stable original order; AUC integrates the ROC trapezoidally with tied
// scores grouped (equivalent to pair counting with half credit for ties).
double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& labels);
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);
double f1_at_threshold(const std::vector<double>& scores,
                       const std::vector<int>& labels, double threshold = 0.5);

// Enhancement metrics (plain doubles, no autograd).
double sdr_db(const std::vector<float>& est, const std::vector<float>& ref);
double si_sdr_db(const std::vector<float>& est, const std::vector<float>& ref);
// Energy-suppression ratio for silent-target clips: -10*log10(|est|^2/|mix|^2).
double suppression_db(const std::vector<float>& est,
                      const std::vector<float>& mixture);

struct SnrBreakdownRow {
  double snr_db = 0;
  double map = 0, auc = 0, f1 = 0;
  double sdr_db = 0, si_sdr_db = 0, si_sdri_db = 0;
  int64_t clip_count = 0, frame_count = 0, speaking_count = 0;
};

struct EvalReport {
  double map = 0, auc = 0, f1 = 0;
  double sdr_db = 0;        // mean over speaking clips
  double si_sdr_db = 0;     // mean over speaking clips
  double si_sdri_db = 0;    // mean improvement over the mixture
  double silent_suppression_db = 0;  // mean over silent clips (if any)
  int64_t clip_count = 0;
  int64_t frame_count = 0;
  int64_t speaking_count = 0;
  int64_t silent_count = 0;
  std::vector<SnrBreakdownRow> per_snr;

  std::string to_kv_text() const;
  std::string to_table() const;
};

}  // namespace adenet

#endif  // ADENET_OBJECTIVES_METRICS_HPP
