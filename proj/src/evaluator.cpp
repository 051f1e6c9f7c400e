#include "adenet/harness/evaluator.hpp"

#include <algorithm>
#include <map>

namespace adenet {

namespace {

struct Bucket {
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<double> si_sdr, sdr, si_sdri, suppression;
  int64_t clips = 0, speaking = 0;
};

void fill_detection(SnrBreakdownRow& row, const Bucket& b) {
  row.map = average_precision(b.scores, b.labels);
  row.auc = roc_auc(b.scores, b.labels);
  row.f1 = f1_at_threshold(b.scores, b.labels);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0;
  for (double x : v) s += x;
  return s / double(v.size());
}

}  // namespace

EvalReport evaluate_with_scorer(const Dataset& ds, const ClipScorer& scorer) {
  check(ds.size() > 0, ErrorKind::kLength, "evaluate: empty dataset");
  Bucket all;
  std::map<double, Bucket> by_snr;
  for (size_t i = 0; i < ds.size(); ++i) {
    const auto& clip = ds.clip(i);
    auto sc = scorer(ds, i);
    check(sc.scores.size() == clip.asd_labels.size(), ErrorKind::kLength,
          "evaluate: scorer frame count mismatch on " + clip.clip_id);
    auto& bucket = by_snr[clip.snr_db];
    for (Bucket* b : {&all, &bucket}) {
      b->scores.insert(b->scores.end(), sc.scores.begin(), sc.scores.end());
      b->labels.insert(b->labels.end(), clip.asd_labels.begin(),
                       clip.asd_labels.end());
      b->clips += 1;
    }
    if (ds.speaking(i)) {
      check(sc.enhanced.size() == clip.clean_target.samples.size(),
            ErrorKind::kLength, "evaluate: enhanced length mismatch");
      const double si = si_sdr_db(sc.enhanced, clip.clean_target.samples);
      const double sd = sdr_db(sc.enhanced, clip.clean_target.samples);
      const double si_mix =
          si_sdr_db(clip.mixture.samples, clip.clean_target.samples);
      for (Bucket* b : {&all, &bucket}) {
        b->si_sdr.push_back(si);
        b->sdr.push_back(sd);
        b->si_sdri.push_back(si - si_mix);
        b->speaking += 1;
      }
    } else if (!sc.enhanced.empty()) {
      const double su = suppression_db(sc.enhanced, clip.mixture.samples);
      for (Bucket* b : {&all, &bucket}) b->suppression.push_back(su);
    }
  }

  EvalReport rep;
  rep.clip_count = all.clips;
  rep.frame_count = int64_t(all.labels.size());
  rep.speaking_count = all.speaking;
  rep.silent_count = all.clips - all.speaking;
  SnrBreakdownRow total;
  fill_detection(total, all);
  rep.map = total.map;
  rep.auc = total.auc;
  rep.f1 = total.f1;
  rep.sdr_db = mean(all.sdr);
  rep.si_sdr_db = mean(all.si_sdr);
  rep.si_sdri_db = mean(all.si_sdri);
  rep.silent_suppression_db = mean(all.suppression);
  for (const auto& [snr, b] : by_snr) {
    SnrBreakdownRow row;
    row.snr_db = snr;
    row.clip_count = b.clips;
    row.frame_count = int64_t(b.labels.size());
    row.speaking_count = b.speaking;
    // a single-SNR bucket can be single-class; detection metrics then stay 0
    const bool has_pos =
        std::count(b.labels.begin(), b.labels.end(), 1) > 0;
    const bool has_neg =
        std::count(b.labels.begin(), b.labels.end(), 0) > 0;
    if (has_pos && has_neg) fill_detection(row, b);
    row.sdr_db = mean(b.sdr);
    row.si_sdr_db = mean(b.si_sdr);
    row.si_sdri_db = mean(b.si_sdri);
    rep.per_snr.push_back(row);
  }
  return rep;
}

ClipScore score_clip(AdenetModel<float>& model, const Dataset& ds, size_t i) {
  NoGradGuard ng;
  auto inputs = ds.make_inputs(i, /*train_mode=*/false, 0);
  auto out = model.forward(inputs, /*training=*/false);
  ClipScore sc;
  sc.scores.resize(size_t(out.y_a->value.numel()));
  for (int64_t t = 0; t < out.y_a->value.numel(); ++t)
    sc.scores[size_t(t)] = double(out.y_a->value[t]);
  sc.enhanced.resize(size_t(out.y_s->value.numel()));
  for (int64_t t = 0; t < out.y_s->value.numel(); ++t)
    sc.enhanced[size_t(t)] = float(out.y_s->value[t]);
  return sc;
}

EvalReport evaluate_model(AdenetModel<float>& model, const Dataset& ds) {
  return evaluate_with_scorer(ds, [&model](const Dataset& d, size_t i) {
    return score_clip(model, d, i);
  });
}

}  // namespace adenet
