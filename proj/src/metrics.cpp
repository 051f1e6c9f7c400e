#include "adenet/objectives/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace adenet {

namespace {

void check_binary(const std::vector<double>& scores,
                  const std::vector<int>& labels) {
  check(scores.size() == labels.size() && !scores.empty(), ErrorKind::kLength,
        "metric: scores/labels size mismatch");
  for (double s : scores)
    check(std::isfinite(s), ErrorKind::kDegenerate, "metric: non-finite score");
  for (int l : labels)
    check(l == 0 || l == 1, ErrorKind::kConfig, "metric: labels must be 0/1");
}

int64_t count_pos(const std::vector<int>& labels) {
  return std::count(labels.begin(), labels.end(), 1);
}

}  // namespace

double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& labels) {
  check_binary(scores, labels);
  const int64_t n = int64_t(scores.size());
  const int64_t pos = count_pos(labels);
  check(pos > 0 && pos < n, ErrorKind::kMetric,
        "average_precision: needs both classes");
  std::vector<int64_t> order(static_cast<size_t>(n), 0);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
    return scores[size_t(a)] > scores[size_t(b)];
  });
  // Walk descending thresholds; a run of tied scores forms one P-R step, so a
  // single tie group integrates to exactly the positive prevalence.
  double ap = 0;
  int64_t tp = 0, seen = 0;
  int64_t i = 0;
  while (i < n) {
    int64_t j = i, dtp = 0;
    while (j < n &&
           scores[size_t(order[size_t(j)])] == scores[size_t(order[size_t(i)])]) {
      dtp += labels[size_t(order[size_t(j)])];
      ++j;
    }
    tp += dtp;
    seen = j;
    if (dtp > 0) ap += (double(dtp) / double(pos)) * (double(tp) / double(seen));
    i = j;
  }
  return ap;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_binary(scores, labels);
  const int64_t n = int64_t(scores.size());
  const int64_t pos = count_pos(labels);
  const int64_t neg = n - pos;
  check(pos > 0 && neg > 0, ErrorKind::kMetric, "roc_auc: needs both classes");
  std::vector<int64_t> order(static_cast<size_t>(n), 0);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
    return scores[size_t(a)] > scores[size_t(b)];
  });
  // group tied scores so ties earn half credit
  double auc = 0;
  double tp = 0, fp = 0;
  int64_t i = 0;
  while (i < n) {
    int64_t j = i;
    int64_t dtp = 0, dfp = 0;
    while (j < n &&
           scores[size_t(order[size_t(j)])] == scores[size_t(order[size_t(i)])]) {
      if (labels[size_t(order[size_t(j)])] == 1)
        ++dtp;
      else
        ++dfp;
      ++j;
    }
    const double tpr0 = tp / double(pos), fpr0 = fp / double(neg);
    tp += dtp;
    fp += dfp;
    const double tpr1 = tp / double(pos), fpr1 = fp / double(neg);
    auc += (fpr1 - fpr0) * (tpr0 + tpr1) * 0.5;
    i = j;
  }
  return auc;
}

double f1_at_threshold(const std::vector<double>& scores,
                       const std::vector<int>& labels, double threshold) {
  check_binary(scores, labels);
  int64_t tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    if (pred && labels[i] == 1) ++tp;
    if (pred && labels[i] == 0) ++fp;
    if (!pred && labels[i] == 1) ++fn;
  }
  if (tp == 0) return 0.0;
  const double precision = double(tp) / double(tp + fp);
  const double recall = double(tp) / double(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

namespace {
constexpr double kEps = 1e-8;
constexpr double kSdrCapDb = 160.0;

double energy(const std::vector<float>& x) {
  double e = 0;
  for (float v : x) e += double(v) * double(v);
  return e;
}
}  // namespace

double sdr_db(const std::vector<float>& est, const std::vector<float>& ref) {
  check(est.size() == ref.size() && !ref.empty(), ErrorKind::kLength,
        "sdr: length mismatch");
  check(energy(ref) > 0, ErrorKind::kDegenerate, "sdr: all-zero reference");
  double diff = 0;
  for (size_t i = 0; i < est.size(); ++i) {
    const double d = double(ref[i]) - double(est[i]);
    diff += d * d;
  }
  if (diff == 0) return kSdrCapDb;
  return 10.0 * std::log10(energy(ref) / (diff + kEps));
}

double si_sdr_db(const std::vector<float>& est, const std::vector<float>& ref) {
  check(est.size() == ref.size() && !ref.empty(), ErrorKind::kLength,
        "si_sdr: length mismatch");
  const size_t n = est.size();
  double me = 0, mr = 0;
  for (size_t i = 0; i < n; ++i) {
    me += est[i];
    mr += ref[i];
  }
  me /= double(n);
  mr /= double(n);
  double dot = 0, ref_en = 0;
  for (size_t i = 0; i < n; ++i) {
    const double e0 = double(est[i]) - me, r0 = double(ref[i]) - mr;
    dot += e0 * r0;
    ref_en += r0 * r0;
  }
  check(ref_en > 0, ErrorKind::kDegenerate,
        "si_sdr: reference is zero after mean removal");
  const double alpha = dot / (ref_en + kEps);
  double s_en = 0, e_en = 0;
  for (size_t i = 0; i < n; ++i) {
    const double r0 = double(ref[i]) - mr;
    const double s = alpha * r0;
    const double e = (double(est[i]) - me) - s;
    s_en += s * s;
    e_en += e * e;
  }
  return 20.0 * std::log10(std::sqrt(s_en) / (std::sqrt(e_en) + kEps));
}

double suppression_db(const std::vector<float>& est,
                      const std::vector<float>& mixture) {
  check(est.size() == mixture.size() && !mixture.empty(), ErrorKind::kLength,
        "suppression: length mismatch");
  const double ratio = energy(est) / (energy(mixture) + kEps);
  return -10.0 * std::log10(ratio + kEps);
}

namespace {
void put(std::ostringstream& os, const std::string& key, double v) {
  os << key << " " << v << "\n";
}
}  // namespace

std::string EvalReport::to_kv_text() const {
  std::ostringstream os;
  os.precision(10);
  put(os, "map", map);
  put(os, "auc", auc);
  put(os, "f1", f1);
  put(os, "sdr_db", sdr_db);
  put(os, "si_sdr_db", si_sdr_db);
  put(os, "si_sdri_db", si_sdri_db);
  put(os, "silent_suppression_db", silent_suppression_db);
  put(os, "clip_count", double(clip_count));
  put(os, "frame_count", double(frame_count));
  put(os, "speaking_count", double(speaking_count));
  put(os, "silent_count", double(silent_count));
  for (const auto& row : per_snr) {
    const std::string p = "snr" + std::to_string(int(row.snr_db)) + ".";
    put(os, p + "map", row.map);
    put(os, p + "auc", row.auc);
    put(os, p + "f1", row.f1);
    put(os, p + "sdr_db", row.sdr_db);
    put(os, p + "si_sdr_db", row.si_sdr_db);
    put(os, p + "si_sdri_db", row.si_sdri_db);
    put(os, p + "clip_count", double(row.clip_count));
  }
  return os.str();
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  os.precision(4);
  os << std::fixed;
  os << "  snr     mAP     AUC      F1   SDRdB  SISDRdB  SISDRi  clips\n";
  auto line = [&](const std::string& tag, double m, double a, double f, double s,
                  double ss, double si, int64_t c) {
    os << "  " << tag;
    for (size_t i = tag.size(); i < 5; ++i) os << ' ';
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%7.4f %7.4f %7.4f %7.2f %8.2f %7.2f %6lld\n",
                  m, a, f, s, ss, si, (long long)c);
    os << buf;
  };
  for (const auto& r : per_snr)
    line(std::to_string(int(r.snr_db)), r.map, r.auc, r.f1, r.sdr_db, r.si_sdr_db,
         r.si_sdri_db, r.clip_count);
  line("all", map, auc, f1, sdr_db, si_sdr_db, si_sdri_db, clip_count);
  return os.str();
}

}  // namespace adenet
