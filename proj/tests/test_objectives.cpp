#include "testutil.hpp"

#include "adenet/objectives/losses.hpp"
#include "adenet/objectives/metrics.hpp"

using namespace adenet;
using namespace adenet::testutil;

namespace {

Var<double> vec(std::vector<double> v) {
  Tensor<double> t({int64_t(v.size())});
  for (size_t i = 0; i < v.size(); ++i) t[int64_t(i)] = v[i];
  return constant(std::move(t));
}

// Brute-force AP over score thresholds: one P-R point per distinct score,
// rectangle integration of precision over recall steps.
double ap_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::vector<double> uniq = scores;
  std::sort(uniq.begin(), uniq.end(), std::greater<>());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  const double pos = double(std::count(labels.begin(), labels.end(), 1));
  double ap = 0, prev_recall = 0;
  for (double thr : uniq) {
    int64_t tp = 0, fp = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= thr) {
        if (labels[i] == 1)
          ++tp;
        else
          ++fp;
      }
    }
    const double recall = tp / pos;
    const double precision = double(tp) / double(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

// Brute-force AUC by counting positive/negative pairs (ties get half credit).
double auc_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0;
  int64_t pairs = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  return wins / double(pairs);
}

}  // namespace

TEST_CASE("si_sdr_loss: perfect estimate, scale invariance, hand example") {
  Rng rng(200);
  std::vector<double> ref(16000);
  for (auto& v : ref) v = rng.uniform(-0.5, 0.5);
  auto ref_v = vec(ref);
  auto loss_eq = si_sdr_loss(vec(ref), ref_v);
  CHECK(loss_eq->value[0] <= -160.0);

  std::vector<double> est(16000);
  for (size_t i = 0; i < est.size(); ++i) est[i] = ref[i] + 0.1 * rng.gauss();
  const double base = si_sdr_loss(vec(est), ref_v)->value[0];
  for (double alpha : {0.1, 10.0}) {
    std::vector<double> scaled = est;
    for (auto& v : scaled) v *= alpha;
    const double l = si_sdr_loss(vec(scaled), ref_v)->value[0];
    CHECK(std::abs(l - base) < 1e-6);
  }

  // ref=[1,-1], est=[1,0]: e_noise is eps-bounded, loss effectively -inf
  auto hand = si_sdr_loss(vec({1.0, 0.0}), vec({1.0, -1.0}));
  CHECK(hand->value[0] < -150.0);

  // approximate invariance to reference scaling (eps breaks exactness)
  std::vector<double> ref2 = ref;
  for (double alpha : {0.5, 2.0}) {
    std::vector<double> rs = ref2;
    for (auto& v : rs) v *= alpha;
    const double l = si_sdr_loss(vec(est), vec(rs))->value[0];
    CHECK(std::abs(l - base) < 1e-3);
  }

  CHECK_THROWS_AS(si_sdr_loss(vec(est), vec(std::vector<double>(16000, 0.25))),
                  Error);  // constant ref is zero after mean removal
}

TEST_CASE("si_sdr_loss gradient matches finite differences") {
  Rng rng(201);
  std::vector<double> ref(64), est(64);
  for (auto& v : ref) v = rng.uniform(-1, 1);
  for (size_t i = 0; i < est.size(); ++i) est[i] = ref[i] + 0.3 * rng.gauss();
  Tensor<double> et({64});
  for (size_t i = 0; i < est.size(); ++i) et[int64_t(i)] = est[i];
  auto est_leaf = leaf(std::move(et));
  auto ref_v = vec(ref);
  gradcheck({est_leaf}, [&] { return si_sdr_loss(est_leaf, ref_v); }, 1e-6,
            1e-5);
}

TEST_CASE("asd_loss: perfect prediction, ln 2, symmetry, gradient") {
  std::vector<int> gt{1, 0, 1, 1, 0};
  auto perfect = vec({1.0, 0.0, 1.0, 1.0, 0.0});
  CHECK(asd_loss(perfect, gt)->value[0] < 1e-10);

  auto half = vec(std::vector<double>(5, 0.5));
  CHECK(std::abs(asd_loss(half, gt)->value[0] - std::log(2.0)) < 1e-9);

  std::vector<double> p{0.2, 0.7, 0.9, 0.4, 0.6};
  std::vector<double> p_flip(5);
  std::vector<int> gt_flip(5);
  for (int i = 0; i < 5; ++i) {
    p_flip[size_t(i)] = 1.0 - p[size_t(i)];
    gt_flip[size_t(i)] = 1 - gt[size_t(i)];
  }
  CHECK(asd_loss(vec(p), gt)->value[0] ==
        doctest::Approx(asd_loss(vec(p_flip), gt_flip)->value[0])
            .epsilon(1e-12));

  CHECK(asd_loss(vec(p), gt)->value[0] >= 0.0);
  CHECK_THROWS_AS(asd_loss(vec({0.5}), gt), Error);

  Tensor<double> pt({5});
  for (int i = 0; i < 5; ++i) pt[i] = p[size_t(i)];
  auto pl = leaf(std::move(pt));
  gradcheck({pl}, [&] { return asd_loss(pl, gt); }, 1e-6, 1e-5);
}

TEST_CASE("total_loss composition") {
  auto l_se = vec({2.5});
  auto l_asd = vec({0.4});
  LossWeights w;  // 1.0 / 1.0
  CHECK(total_loss(l_se, l_asd, w)->value[0] == doctest::Approx(2.9));
  w.lambda1 = 0.0;
  CHECK(total_loss(l_se, l_asd, w)->value[0] == doctest::Approx(0.4));
  w.lambda1 = 2.0;
  w.lambda2 = 0.5;
  CHECK(total_loss(l_se, l_asd, w)->value[0] == doctest::Approx(5.2));
  CHECK(total_loss(Var<double>{}, l_asd, w)->value[0] == doctest::Approx(0.2));
}

TEST_CASE("AP / AUC worked examples") {
  std::vector<double> s{0.9, 0.8, 0.7, 0.6};
  std::vector<int> l{1, 0, 1, 0};
  CHECK(average_precision(s, l) == doctest::Approx(0.5 * (1.0 + 2.0 / 3.0)));
  CHECK(roc_auc(s, l) == doctest::Approx(0.75));

  std::vector<double> sep{0.9, 0.8, 0.2, 0.1};
  std::vector<int> lsep{1, 1, 0, 0};
  CHECK(average_precision(sep, lsep) == doctest::Approx(1.0));
  CHECK(roc_auc(sep, lsep) == doctest::Approx(1.0));
  CHECK(f1_at_threshold(sep, lsep) == doctest::Approx(1.0));

  // permutation invariance
  std::vector<double> s2{0.9, 0.7, 0.8, 0.6};
  std::vector<int> l2{1, 1, 0, 0};
  std::vector<double> s3{0.6, 0.8, 0.9, 0.7};
  std::vector<int> l3{0, 0, 1, 1};
  CHECK(average_precision(s2, l2) == doctest::Approx(average_precision(s3, l3)));
  CHECK(roc_auc(s2, l2) == doctest::Approx(roc_auc(s3, l3)));

  CHECK_THROWS_AS(average_precision({0.1, 0.2}, {1, 1}), Error);
  CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {0, 0}), Error);
  CHECK(f1_at_threshold({0.9, 0.8}, {0, 0}) == 0.0);  // no true positives
}

TEST_CASE("AP / AUC match brute-force oracles on 1000 random cases") {
  Rng rng(202);
  int checked = 0;
  while (checked < 1000) {
    const int n = 2 + int(rng.uniform_int(9));  // lengths 2..10
    std::vector<double> scores(static_cast<size_t>(n), 0.0);
    std::vector<int> labels(static_cast<size_t>(n), 0);
    // quantized scores force ties regularly
    for (auto& s : scores) s = double(rng.uniform_int(5)) / 4.0;
    for (auto& l : labels) l = int(rng.uniform_int(2));
    const int64_t pos = std::count(labels.begin(), labels.end(), 1);
    if (pos == 0 || pos == n) continue;
    ++checked;
    CHECK(std::abs(average_precision(scores, labels) -
                   ap_oracle(scores, labels)) < 1e-12);
    CHECK(std::abs(roc_auc(scores, labels) - auc_oracle(scores, labels)) <
          1e-12);
  }
}

TEST_CASE("constant scores collapse AP to the positive prevalence") {
  std::vector<double> s(8, 0.5);
  std::vector<int> l{1, 0, 0, 1, 0, 1, 0, 0};
  CHECK(average_precision(s, l) == doctest::Approx(3.0 / 8.0));
  CHECK(ap_oracle(s, l) == doctest::Approx(3.0 / 8.0));
  CHECK(roc_auc(s, l) == doctest::Approx(0.5));
}

TEST_CASE("sdr metric examples") {
  std::vector<float> ref(1000);
  Rng rng(203);
  for (auto& v : ref) v = float(rng.uniform(-0.5, 0.5));
  CHECK(sdr_db(ref, ref) >= 160.0);

  std::vector<float> zero(1000, 0.0f);
  CHECK(sdr_db(zero, ref) == doctest::Approx(0.0).epsilon(1e-6));

  // est = ref + delta with |delta|^2 = |ref|^2 / 100 -> 20 dB
  double ref_en = 0;
  for (float v : ref) ref_en += double(v) * double(v);
  std::vector<float> delta(1000);
  double d_en = 0;
  for (auto& v : delta) {
    v = float(rng.uniform(-0.5, 0.5));
    d_en += double(v) * double(v);
  }
  const double scale = std::sqrt(ref_en / 100.0 / d_en);
  std::vector<float> est(1000);
  for (size_t i = 0; i < est.size(); ++i)
    est[i] = float(double(ref[i]) + scale * double(delta[i]));
  CHECK(sdr_db(est, ref) == doctest::Approx(20.0).epsilon(1e-3));

  CHECK(si_sdr_db(ref, ref) > 150.0);
  CHECK_THROWS_AS(sdr_db(ref, zero), Error);
}

TEST_CASE("suppression ratio for silent targets") {
  std::vector<float> mix(1000);
  Rng rng(204);
  for (auto& v : mix) v = float(rng.uniform(-0.5, 0.5));
  std::vector<float> tenth(1000);
  for (size_t i = 0; i < mix.size(); ++i) tenth[i] = mix[i] * 0.1f;
  // -10*log10(0.01) = 20 dB of suppression
  CHECK(suppression_db(tenth, mix) == doctest::Approx(20.0).epsilon(1e-3));
}

TEST_CASE("eval report serialization round trip sanity") {
  EvalReport rep;
  rep.map = 0.9;
  rep.auc = 0.95;
  rep.f1 = 0.8;
  rep.sdr_db = 12.0;
  rep.si_sdr_db = 11.0;
  rep.si_sdri_db = 5.0;
  rep.clip_count = 4;
  SnrBreakdownRow row;
  row.snr_db = 10;
  row.map = 0.9;
  row.clip_count = 4;
  rep.per_snr.push_back(row);
  const std::string kv = rep.to_kv_text();
  CHECK(kv.find("map 0.9") != std::string::npos);
  CHECK(kv.find("snr10.map 0.9") != std::string::npos);
  CHECK(rep.to_table().find("all") != std::string::npos);
}
