#include "adenet/harness/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace adenet {

namespace {

std::string param_norm_dump(const ParamSet<float>& ps) {
  std::map<std::string, double> norms;
  for (const auto& [name, v] : ps.params()) {
    const std::string top = name.substr(0, name.find('.'));
    double& acc = norms[top];
    for (const auto& x : v->value.data) acc += double(x) * double(x);
  }
  std::ostringstream os;
  for (const auto& [k, v] : norms) os << " " << k << "=" << std::sqrt(v);
  return os.str();
}

}  // namespace

Trainer::Trainer(const RunConfig& cfg)
    : Trainer(cfg, load_manifest(cfg.data.dir + "/manifest.jsonl")) {}

Trainer::Trainer(const RunConfig& cfg, const CorpusManifest& manifest)
    : cfg_(cfg) {
  cfg_.validate();
  train_ = Dataset(manifest, "train");
  val_ = Dataset(manifest, "val");
  check(train_.size() > 0, ErrorKind::kConfig, "trainer: empty train split");
  if (cfg_.data.snr_mode == SnrMode::kFixed) {
    for (size_t i = 1; i < train_.size(); ++i)
      check(train_.snr(i) == train_.snr(0), ErrorKind::kConfig,
            "trainer: snr_mode=fixed requires a single-SNR corpus");
  }
  model_ = std::make_unique<AdenetModel<float>>(cfg_.model, cfg_.optim.seed);
  adam_ = std::make_unique<Adam<float>>(model_->params(),
                                        cfg_.optim.weight_decay,
                                        cfg_.optim.grad_clip);
}

// One SNR level per batch, cycling the levels present in the corpus.
std::vector<std::vector<size_t>> Trainer::epoch_batches(int epoch) const {
  std::map<double, std::vector<size_t>> groups;
  for (size_t i = 0; i < train_.size(); ++i)
    groups[train_.snr(i)].push_back(i);
  int gi = 0;
  std::vector<std::vector<size_t>> shuffled;
  for (auto& [snr, idx] : groups) {
    Rng rng(Rng::hash_combine(cfg_.optim.seed,
                              0x5eed0000ULL + uint64_t(epoch) * 97 + gi++));
    for (size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[size_t(rng.uniform_int(int64_t(i)))]);
    shuffled.push_back(idx);
  }
  std::vector<size_t> cursor(shuffled.size(), 0);
  std::vector<std::vector<size_t>> batches;
  const size_t bs = size_t(cfg_.optim.batch_size);
  size_t remaining = train_.size();
  size_t g = 0;
  while (remaining > 0) {
    while (cursor[g] >= shuffled[g].size()) g = (g + 1) % shuffled.size();
    auto& idx = shuffled[g];
    auto& cur = cursor[g];
    std::vector<size_t> batch;
    while (cur < idx.size() && batch.size() < bs) {
      batch.push_back(idx[cur++]);
      --remaining;
    }
    batches.push_back(std::move(batch));
    g = (g + 1) % shuffled.size();
  }
  return batches;
}

TrainResult Trainer::train(const std::string& out_path) {
  TrainResult res;
  int64_t step = 0;
  bool stop = false;
  double best_composite = -1e300;

  for (int epoch = 0; epoch < cfg_.optim.epochs && !stop; ++epoch) {
    const double lr = cfg_.optim.lr * std::pow(cfg_.optim.lr_decay, epoch);
    double sum_se = 0, sum_asd = 0, sum_total = 0;
    int64_t n_se = 0, n_asd = 0, n_batches = 0;

    for (const auto& batch : epoch_batches(epoch)) {
      model_->params().zero_grads();
      int n_speaking = 0;
      for (size_t i : batch)
        if (train_.speaking(i)) ++n_speaking;
      double batch_total = 0;
      for (size_t i : batch) {
        const uint64_t aug_seed = Rng::hash_combine(
            Rng::hash_combine(cfg_.optim.seed, uint64_t(epoch)), uint64_t(i));
        auto inputs = train_.make_inputs(i, /*train_mode=*/true, aug_seed);
        auto out = model_->forward(inputs, /*training=*/true);

        auto l_asd = asd_loss(out.y_a, train_.labels(i));
        Var<float> l_se;
        if (train_.speaking(i))
          l_se = si_sdr_loss(out.y_s, constant(train_.clean(i)));

        // batch means: L_se over speaking clips only, L_asd over all clips
        Var<float> clip_loss = mul_scalar(
            l_asd, cfg_.loss.lambda2 / double(batch.size()));
        if (l_se)
          clip_loss = add(clip_loss, mul_scalar(l_se, cfg_.loss.lambda1 /
                                                          double(n_speaking)));
        const double lv = double(clip_loss->value[0]);
        if (!std::isfinite(lv)) {
          throw Error(ErrorKind::kTrain,
                      "NaN/Inf loss at epoch " + std::to_string(epoch) +
                          " step " + std::to_string(step) + " clip " +
                          train_.clip(i).clip_id + "; param norms:" +
                          param_norm_dump(model_->params()));
        }
        batch_total += lv;
        sum_asd += double(l_asd->value[0]);
        ++n_asd;
        if (l_se) {
          sum_se += double(l_se->value[0]);
          ++n_se;
        }
        backward(clip_loss);
      }
      adam_->step(model_->params(), lr);
      sum_total += batch_total;
      ++n_batches;
      ++step;
      if (cfg_.optim.max_steps > 0 && step >= cfg_.optim.max_steps) {
        stop = true;
        break;
      }
    }

    EpochStats st;
    st.epoch = epoch;
    st.lr = lr;
    st.loss_total = n_batches ? sum_total / double(n_batches) : 0;
    st.loss_se = n_se ? sum_se / double(n_se) : 0;
    st.loss_asd = n_asd ? sum_asd / double(n_asd) : 0;
    if (val_.size() > 0) {
      try {
        auto rep = evaluate_model(*model_, val_);
        st.val_auc = rep.auc;
        st.val_map = rep.map;
        st.val_f1 = rep.f1;
        st.val_si_sdri = rep.si_sdri_db;
        st.has_val = true;
      } catch (const Error&) {
        st.has_val = false;  // single-class val split
      }
    }
    res.history.push_back(st);

    const double composite =
        st.has_val ? st.val_auc + st.val_si_sdri / 10.0 : double(epoch);
    if (composite > best_composite) {
      best_composite = composite;
      res.best_epoch = epoch;
      if (!out_path.empty())
        save_checkpoint(out_path + ".best", *model_, cfg_, adam_.get(), epoch,
                        step, res.history);
    }
    if (!out_path.empty())
      save_checkpoint(out_path, *model_, cfg_, adam_.get(), epoch, step,
                      res.history);
  }
  res.steps_run = step;
  if (!out_path.empty()) {
    res.checkpoint_path = out_path;
    res.best_path = out_path + ".best";
  }
  return res;
}

}  // namespace adenet
