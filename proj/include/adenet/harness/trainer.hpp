#ifndef ADENET_HARNESS_TRAINER_HPP
#define ADENET_HARNESS_TRAINER_HPP

#include "adenet/harness/checkpoint.hpp"
#include "adenet/harness/evaluator.hpp"

namespace adenet {

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = -1;        // by validation composite, last epoch without val
  int64_t steps_run = 0;
  std::string checkpoint_path;  // last-epoch checkpoint (if out_path given)
  std::string best_path;
};

// Mini-batch Adam training over a synthetic corpus split. Deterministic given
// the config seed: init, clip order, augmentation draws and batch-norm updates
// all derive from it.
class Trainer {
 public:
  explicit Trainer(const RunConfig& cfg);
  Trainer(const RunConfig& cfg, const CorpusManifest& manifest);

  // out_path empty -> no checkpoint files written.
  TrainResult train(const std::string& out_path = "");

  AdenetModel<float>& model() { return *model_; }
  const Dataset& train_set() const { return train_; }
  const Dataset& val_set() const { return val_; }
  const RunConfig& config() const { return cfg_; }

 private:
  std::vector<std::vector<size_t>> epoch_batches(int epoch) const;

  RunConfig cfg_;
  Dataset train_, val_;
  std::unique_ptr<AdenetModel<float>> model_;
  std::unique_ptr<Adam<float>> adam_;
};

}  // namespace adenet

#endif  // ADENET_HARNESS_TRAINER_HPP
