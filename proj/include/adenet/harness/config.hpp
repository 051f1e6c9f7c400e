#ifndef ADENET_HARNESS_CONFIG_HPP
#define ADENET_HARNESS_CONFIG_HPP

#include "adenet/model/adenet_model.hpp"
#include "adenet/objectives/losses.hpp"
#include "adenet/util/kv.hpp"

namespace adenet {

struct OptimConfig {
  double lr = 1e-4;
  double weight_decay = 1e-4;
  double lr_decay = 0.95;  // multiplicative, per epoch
  int epochs = 10;
  int batch_size = 1;
  uint64_t seed = 1;
  double grad_clip = 5.0;
  int64_t max_steps = 0;  // 0 = no cap

  void validate() const {
    check(lr > 0, ErrorKind::kConfig, "optim: lr must be > 0");
    check(lr_decay > 0 && lr_decay <= 1.0, ErrorKind::kConfig,
          "optim: lr_decay must be in (0,1]");
    check(epochs >= 1 && batch_size >= 1, ErrorKind::kConfig,
          "optim: epochs/batch_size must be >= 1");
  }
};

enum class SnrMode { kMixed, kFixed };

struct DataConfig {
  std::string dir;
  SnrMode snr_mode = SnrMode::kMixed;
};

struct RunConfig {
  ModelConfig model;
  OptimConfig optim;
  DataConfig data;
  LossWeights loss;

  void validate() const {
    model.validate();
    optim.validate();
    check(loss.lambda1 >= 0 && loss.lambda2 >= 0, ErrorKind::kConfig,
          "loss: negative weights");
  }
};

RunConfig parse_run_config(const std::map<std::string, std::string>& kv);
// Reads key = value text; ADENET_SEED in the environment overrides optim.seed.
RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_text(const std::string& text);
std::string serialize_run_config(const RunConfig& cfg);

// Number of keys whose serialized value differs (ablation bijection checks).
int config_diff_count(const RunConfig& a, const RunConfig& b);

enum class AblationAxis {
  kNoCmc,         // cross-modal attention -> per-stream self-attention
  kNoMln,         // mln_position = none
  kMlnPosition,   // move the MLN to a given stage
  kAudioRaw,      // raw-waveform front-end
  kNoAToS,        // sever detection -> enhancement
  kNoSToA,        // sever enhancement -> detection
  kTcn,           // TCN separation stack
};

AblationAxis ablation_axis_from_name(const std::string& s);
const char* ablation_axis_name(AblationAxis a);
std::vector<AblationAxis> all_ablation_axes();

// Returns base with exactly one behavior flag changed.
RunConfig ablate(const RunConfig& base, AblationAxis axis,
                 MlnPosition pos = MlnPosition::kFinal);

}  // namespace adenet

#endif  // ADENET_HARNESS_CONFIG_HPP
