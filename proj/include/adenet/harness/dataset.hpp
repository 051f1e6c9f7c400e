#ifndef ADENET_HARNESS_DATASET_HPP
#define ADENET_HARNESS_DATASET_HPP

#include "adenet/features/faces.hpp"
#include "adenet/model/adenet_model.hpp"
#include "adenet/signalio/corpus.hpp"

namespace adenet {

// In-memory split of a corpus: raw clips plus precomputed MFCC on the mixture.
// Face augmentation happens at batch time so each epoch redraws transforms.
class Dataset {
 public:
  Dataset() = default;
  Dataset(const CorpusManifest& manifest, const std::string& split_name);

  size_t size() const { return clips_.size(); }
  const ClipRecord& clip(size_t i) const { return clips_[i]; }
  bool speaking(size_t i) const {
    return clips_[i].kind == SpeakerKind::kSpeaking;
  }
  double snr(size_t i) const { return clips_[i].snr_db; }

  // aug_seed only matters in train mode.
  ModelInputs<float> make_inputs(size_t i, bool train_mode,
                                 uint64_t aug_seed) const;

  Tensor<float> clean(size_t i) const;
  const std::vector<int>& labels(size_t i) const {
    return clips_[i].asd_labels;
  }

 private:
  std::vector<ClipRecord> clips_;
  std::vector<MfccSequence> mfcc_;  // aligned to 4*T_v
};

}  // namespace adenet

#endif  // ADENET_HARNESS_DATASET_HPP
