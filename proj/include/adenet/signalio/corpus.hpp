#ifndef ADENET_SIGNALIO_CORPUS_HPP
#define ADENET_SIGNALIO_CORPUS_HPP

#include <optional>

#include "adenet/core/rng.hpp"
#include "adenet/signalio/mix.hpp"

namespace adenet {

enum class SpeakerKind { kSpeaking, kSilentStatic, kSilentChewing };

const char* speaker_kind_name(SpeakerKind k);
SpeakerKind speaker_kind_from_name(const std::string& s);

// Untyped frame stack, row-major [T,H,W,C]; grayscale C=1 throughout.
struct FrameTensor {
  int64_t t = 0, h = 0, w = 0, c = 1;
  std::vector<float> data;

  float& at(int64_t fi, int64_t y, int64_t x) {
    return data[size_t(((fi * h + y) * w + x) * c)];
  }
  float at(int64_t fi, int64_t y, int64_t x) const {
    return data[size_t(((fi * h + y) * w + x) * c)];
  }
};

struct ClipSpec {
  double duration_s = 1.0;  // multiple of 1 s in [1,4]
  SpeakerKind kind = SpeakerKind::kSpeaking;
  double snr_db = 10.0;     // one of {0,5,10}
};

// One synthetic example. Speaking clips carry an amplitude-modulated harmonic
// stack; the rendered mouth height tracks the speech envelope so the corpus
// embodies the audio-visual correspondence the model is meant to learn.
struct ClipRecord {
  Waveform mixture, clean_target, noise;
  FrameTensor faces;           // T_v x 112 x 112 x 1, values in [0,1]
  std::vector<int> asd_labels; // length T_v
  SpeakerKind kind = SpeakerKind::kSpeaking;
  std::string clip_id;
  double snr_db = 10.0;
  double duration_s = 1.0;
  // generator metadata (not serialized): per-frame mean speech envelope
  std::vector<float> frame_envelope;
};

ClipRecord gen_clip(uint64_t seed, const ClipSpec& spec);

struct CorpusConfig {
  int train_count = 8, val_count = 4, test_count = 4;
  double ratio_speaking = 0.5, ratio_chewing = 0.25, ratio_static = 0.25;
  uint64_t master_seed = 1234;
  std::vector<double> snr_list{0.0, 5.0, 10.0};
  int duration_min_s = 1, duration_max_s = 4;  // whole seconds

  void validate() const;
};

CorpusConfig load_corpus_config(const std::string& path);

struct ManifestRecord {
  std::string clip_id;
  std::string mixture_path, clean_path, noise_path, faces_path, labels_path;
  SpeakerKind kind = SpeakerKind::kSpeaking;
  double snr_db = 10.0;
  double duration_s = 1.0;
  std::string split;  // train|val|test
};

struct CorpusManifest {
  uint64_t generator_seed = 0;
  std::string root_dir;  // directory holding the referenced files
  std::vector<ManifestRecord> records;

  std::vector<ManifestRecord> split(const std::string& name) const;
};

// Writes WAVs, face tensors, labels and manifest.jsonl under out_dir.
// Per-clip seeds derive from hash(master_seed, global index), so generation is
// order-independent and reruns are byte-identical.
CorpusManifest gen_corpus(const CorpusConfig& cfg, const std::string& out_dir);

// Loads + validates (unique ids, every referenced file exists).
CorpusManifest load_manifest(const std::string& manifest_path);

ClipRecord load_clip(const CorpusManifest& m, const ManifestRecord& rec);

// Face tensor file I/O: flat little-endian float32 with a "T H W C" sidecar.
void save_frames(const std::string& bin_path, const FrameTensor& frames);
FrameTensor load_frames(const std::string& bin_path);

void save_labels(const std::string& path, const std::vector<int>& labels);
std::vector<int> load_labels(const std::string& path);

}  // namespace adenet

#endif  // ADENET_SIGNALIO_CORPUS_HPP
