#include "adenet/harness/dataset.hpp"

namespace adenet {

Dataset::Dataset(const CorpusManifest& manifest, const std::string& split_name) {
  for (const auto& rec : manifest.split(split_name)) {
    auto clip = load_clip(manifest, rec);
    auto feats = mfcc(clip.mixture);
    FaceClip fc;
    fc.frames = clip.faces.t;
    fc.data = clip.faces.data;
    auto [aligned_mfcc, aligned_faces] = align_streams(feats, fc);
    // alignment may trim trailing video frames; keep everything consistent
    if (aligned_faces.frames != clip.faces.t) {
      clip.faces.t = aligned_faces.frames;
      clip.faces.data.resize(size_t(aligned_faces.frames * clip.faces.h *
                                    clip.faces.w * clip.faces.c));
      clip.asd_labels.resize(size_t(aligned_faces.frames));
    }
    clips_.push_back(std::move(clip));
    mfcc_.push_back(std::move(aligned_mfcc));
  }
}

ModelInputs<float> Dataset::make_inputs(size_t i, bool train_mode,
                                        uint64_t aug_seed) const {
  const auto& clip = clips_[i];
  const auto& mf = mfcc_[i];
  ModelInputs<float> in;
  in.mfcc = Tensor<float>({mf.frames, kMfccDim});
  std::copy(mf.coeffs.begin(), mf.coeffs.end(), in.mfcc.data.begin());

  auto faces = preprocess_faces(clip.faces, train_mode, aug_seed);
  in.faces = Tensor<float>({faces.frames, 1, kFaceEdge, kFaceEdge});
  std::copy(faces.data.begin(), faces.data.end(), in.faces.data.begin());

  in.mixture = Tensor<float>({clip.mixture.size()});
  std::copy(clip.mixture.samples.begin(), clip.mixture.samples.end(),
            in.mixture.data.begin());
  return in;
}

Tensor<float> Dataset::clean(size_t i) const {
  const auto& c = clips_[i].clean_target;
  Tensor<float> t({c.size()});
  std::copy(c.samples.begin(), c.samples.end(), t.data.begin());
  return t;
}

}  // namespace adenet
