#ifndef ADENET_FEATURES_FACES_HPP
#define ADENET_FEATURES_FACES_HPP

#include "adenet/features/mfcc.hpp"
#include "adenet/signalio/corpus.hpp"

namespace adenet {

constexpr int kFaceEdge = 112;

// Preprocessed face clip: T_v x 112 x 112, values in [0,1].
struct FaceClip {
  int64_t frames = 0;
  std::vector<float> data;  // frames*112*112

  float at(int64_t fi, int64_t y, int64_t x) const {
    return data[size_t((fi * kFaceEdge + y) * kFaceEdge + x)];
  }
  float& at(int64_t fi, int64_t y, int64_t x) {
    return data[size_t((fi * kFaceEdge + y) * kFaceEdge + x)];
  }
};

// Bilinear resize of every frame to 112x112 (exact copy when already sized).
FaceClip resize_bilinear(const FrameTensor& raw);

// One transform for the whole clip: optional horizontal flip, then rotation
// about the frame center (degrees, zero-filled outside). angle == 0 is an
// exact identity.
FaceClip augment_clip(const FaceClip& clip, bool flip, double angle_deg);

// Resize; in train mode also flip with p=0.5 and rotate uniform [-15,15]
// degrees, both drawn from `seed` and shared by all frames of the clip.
FaceClip preprocess_faces(const FrameTensor& raw, bool train_mode, uint64_t seed);

// Trims/pads so T_mfcc == 4*T_v exactly (100 Hz vs 25 fps). Trailing frames
// are dropped from the longer stream; the MFCC side may be edge-padded by up
// to 4 frames. Disagreement beyond one video frame is an alignment error.
std::pair<MfccSequence, FaceClip> align_streams(const MfccSequence& m,
                                                const FaceClip& f);

}  // namespace adenet

#endif  // ADENET_FEATURES_FACES_HPP
