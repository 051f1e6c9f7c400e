#include "adenet/features/faces.hpp"

#include <cmath>

namespace adenet {

FaceClip resize_bilinear(const FrameTensor& raw) {
  check(raw.t > 0 && raw.h > 0 && raw.w > 0 && raw.c == 1, ErrorKind::kLength,
        "resize: empty clip");
  FaceClip out;
  out.frames = raw.t;
  out.data.resize(size_t(raw.t * kFaceEdge * kFaceEdge));
  if (raw.h == kFaceEdge && raw.w == kFaceEdge) {
    std::copy(raw.data.begin(), raw.data.end(), out.data.begin());
    return out;
  }
  const double sy = double(raw.h) / kFaceEdge;
  const double sx = double(raw.w) / kFaceEdge;
  for (int64_t fi = 0; fi < raw.t; ++fi)
    for (int64_t y = 0; y < kFaceEdge; ++y) {
      double py = (double(y) + 0.5) * sy - 0.5;
      py = std::max(0.0, std::min(py, double(raw.h - 1)));
      const int64_t y0 = int64_t(py);
      const int64_t y1 = std::min(y0 + 1, raw.h - 1);
      const double wy = py - double(y0);
      for (int64_t x = 0; x < kFaceEdge; ++x) {
        double px = (double(x) + 0.5) * sx - 0.5;
        px = std::max(0.0, std::min(px, double(raw.w - 1)));
        const int64_t x0 = int64_t(px);
        const int64_t x1 = std::min(x0 + 1, raw.w - 1);
        const double wx = px - double(x0);
        const double v = (1 - wy) * ((1 - wx) * raw.at(fi, y0, x0) +
                                     wx * raw.at(fi, y0, x1)) +
                         wy * ((1 - wx) * raw.at(fi, y1, x0) +
                               wx * raw.at(fi, y1, x1));
        out.at(fi, y, x) = float(v);
      }
    }
  return out;
}

FaceClip augment_clip(const FaceClip& clip, bool flip, double angle_deg) {
  FaceClip out;
  out.frames = clip.frames;
  out.data.resize(clip.data.size());

  FaceClip flipped;
  const FaceClip* src = &clip;
  if (flip) {
    flipped.frames = clip.frames;
    flipped.data.resize(clip.data.size());
    for (int64_t fi = 0; fi < clip.frames; ++fi)
      for (int64_t y = 0; y < kFaceEdge; ++y)
        for (int64_t x = 0; x < kFaceEdge; ++x)
          flipped.at(fi, y, x) = clip.at(fi, y, kFaceEdge - 1 - x);
    src = &flipped;
  }
  if (angle_deg == 0.0) {
    out.data = src->data;
    return out;
  }
  const double rad = angle_deg * M_PI / 180.0;
  const double cs = std::cos(rad), sn = std::sin(rad);
  const double cc = (kFaceEdge - 1) / 2.0;
  for (int64_t fi = 0; fi < clip.frames; ++fi)
    for (int64_t y = 0; y < kFaceEdge; ++y)
      for (int64_t x = 0; x < kFaceEdge; ++x) {
        // inverse rotation to source coordinates
        const double dx = double(x) - cc, dy = double(y) - cc;
        const double sx = cs * dx + sn * dy + cc;
        const double sy = -sn * dx + cs * dy + cc;
        double v = 0.0;
        if (sx >= 0 && sx <= kFaceEdge - 1 && sy >= 0 && sy <= kFaceEdge - 1) {
          const int64_t x0 = int64_t(sx), y0 = int64_t(sy);
          const int64_t x1 = std::min(x0 + 1, int64_t(kFaceEdge - 1));
          const int64_t y1 = std::min(y0 + 1, int64_t(kFaceEdge - 1));
          const double wx = sx - double(x0), wy = sy - double(y0);
          v = (1 - wy) * ((1 - wx) * src->at(fi, y0, x0) +
                          wx * src->at(fi, y0, x1)) +
              wy * ((1 - wx) * src->at(fi, y1, x0) + wx * src->at(fi, y1, x1));
        }
        out.at(fi, y, x) = float(v);
      }
  return out;
}

FaceClip preprocess_faces(const FrameTensor& raw, bool train_mode,
                          uint64_t seed) {
  auto resized = resize_bilinear(raw);
  if (!train_mode) return resized;
  Rng rng(seed);
  const bool flip = rng.bernoulli(0.5);
  const double angle = rng.uniform(-15.0, 15.0);
  return augment_clip(resized, flip, angle);
}

std::pair<MfccSequence, FaceClip> align_streams(const MfccSequence& m,
                                                const FaceClip& f) {
  check(m.frames > 0 && f.frames > 0, ErrorKind::kLength,
        "align_streams: empty stream");
  const int64_t tv_from_mfcc = (m.frames + 3) / 4;  // ceil
  check(std::llabs(f.frames - tv_from_mfcc) <= 1, ErrorKind::kAlignment,
        "align_streams: streams disagree by more than one video frame");
  const int64_t tv = std::min(f.frames, tv_from_mfcc);
  const int64_t needed = 4 * tv;

  FaceClip faces;
  faces.frames = tv;
  faces.data.assign(f.data.begin(),
                    f.data.begin() + tv * kFaceEdge * kFaceEdge);

  MfccSequence mf;
  mf.frames = needed;
  mf.frame_rate = m.frame_rate;
  mf.coeffs.resize(size_t(needed * kMfccDim));
  const int64_t copy = std::min(m.frames, needed);
  std::copy(m.coeffs.begin(), m.coeffs.begin() + copy * kMfccDim,
            mf.coeffs.begin());
  for (int64_t fi = copy; fi < needed; ++fi)  // edge replication
    std::copy(m.coeffs.begin() + (copy - 1) * kMfccDim,
              m.coeffs.begin() + copy * kMfccDim,
              mf.coeffs.begin() + fi * kMfccDim);
  return {std::move(mf), std::move(faces)};
}

}  // namespace adenet
