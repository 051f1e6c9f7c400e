#include "adenet/signalio/corpus.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "adenet/util/kv.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace adenet {

const char* speaker_kind_name(SpeakerKind k) {
  switch (k) {
    case SpeakerKind::kSpeaking: return "speaking";
    case SpeakerKind::kSilentStatic: return "silent_static";
    case SpeakerKind::kSilentChewing: return "silent_chewing";
  }
  return "?";
}

SpeakerKind speaker_kind_from_name(const std::string& s) {
  if (s == "speaking") return SpeakerKind::kSpeaking;
  if (s == "silent_static") return SpeakerKind::kSilentStatic;
  if (s == "silent_chewing") return SpeakerKind::kSilentChewing;
  throw Error(ErrorKind::kConfig, "unknown speaker kind: " + s);
}

namespace {

constexpr int kFaceSize = 112;
constexpr double kActivityThreshold = 0.1;  // frame mean envelope -> label 1

// Piecewise speech envelope in [0,1]: voiced plateaus with 30 ms cosine ramps
// separated by pauses.
std::vector<float> make_envelope(Rng& rng, int64_t n_samples) {
  std::vector<float> env(size_t(n_samples), 0.0f);
  const int64_t ramp = kSampleRate * 3 / 100;  // 30 ms
  int64_t pos = int64_t(rng.uniform(0.04, 0.15) * kSampleRate);
  while (pos < n_samples) {
    const int64_t voiced = int64_t(rng.uniform(0.25, 0.60) * kSampleRate);
    const double amp = rng.uniform(0.6, 1.0);
    const int64_t end = std::min(pos + voiced, n_samples);
    for (int64_t t = pos; t < end; ++t) {
      const int64_t into = t - pos;
      const int64_t left = end - 1 - t;
      double r = 1.0;
      if (into < ramp) r = 0.5 - 0.5 * std::cos(M_PI * double(into) / ramp);
      if (left < ramp)
        r = std::min(r, 0.5 - 0.5 * std::cos(M_PI * double(left) / ramp));
      env[size_t(t)] = float(amp * r);
    }
    pos = end + int64_t(rng.uniform(0.10, 0.35) * kSampleRate);
  }
  return env;
}

std::vector<float> harmonic_stack(Rng& rng, const std::vector<float>& env) {
  const double f0 = rng.uniform(100.0, 250.0);
  double phase[5];
  for (auto& p : phase) p = rng.uniform(0.0, 2.0 * M_PI);
  std::vector<float> out(env.size());
  double peak = 0;
  for (size_t t = 0; t < env.size(); ++t) {
    double s = 0;
    double amp = 1.0;
    for (int k = 1; k <= 5; ++k) {
      s += amp * std::sin(2.0 * M_PI * k * f0 * double(t) / kSampleRate +
                          phase[k - 1]);
      amp *= 0.6;
    }
    out[t] = float(double(env[t]) * s);
    peak = std::max(peak, std::abs(double(out[t])));
  }
  if (peak > 0)
    for (auto& v : out) v = float(double(v) * 0.45 / peak);
  return out;
}

std::vector<float> filtered_noise(Rng& rng, int64_t n) {
  const double alpha = rng.uniform(0.3, 0.8);
  std::vector<float> out(static_cast<size_t>(n), 0.0f);
  double y = 0, peak = 0;
  for (int64_t t = 0; t < n; ++t) {
    y = alpha * y + (1.0 - alpha) * rng.gauss();
    out[size_t(t)] = float(y);
    peak = std::max(peak, std::abs(y));
  }
  if (peak > 0)
    for (auto& v : out) v = float(double(v) * 0.3 / peak);
  return out;
}

void fill_circle(FrameTensor& f, int64_t fi, double cx, double cy, double r,
                 float value) {
  for (int64_t y = int64_t(cy - r); y <= int64_t(cy + r); ++y)
    for (int64_t x = int64_t(cx - r); x <= int64_t(cx + r); ++x) {
      if (y < 0 || y >= f.h || x < 0 || x >= f.w) continue;
      const double dx = double(x) - cx, dy = double(y) - cy;
      if (dx * dx + dy * dy <= r * r) f.at(fi, y, x) = value;
    }
}

// Fixed geometric head with eye blobs; only the mouth height varies.
void render_face(FrameTensor& f, int64_t fi, double mouth_openness) {
  for (int64_t y = 0; y < f.h; ++y)
    for (int64_t x = 0; x < f.w; ++x) f.at(fi, y, x) = 0.08f;
  const double cx = 56, cy = 54, rx = 34, ry = 42;
  for (int64_t y = 0; y < f.h; ++y)
    for (int64_t x = 0; x < f.w; ++x) {
      const double dx = (double(x) - cx) / rx, dy = (double(y) - cy) / ry;
      if (dx * dx + dy * dy <= 1.0) f.at(fi, y, x) = 0.55f;
    }
  fill_circle(f, fi, 40, 42, 5, 0.15f);
  fill_circle(f, fi, 72, 42, 5, 0.15f);
  const int64_t h = std::max<int64_t>(2, std::llround(2.0 + 22.0 * mouth_openness));
  const int64_t y0 = 80 - h / 2;
  for (int64_t y = y0; y < y0 + h; ++y)
    for (int64_t x = 42; x <= 70; ++x)
      if (y >= 0 && y < f.h) f.at(fi, y, x) = 0.10f;
}

}  // namespace

ClipRecord gen_clip(uint64_t seed, const ClipSpec& spec) {
  check(spec.duration_s >= 1.0 && spec.duration_s <= 4.0, ErrorKind::kConfig,
        "gen_clip: duration must be in [1,4] s");
  check(spec.snr_db == 0.0 || spec.snr_db == 5.0 || spec.snr_db == 10.0,
        ErrorKind::kConfig, "gen_clip: snr must be one of {0,5,10} dB");
  const int64_t n = int64_t(std::llround(spec.duration_s * kSampleRate));
  const int64_t tv = int64_t(std::llround(spec.duration_s * kVideoFps));
  check(n == tv * kSamplesPerFrame, ErrorKind::kConfig,
        "gen_clip: duration must align audio and video grids");

  Rng rng(seed);
  ClipRecord rec;
  rec.kind = spec.kind;
  rec.snr_db = spec.snr_db;
  rec.duration_s = spec.duration_s;

  std::vector<float> env;
  if (spec.kind == SpeakerKind::kSpeaking) {
    env = make_envelope(rng, n);
    rec.clean_target.samples = harmonic_stack(rng, env);
  } else {
    env.assign(size_t(n), 0.0f);
    rec.clean_target.samples.assign(size_t(n), 0.0f);
  }

  auto noise = filtered_noise(rng, n);
  if (spec.kind == SpeakerKind::kSpeaking) {
    Waveform nz;
    nz.samples = noise;
    auto mixed = mix_at_snr(rec.clean_target, nz, spec.snr_db);
    rec.mixture = std::move(mixed.mixture);
    rec.noise = std::move(mixed.scaled_noise);
  } else {
    rec.noise.samples = noise;
    rec.mixture.samples = noise;
  }

  // per-frame envelope means, labels, mouth motion
  rec.frame_envelope.resize(size_t(tv));
  rec.asd_labels.resize(size_t(tv));
  for (int64_t i = 0; i < tv; ++i) {
    double acc = 0;
    for (int64_t t = i * kSamplesPerFrame; t < (i + 1) * kSamplesPerFrame; ++t)
      acc += double(env[size_t(t)]);
    const double mean_env = acc / kSamplesPerFrame;
    rec.frame_envelope[size_t(i)] = float(mean_env);
    rec.asd_labels[size_t(i)] =
        (spec.kind == SpeakerKind::kSpeaking && mean_env > kActivityThreshold)
            ? 1
            : 0;
  }

  const double chew_freq = rng.uniform(1.5, 3.0);
  const double chew_phase = rng.uniform(0.0, 2.0 * M_PI);
  rec.faces.t = tv;
  rec.faces.h = kFaceSize;
  rec.faces.w = kFaceSize;
  rec.faces.c = 1;
  rec.faces.data.assign(size_t(tv * kFaceSize * kFaceSize), 0.0f);
  for (int64_t i = 0; i < tv; ++i) {
    double m = 0.35;
    if (spec.kind == SpeakerKind::kSpeaking)
      m = double(rec.frame_envelope[size_t(i)]);
    else if (spec.kind == SpeakerKind::kSilentChewing)
      m = 0.5 + 0.5 * std::sin(2.0 * M_PI * chew_freq * double(i) / kVideoFps +
                               chew_phase);
    render_face(rec.faces, i, m);
  }
  return rec;
}

void CorpusConfig::validate() const {
  check(train_count >= 0 && val_count >= 0 && test_count >= 0,
        ErrorKind::kConfig, "corpus config: negative counts");
  check(std::abs(ratio_speaking + ratio_chewing + ratio_static - 1.0) < 1e-9,
        ErrorKind::kConfig, "corpus config: kind ratios must sum to 1");
  check(!snr_list.empty(), ErrorKind::kConfig, "corpus config: empty snr list");
  for (double s : snr_list)
    check(s == 0.0 || s == 5.0 || s == 10.0, ErrorKind::kConfig,
          "corpus config: snr must be one of {0,5,10}");
  check(duration_min_s >= 1 && duration_max_s <= 4 &&
            duration_min_s <= duration_max_s,
        ErrorKind::kConfig, "corpus config: duration range must be in [1,4] s");
}

CorpusConfig load_corpus_config(const std::string& path) {
  auto kv = read_kv_file(path);
  CorpusConfig c;
  c.train_count = int(kv_int(kv, "train_count", c.train_count));
  c.val_count = int(kv_int(kv, "val_count", c.val_count));
  c.test_count = int(kv_int(kv, "test_count", c.test_count));
  c.ratio_speaking = kv_double(kv, "ratio_speaking", c.ratio_speaking);
  c.ratio_chewing = kv_double(kv, "ratio_chewing", c.ratio_chewing);
  c.ratio_static = kv_double(kv, "ratio_static", c.ratio_static);
  c.master_seed = uint64_t(kv_int(kv, "master_seed", int64_t(c.master_seed)));
  if (kv.count("snr_list")) {
    c.snr_list.clear();
    for (const auto& tok : split(kv.at("snr_list"), ','))
      if (!tok.empty()) c.snr_list.push_back(std::stod(tok));
  }
  c.duration_min_s = int(kv_int(kv, "duration_min_s", c.duration_min_s));
  c.duration_max_s = int(kv_int(kv, "duration_max_s", c.duration_max_s));
  c.validate();
  return c;
}

std::vector<ManifestRecord> CorpusManifest::split(const std::string& name) const {
  std::vector<ManifestRecord> out;
  for (const auto& r : records)
    if (r.split == name) out.push_back(r);
  return out;
}

namespace {

// Kind counts per split. speaking/chewing round to nearest, static absorbs
// the remainder.
void kind_counts(int n, const CorpusConfig& cfg, int& n_speak, int& n_chew,
                 int& n_static) {
  n_speak = int(std::lround(n * cfg.ratio_speaking));
  n_chew = int(std::lround(n * cfg.ratio_chewing));
  n_static = n - n_speak - n_chew;
  check(n_static >= 0, ErrorKind::kConfig,
        "corpus config: kind ratios round above the split size");
}

}  // namespace

CorpusManifest gen_corpus(const CorpusConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  check(!ec, ErrorKind::kIo, "gen_corpus: cannot create " + out_dir);

  CorpusManifest manifest;
  manifest.generator_seed = cfg.master_seed;
  manifest.root_dir = out_dir;

  const std::string splits[3] = {"train", "val", "test"};
  const int counts[3] = {cfg.train_count, cfg.val_count, cfg.test_count};
  int64_t global_idx = 0;

  std::ofstream mf(out_dir + "/manifest.jsonl");
  check(mf.good(), ErrorKind::kIo, "gen_corpus: cannot write manifest");
  mf << json{{"type", "meta"}, {"generator_seed", cfg.master_seed}}.dump()
     << "\n";

  for (int si = 0; si < 3; ++si) {
    int n_speak = 0, n_chew = 0, n_static = 0;
    kind_counts(counts[si], cfg, n_speak, n_chew, n_static);
    for (int i = 0; i < counts[si]; ++i, ++global_idx) {
      ClipSpec spec;
      spec.kind = i < n_speak ? SpeakerKind::kSpeaking
                  : i < n_speak + n_chew ? SpeakerKind::kSilentChewing
                                         : SpeakerKind::kSilentStatic;
      spec.snr_db = cfg.snr_list[size_t(i) % cfg.snr_list.size()];
      const uint64_t seed = Rng::hash_combine(cfg.master_seed,
                                              uint64_t(global_idx));
      if (cfg.duration_min_s == cfg.duration_max_s) {
        spec.duration_s = cfg.duration_min_s;
      } else {
        Rng drng(Rng::hash_combine(seed, 0x44));
        spec.duration_s = double(
            cfg.duration_min_s +
            drng.uniform_int(cfg.duration_max_s - cfg.duration_min_s + 1));
      }
      auto rec = gen_clip(seed, spec);

      char idbuf[64];
      std::snprintf(idbuf, sizeof(idbuf), "%s_%04d", splits[si].c_str(), i);
      rec.clip_id = idbuf;

      ManifestRecord mr;
      mr.clip_id = rec.clip_id;
      mr.split = splits[si];
      mr.kind = spec.kind;
      mr.snr_db = spec.snr_db;
      mr.duration_s = spec.duration_s;
      mr.mixture_path = rec.clip_id + "_mix.wav";
      mr.clean_path = rec.clip_id + "_clean.wav";
      mr.noise_path = rec.clip_id + "_noise.wav";
      mr.faces_path = rec.clip_id + "_faces.bin";
      mr.labels_path = rec.clip_id + "_labels.txt";

      save_wav(out_dir + "/" + mr.mixture_path, rec.mixture);
      save_wav(out_dir + "/" + mr.clean_path, rec.clean_target);
      save_wav(out_dir + "/" + mr.noise_path, rec.noise);
      save_frames(out_dir + "/" + mr.faces_path, rec.faces);
      save_labels(out_dir + "/" + mr.labels_path, rec.asd_labels);

      mf << json{{"clip_id", mr.clip_id},
                 {"mixture_path", mr.mixture_path},
                 {"clean_path", mr.clean_path},
                 {"noise_path", mr.noise_path},
                 {"faces_path", mr.faces_path},
                 {"labels_path", mr.labels_path},
                 {"kind", speaker_kind_name(mr.kind)},
                 {"snr_db", mr.snr_db},
                 {"duration_s", mr.duration_s},
                 {"split", mr.split}}
                .dump()
         << "\n";
      manifest.records.push_back(std::move(mr));
    }
  }
  mf.close();
  check(mf.good(), ErrorKind::kIo, "gen_corpus: manifest write failed");
  return manifest;
}

CorpusManifest load_manifest(const std::string& manifest_path) {
  std::ifstream f(manifest_path);
  check(f.good(), ErrorKind::kIo, "load_manifest: cannot open " + manifest_path);
  CorpusManifest m;
  m.root_dir = fs::path(manifest_path).parent_path().string();
  if (m.root_dir.empty()) m.root_dir = ".";
  std::string line;
  std::set<std::string> ids;
  while (std::getline(f, line)) {
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw Error(ErrorKind::kFormat,
                  std::string("load_manifest: bad json line: ") + e.what());
    }
    if (j.value("type", "") == "meta") {
      m.generator_seed = j.value("generator_seed", uint64_t(0));
      continue;
    }
    ManifestRecord r;
    r.clip_id = j.at("clip_id").get<std::string>();
    r.mixture_path = j.at("mixture_path").get<std::string>();
    r.clean_path = j.at("clean_path").get<std::string>();
    r.noise_path = j.value("noise_path", "");
    r.faces_path = j.at("faces_path").get<std::string>();
    r.labels_path = j.at("labels_path").get<std::string>();
    r.kind = speaker_kind_from_name(j.at("kind").get<std::string>());
    r.snr_db = j.at("snr_db").get<double>();
    r.duration_s = j.at("duration_s").get<double>();
    r.split = j.value("split", "train");
    check(ids.insert(r.clip_id).second, ErrorKind::kFormat,
          "load_manifest: duplicate clip id " + r.clip_id);
    for (const std::string& p :
         {r.mixture_path, r.clean_path, r.faces_path, r.labels_path})
      check(fs::exists(fs::path(m.root_dir) / p), ErrorKind::kIo,
            "load_manifest: missing file " + p);
    m.records.push_back(std::move(r));
  }
  return m;
}

ClipRecord load_clip(const CorpusManifest& m, const ManifestRecord& rec) {
  ClipRecord out;
  const fs::path root(m.root_dir);
  out.mixture = load_wav((root / rec.mixture_path).string());
  out.clean_target = load_wav((root / rec.clean_path).string());
  if (!rec.noise_path.empty())
    out.noise = load_wav((root / rec.noise_path).string());
  out.faces = load_frames((root / rec.faces_path).string());
  out.asd_labels = load_labels((root / rec.labels_path).string());
  out.kind = rec.kind;
  out.clip_id = rec.clip_id;
  out.snr_db = rec.snr_db;
  out.duration_s = rec.duration_s;
  check(out.mixture.size() == out.clean_target.size(), ErrorKind::kLength,
        "load_clip: mixture/clean length mismatch");
  check(int64_t(out.asd_labels.size()) == out.faces.t, ErrorKind::kLength,
        "load_clip: label/frame count mismatch");
  if (out.kind != SpeakerKind::kSpeaking) {
    for (int l : out.asd_labels)
      check(l == 0, ErrorKind::kFormat,
            "load_clip: silent clip with a positive label: " + rec.clip_id);
    for (float v : out.clean_target.samples)
      check(v == 0.0f, ErrorKind::kFormat,
            "load_clip: silent clip with a non-zero clean target: " +
                rec.clip_id);
  }
  return out;
}

void save_frames(const std::string& bin_path, const FrameTensor& frames) {
  std::ofstream f(bin_path, std::ios::binary);
  check(f.good(), ErrorKind::kIo, "save_frames: cannot open " + bin_path);
  f.write(reinterpret_cast<const char*>(frames.data.data()),
          std::streamsize(frames.data.size() * sizeof(float)));
  check(f.good(), ErrorKind::kIo, "save_frames: write failed");
  std::ofstream hdr(bin_path + ".txt");
  check(hdr.good(), ErrorKind::kIo, "save_frames: cannot open sidecar");
  hdr << frames.t << " " << frames.h << " " << frames.w << " " << frames.c
      << "\n";
}

FrameTensor load_frames(const std::string& bin_path) {
  std::ifstream hdr(bin_path + ".txt");
  check(hdr.good(), ErrorKind::kIo, "load_frames: missing sidecar for " + bin_path);
  FrameTensor out;
  hdr >> out.t >> out.h >> out.w >> out.c;
  check(hdr.good() && out.t > 0 && out.h > 0 && out.w > 0 && out.c == 1,
        ErrorKind::kFormat, "load_frames: bad sidecar header");
  std::ifstream f(bin_path, std::ios::binary);
  check(f.good(), ErrorKind::kIo, "load_frames: cannot open " + bin_path);
  out.data.resize(size_t(out.t * out.h * out.w * out.c));
  f.read(reinterpret_cast<char*>(out.data.data()),
         std::streamsize(out.data.size() * sizeof(float)));
  check(f.gcount() == std::streamsize(out.data.size() * sizeof(float)),
        ErrorKind::kFormat, "load_frames: truncated tensor file");
  return out;
}

void save_labels(const std::string& path, const std::vector<int>& labels) {
  std::ofstream f(path);
  check(f.good(), ErrorKind::kIo, "save_labels: cannot open " + path);
  for (int l : labels) f << l << "\n";
}

std::vector<int> load_labels(const std::string& path) {
  std::ifstream f(path);
  check(f.good(), ErrorKind::kIo, "load_labels: cannot open " + path);
  std::vector<int> out;
  std::string line;
  while (std::getline(f, line)) {
    line = trim(line);
    if (line.empty()) continue;
    check(line == "0" || line == "1", ErrorKind::kFormat,
          "load_labels: labels must be 0/1");
    out.push_back(line == "1" ? 1 : 0);
  }
  check(!out.empty(), ErrorKind::kLength, "load_labels: empty label file");
  return out;
}

}  // namespace adenet
