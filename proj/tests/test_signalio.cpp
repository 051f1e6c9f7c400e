#include <cmath>
#include <filesystem>
#include <fstream>

#include "testutil.hpp"

#include "adenet/signalio/corpus.hpp"

using namespace adenet;
using namespace adenet::testutil;
namespace fs = std::filesystem;

namespace {

std::string tmp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("adenet_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::vector<uint8_t> read_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// 100-800 Hz linear sweep: low enough that linear interpolation stays well
// above the 30 dB bar.
double sweep_phase(double t_sec) {
  const double f0 = 100.0, f1 = 800.0, dur = 1.0;
  return 2.0 * M_PI * (f0 * t_sec + (f1 - f0) * t_sec * t_sec / (2.0 * dur));
}

}  // namespace

TEST_CASE("wav round trip at 16 kHz") {
  const std::string dir = tmp_dir("wav");
  Waveform w;
  w.samples.resize(16000);
  Rng rng(5);
  for (auto& s : w.samples) s = float(rng.uniform(-0.9, 0.9));
  save_wav(dir + "/a.wav", w);
  auto r = load_wav(dir + "/a.wav");
  CHECK(r.sample_rate == 16000);
  CHECK(r.size() == 16000);
  for (size_t i = 0; i < 100; ++i)
    CHECK(std::abs(r.samples[i] - w.samples[i]) < 1.5 / 32768.0 + 1e-7);
}

TEST_CASE("full-scale sample maps to 32767/32768") {
  const std::string dir = tmp_dir("wavfs");
  // hand-written PCM16 file with constant 32767 samples
  std::ofstream f(dir + "/fs.wav", std::ios::binary);
  auto u32 = [&](uint32_t v) { f.write(reinterpret_cast<char*>(&v), 4); };
  auto u16 = [&](uint16_t v) { f.write(reinterpret_cast<char*>(&v), 2); };
  const uint32_t n = 1600;
  f.write("RIFF", 4);
  u32(36 + n * 2);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  u32(16);
  u16(1);
  u16(1);
  u32(16000);
  u32(32000);
  u16(2);
  u16(16);
  f.write("data", 4);
  u32(n * 2);
  for (uint32_t i = 0; i < n; ++i) u16(32767);
  f.close();
  auto r = load_wav(dir + "/fs.wav");
  CHECK(r.size() == 1600);
  CHECK(double(r.samples[10]) == doctest::Approx(32767.0 / 32768.0).epsilon(1e-9));
}

TEST_CASE("8 kHz file resamples to 16000 samples with >30 dB fidelity") {
  const std::string dir = tmp_dir("wav8k");
  Waveform w8;
  w8.sample_rate = 8000;
  w8.samples.resize(8000);
  for (int i = 0; i < 8000; ++i)
    w8.samples[size_t(i)] = float(0.8 * std::sin(sweep_phase(i / 8000.0)));
  save_wav(dir + "/s.wav", w8);
  auto r = load_wav(dir + "/s.wav");
  CHECK(r.size() == 16000);
  // independent oracle: evaluate the analytic sweep at the new sample times
  double sig = 0, err = 0;
  for (int i = 0; i < 16000; ++i) {
    const double ideal = 0.8 * std::sin(sweep_phase(i / 16000.0));
    sig += ideal * ideal;
    const double d = double(r.samples[size_t(i)]) - ideal;
    err += d * d;
  }
  const double snr = 10.0 * std::log10(sig / err);
  CHECK(snr > 30.0);
}

TEST_CASE("malformed and unsupported wav files") {
  const std::string dir = tmp_dir("wavbad");
  {
    std::ofstream f(dir + "/bad.wav", std::ios::binary);
    f << "NOTRIFFDATAATALL_PADDING_PADDING_PADDING_PADDING";
  }
  try {
    load_wav(dir + "/bad.wav");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kFormat);
  }
  {
    // valid container, IEEE-float codec
    std::ofstream f(dir + "/f32.wav", std::ios::binary);
    auto u32 = [&](uint32_t v) { f.write(reinterpret_cast<char*>(&v), 4); };
    auto u16 = [&](uint16_t v) { f.write(reinterpret_cast<char*>(&v), 2); };
    f.write("RIFF", 4);
    u32(36 + 8);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    u32(16);
    u16(3);  // IEEE float
    u16(1);
    u32(16000);
    u32(64000);
    u16(4);
    u16(32);
    f.write("data", 4);
    u32(8);
    u32(0);
    u32(0);
  }
  try {
    load_wav(dir + "/f32.wav");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUnsupported);
  }
}

TEST_CASE("mix_at_snr gains and invariant") {
  Waveform s, n;
  s.samples.resize(4000);
  n.samples.resize(4000);
  Rng rng(7);
  for (auto& v : s.samples) v = float(0.5 * rng.gauss());
  for (auto& v : n.samples) v = float(0.5 * rng.gauss());
  // normalize to exactly equal power
  const double ps = signal_power(s.samples), pn = signal_power(n.samples);
  for (auto& v : n.samples) v = float(double(v) * std::sqrt(ps / pn));

  auto r0 = mix_at_snr(s, n, 0.0);
  CHECK(r0.gain == doctest::Approx(1.0).epsilon(1e-6));
  auto r10 = mix_at_snr(s, n, 10.0);
  CHECK(r10.gain == doctest::Approx(std::pow(10.0, -0.5)).epsilon(1e-6));

  Waveform s4 = s;
  for (auto& v : s4.samples) v *= 2.0f;  // 4x power
  auto r4 = mix_at_snr(s4, n, 0.0);
  CHECK(r4.gain == doctest::Approx(2.0).epsilon(1e-6));

  for (double snr : {0.0, 5.0, 10.0}) {
    auto r = mix_at_snr(s, n, snr);
    const double measured = 10.0 * std::log10(signal_power(s.samples) /
                                              signal_power(r.scaled_noise.samples));
    CHECK(std::abs(measured - snr) < 1e-6);
    for (size_t i = 0; i < s.samples.size(); ++i)
      CHECK(r.mixture.samples[i] ==
            float(double(s.samples[i]) + double(r.scaled_noise.samples[i])));
  }

  Waveform zero;
  zero.samples.assign(4000, 0.0f);
  CHECK_THROWS_AS(mix_at_snr(zero, n, 0.0), Error);
  CHECK_THROWS_AS(mix_at_snr(s, zero, 0.0), Error);

  // property: the achieved SNR matches the request for random signal powers
  Rng prng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Waveform sp, np;
    sp.samples.resize(2000);
    np.samples.resize(2000);
    const double gs = prng.uniform(0.05, 1.0), gn = prng.uniform(0.05, 1.0);
    for (auto& v : sp.samples) v = float(gs * prng.gauss());
    for (auto& v : np.samples) v = float(gn * prng.gauss());
    const double snr = double(prng.uniform_int(3)) * 5.0;
    auto r = mix_at_snr(sp, np, snr);
    const double measured = 10.0 * std::log10(signal_power(sp.samples) /
                                              signal_power(r.scaled_noise.samples));
    CHECK(std::abs(measured - snr) < 1e-6);
  }
}

TEST_CASE("gen_clip determinism and contracts") {
  ClipSpec spec;
  spec.duration_s = 2.0;
  spec.kind = SpeakerKind::kSpeaking;
  spec.snr_db = 10.0;
  auto a = gen_clip(1234, spec);
  auto b = gen_clip(1234, spec);
  CHECK(a.mixture.samples == b.mixture.samples);
  CHECK(a.clean_target.samples == b.clean_target.samples);
  CHECK(a.faces.data == b.faces.data);
  CHECK(a.asd_labels == b.asd_labels);

  CHECK(a.faces.t == 50);
  CHECK(a.mixture.size() == 32000);
  CHECK(a.faces.h == 112);

  // labels imply clean-frame energy
  bool any_active = false;
  for (int64_t i = 0; i < a.faces.t; ++i) {
    if (a.asd_labels[size_t(i)] == 1) {
      any_active = true;
      double e = 0;
      for (int64_t t = i * kSamplesPerFrame; t < (i + 1) * kSamplesPerFrame; ++t)
        e += double(a.clean_target.samples[size_t(t)]) *
             double(a.clean_target.samples[size_t(t)]);
      CHECK(e > 0.0);
    }
  }
  CHECK(any_active);

  ClipSpec bad = spec;
  bad.duration_s = 0.5;
  CHECK_THROWS_AS(gen_clip(1, bad), Error);
}

TEST_CASE("silent chewing clips mislead visually but stay silent") {
  ClipSpec spec;
  spec.duration_s = 1.0;
  spec.kind = SpeakerKind::kSilentChewing;
  spec.snr_db = 5.0;
  auto c = gen_clip(99, spec);
  for (int l : c.asd_labels) CHECK(l == 0);
  for (float v : c.clean_target.samples) CHECK(v == 0.0f);
  // faces move
  bool differs = false;
  for (int64_t i = 1; i < c.faces.t && !differs; ++i)
    for (int64_t y = 0; y < 112 && !differs; ++y)
      for (int64_t x = 0; x < 112; ++x)
        if (c.faces.at(i, y, x) != c.faces.at(0, y, x)) {
          differs = true;
          break;
        }
  CHECK(differs);

  ClipSpec st = spec;
  st.kind = SpeakerKind::kSilentStatic;
  auto s = gen_clip(99, st);
  for (int64_t i = 1; i < s.faces.t; ++i)
    CHECK(std::equal(s.faces.data.begin(), s.faces.data.begin() + 112 * 112,
                     s.faces.data.begin() + i * 112 * 112));
}

TEST_CASE("mouth height tracks the speech envelope (corpus AV correspondence)") {
  ClipSpec spec;
  spec.duration_s = 4.0;
  spec.kind = SpeakerKind::kSpeaking;
  spec.snr_db = 10.0;
  auto c = gen_clip(2024, spec);
  // measure mouth height from the rendered pixels: mouth value is 0.10
  std::vector<double> heights, env;
  for (int64_t i = 0; i < c.faces.t; ++i) {
    int h = 0;
    for (int64_t y = 0; y < 112; ++y)
      if (std::abs(c.faces.at(i, y, 56) - 0.10f) < 1e-6) ++h;
    heights.push_back(double(h));
    env.push_back(double(c.frame_envelope[size_t(i)]));
  }
  CHECK(pearson(heights, env) >= 0.9);
}

TEST_CASE("different seeds give different mixtures") {
  ClipSpec spec;
  spec.duration_s = 1.0;
  spec.kind = SpeakerKind::kSpeaking;
  spec.snr_db = 10.0;
  std::vector<ClipRecord> clips;
  for (uint64_t s = 0; s < 12; ++s) clips.push_back(gen_clip(1000 + s, spec));
  int differing = 0, total = 0;
  for (size_t i = 0; i < clips.size(); ++i)
    for (size_t j = i + 1; j < clips.size(); ++j) {
      ++total;
      if (clips[i].mixture.samples != clips[j].mixture.samples) ++differing;
    }
  CHECK(double(differing) / double(total) >= 0.99);
}

TEST_CASE("gen_corpus writes a loadable, reproducible corpus") {
  CorpusConfig cfg;
  cfg.train_count = 8;
  cfg.val_count = 4;
  cfg.test_count = 4;
  cfg.master_seed = 77;
  cfg.duration_min_s = 1;
  cfg.duration_max_s = 1;
  const std::string d1 = tmp_dir("corpus1");
  const std::string d2 = tmp_dir("corpus2");
  auto m1 = gen_corpus(cfg, d1);
  auto m2 = gen_corpus(cfg, d2);
  CHECK(m1.records.size() == 16);

  // kind ratio rounding: 8 train clips -> 4/2/2
  int speak = 0, chew = 0, stat = 0;
  for (const auto& r : m1.split("train")) {
    if (r.kind == SpeakerKind::kSpeaking) ++speak;
    if (r.kind == SpeakerKind::kSilentChewing) ++chew;
    if (r.kind == SpeakerKind::kSilentStatic) ++stat;
  }
  CHECK(speak == 4);
  CHECK(chew == 2);
  CHECK(stat == 2);

  // same master seed -> identical manifest and file bytes
  CHECK(read_bytes(d1 + "/manifest.jsonl") == read_bytes(d2 + "/manifest.jsonl"));
  for (const auto& r : m1.records) {
    CHECK(read_bytes(d1 + "/" + r.mixture_path) ==
          read_bytes(d2 + "/" + r.mixture_path));
    CHECK(read_bytes(d1 + "/" + r.faces_path) ==
          read_bytes(d2 + "/" + r.faces_path));
  }

  auto loaded = load_manifest(d1 + "/manifest.jsonl");
  CHECK(loaded.records.size() == 16);
  CHECK(loaded.generator_seed == 77);
  auto clip = load_clip(loaded, loaded.records[0]);
  CHECK(clip.mixture.size() == 16000);
  CHECK(clip.faces.t == 25);
  CHECK(clip.asd_labels.size() == 25);

  // deleting a referenced file must fail validation
  fs::remove(d1 + "/" + m1.records[3].faces_path);
  CHECK_THROWS_AS(load_manifest(d1 + "/manifest.jsonl"), Error);
}

TEST_CASE("face tensor file round trip") {
  const std::string dir = tmp_dir("frames");
  FrameTensor ft;
  ft.t = 3;
  ft.h = 4;
  ft.w = 5;
  ft.c = 1;
  ft.data.resize(60);
  for (size_t i = 0; i < 60; ++i) ft.data[i] = float(i) * 0.25f;
  save_frames(dir + "/x.bin", ft);
  auto r = load_frames(dir + "/x.bin");
  CHECK(r.t == 3);
  CHECK(r.h == 4);
  CHECK(r.w == 5);
  CHECK(r.data == ft.data);
}
