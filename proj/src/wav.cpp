#include "adenet/signalio/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace adenet {

namespace {

uint32_t rd_u32(const uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}
uint16_t rd_u16(const uint8_t* p) { return uint16_t(p[0] | p[1] << 8); }

void wr_u32(std::ostream& os, uint32_t v) {
  const uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16),
                        uint8_t(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}
void wr_u16(std::ostream& os, uint16_t v) {
  const uint8_t b[2] = {uint8_t(v), uint8_t(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

std::vector<float> resample_linear(const std::vector<float>& in, int sr_in,
                                   int sr_out) {
  check(!in.empty() && sr_in > 0 && sr_out > 0, ErrorKind::kLength,
        "resample: empty input");
  if (sr_in == sr_out) return in;
  const int64_t n_in = int64_t(in.size());
  const int64_t n_out = int64_t(std::llround(double(n_in) * sr_out / sr_in));
  std::vector<float> out(size_t(std::max<int64_t>(n_out, 1)));
  const double ratio = double(sr_in) / double(sr_out);
  for (int64_t i = 0; i < int64_t(out.size()); ++i) {
    const double pos = double(i) * ratio;
    int64_t i0 = int64_t(pos);
    if (i0 >= n_in - 1) i0 = n_in - 1;
    const int64_t i1 = std::min(i0 + 1, n_in - 1);
    const double frac = pos - double(i0);
    out[size_t(i)] = float((1.0 - frac) * in[size_t(i0)] + frac * in[size_t(i1)]);
  }
  return out;
}

Waveform load_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  check(f.good(), ErrorKind::kIo, "load_wav: cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  check(bytes.size() >= 44, ErrorKind::kFormat, "load_wav: file too small");
  check(std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
            std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
        ErrorKind::kFormat, "load_wav: not a RIFF/WAVE file");

  int channels = 0, sample_rate = 0, bits = 0, format = 0;
  const uint8_t* data_ptr = nullptr;
  size_t data_len = 0;
  size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const uint8_t* hdr = bytes.data() + off;
    const uint32_t chunk_len = rd_u32(hdr + 4);
    const uint8_t* body = hdr + 8;
    check(off + 8 + chunk_len <= bytes.size(), ErrorKind::kFormat,
          "load_wav: truncated chunk");
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      check(chunk_len >= 16, ErrorKind::kFormat, "load_wav: short fmt chunk");
      format = rd_u16(body);
      channels = rd_u16(body + 2);
      sample_rate = int(rd_u32(body + 4));
      bits = rd_u16(body + 14);
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data_ptr = body;
      data_len = chunk_len;
    }
    off += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }
  check(channels > 0 && data_ptr != nullptr, ErrorKind::kFormat,
        "load_wav: missing fmt or data chunk");
  check(format == 1, ErrorKind::kUnsupported,
        "load_wav: only PCM (format 1) is supported");
  check(bits == 16, ErrorKind::kUnsupported, "load_wav: only 16-bit supported");
  check(channels == 1 || channels == 2, ErrorKind::kUnsupported,
        "load_wav: only mono/stereo supported");

  const size_t n_frames = data_len / (size_t(channels) * 2);
  check(n_frames > 0, ErrorKind::kLength, "load_wav: empty data chunk");
  std::vector<float> mono(n_frames);
  for (size_t i = 0; i < n_frames; ++i) {
    double acc = 0;
    for (int c = 0; c < channels; ++c) {
      const uint8_t* sp = data_ptr + (i * size_t(channels) + size_t(c)) * 2;
      const int16_t s = int16_t(uint16_t(sp[0] | sp[1] << 8));
      acc += double(s);
    }
    mono[i] = float(acc / channels / 32768.0);
  }
  Waveform out;
  out.samples = resample_linear(mono, sample_rate, kSampleRate);
  out.sample_rate = kSampleRate;
  return out;
}

void save_wav(const std::string& path, const Waveform& wave) {
  check(!wave.samples.empty(), ErrorKind::kLength, "save_wav: empty waveform");
  std::ofstream f(path, std::ios::binary);
  check(f.good(), ErrorKind::kIo, "save_wav: cannot open " + path);
  const uint32_t n = uint32_t(wave.samples.size());
  const uint32_t data_len = n * 2;
  f.write("RIFF", 4);
  wr_u32(f, 36 + data_len);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  wr_u32(f, 16);
  wr_u16(f, 1);  // PCM
  wr_u16(f, 1);  // mono
  wr_u32(f, uint32_t(wave.sample_rate));
  wr_u32(f, uint32_t(wave.sample_rate) * 2);
  wr_u16(f, 2);
  wr_u16(f, 16);
  f.write("data", 4);
  wr_u32(f, data_len);
  for (uint32_t i = 0; i < n; ++i) {
    double v = double(wave.samples[i]);
    v = std::max(-1.0, std::min(1.0, v));
    const int16_t s = int16_t(std::lrint(v * 32767.0));
    wr_u16(f, uint16_t(s));
  }
  check(f.good(), ErrorKind::kIo, "save_wav: write failed for " + path);
}

}  // namespace adenet
