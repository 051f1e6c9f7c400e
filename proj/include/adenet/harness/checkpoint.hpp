#ifndef ADENET_HARNESS_CHECKPOINT_HPP
#define ADENET_HARNESS_CHECKPOINT_HPP

#include <fstream>

#include "adenet/harness/adam.hpp"
#include "adenet/harness/config.hpp"

namespace adenet {

struct EpochStats {
  int epoch = 0;
  double lr = 0;
  double loss_total = 0, loss_se = 0, loss_asd = 0;
  double val_auc = 0, val_map = 0, val_f1 = 0, val_si_sdri = 0;
  bool has_val = false;
};

namespace ckpt_detail {

inline void wr_u32(std::ostream& os, uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}
inline void wr_i64(std::ostream& os, int64_t v) {
  os.write(reinterpret_cast<const char*>(&v), 8);
}
inline void wr_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), 8);
}
inline void wr_str(std::ostream& os, const std::string& s) {
  wr_u32(os, uint32_t(s.size()));
  os.write(s.data(), std::streamsize(s.size()));
}
inline uint32_t rd_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
inline int64_t rd_i64(std::istream& is) {
  int64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
inline double rd_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
inline std::string rd_str(std::istream& is) {
  const uint32_t n = rd_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), std::streamsize(n));
  return s;
}

template <class S>
void wr_tensor(std::ostream& os, const Tensor<S>& t) {
  wr_u32(os, uint32_t(t.shape.size()));
  for (auto d : t.shape) wr_i64(os, d);
  os.write(reinterpret_cast<const char*>(t.data.data()),
           std::streamsize(t.data.size() * sizeof(S)));
}

template <class S>
Tensor<S> rd_tensor(std::istream& is) {
  const uint32_t rank = rd_u32(is);
  Shape sh(rank);
  for (auto& d : sh) d = rd_i64(is);
  Tensor<S> t(sh);
  is.read(reinterpret_cast<char*>(t.data.data()),
          std::streamsize(t.data.size() * sizeof(S)));
  return t;
}

}  // namespace ckpt_detail

constexpr char kCkptMagic[] = "ADENETCK1";

// Named parameters + buffers + optimizer state + config snapshot + history.
// Tensor bytes are stored verbatim, so reload reproduces forward outputs
// bit-for-bit.
template <class S>
void save_checkpoint(const std::string& path, const AdenetModel<S>& model,
                     const RunConfig& cfg, const Adam<S>* adam, int64_t epoch,
                     int64_t step, const std::vector<EpochStats>& history) {
  using namespace ckpt_detail;
  std::ofstream f(path, std::ios::binary);
  check(f.good(), ErrorKind::kIo, "save_checkpoint: cannot open " + path);
  f.write(kCkptMagic, 9);
  wr_u32(f, uint32_t(sizeof(S)));
  wr_str(f, serialize_run_config(cfg));
  wr_i64(f, epoch);
  wr_i64(f, step);
  const auto& params = model.params().params();
  wr_u32(f, uint32_t(params.size()));
  for (const auto& [name, v] : params) {
    wr_str(f, name);
    wr_tensor(f, v->value);
  }
  const auto& buffers = model.params().buffers();
  wr_u32(f, uint32_t(buffers.size()));
  for (const auto& [name, t] : buffers) {
    wr_str(f, name);
    wr_tensor(f, *t);
  }
  f.put(adam ? 1 : 0);
  if (adam) {
    auto* mut = const_cast<Adam<S>*>(adam);
    wr_i64(f, adam->steps());
    for (const auto& t : mut->moment1()) wr_tensor(f, t);
    for (const auto& t : mut->moment2()) wr_tensor(f, t);
  }
  wr_u32(f, uint32_t(history.size()));
  for (const auto& h : history) {
    wr_i64(f, h.epoch);
    wr_f64(f, h.lr);
    wr_f64(f, h.loss_total);
    wr_f64(f, h.loss_se);
    wr_f64(f, h.loss_asd);
    wr_f64(f, h.val_auc);
    wr_f64(f, h.val_map);
    wr_f64(f, h.val_f1);
    wr_f64(f, h.val_si_sdri);
    f.put(h.has_val ? 1 : 0);
  }
  check(f.good(), ErrorKind::kIo, "save_checkpoint: write failed");
}

template <class S>
struct LoadedCheckpoint {
  RunConfig config;
  std::unique_ptr<AdenetModel<S>> model;
  std::unique_ptr<Adam<S>> adam;  // null if not stored
  int64_t epoch = 0;
  int64_t step = 0;
  std::vector<EpochStats> history;
};

template <class S>
LoadedCheckpoint<S> load_checkpoint(const std::string& path) {
  using namespace ckpt_detail;
  std::ifstream f(path, std::ios::binary);
  check(f.good(), ErrorKind::kIo, "load_checkpoint: cannot open " + path);
  char magic[9];
  f.read(magic, 9);
  check(f.good() && std::string(magic, 9) == kCkptMagic, ErrorKind::kFormat,
        "load_checkpoint: bad magic");
  check(rd_u32(f) == sizeof(S), ErrorKind::kFormat,
        "load_checkpoint: scalar width mismatch");
  LoadedCheckpoint<S> out;
  out.config = run_config_from_text(rd_str(f));
  out.epoch = rd_i64(f);
  out.step = rd_i64(f);
  out.model = std::make_unique<AdenetModel<S>>(out.config.model,
                                               out.config.optim.seed);
  const uint32_t np = rd_u32(f);
  auto& params = out.model->params().params();
  check(np == params.size(), ErrorKind::kFormat,
        "load_checkpoint: parameter count mismatch");
  for (uint32_t i = 0; i < np; ++i) {
    const std::string name = rd_str(f);
    check(name == params[i].first, ErrorKind::kFormat,
          "load_checkpoint: parameter order mismatch at " + name);
    auto t = rd_tensor<S>(f);
    check(t.shape == params[i].second->value.shape, ErrorKind::kFormat,
          "load_checkpoint: shape mismatch at " + name);
    params[i].second->value = std::move(t);
  }
  const uint32_t nb = rd_u32(f);
  auto& buffers = out.model->params().buffers();
  check(nb == buffers.size(), ErrorKind::kFormat,
        "load_checkpoint: buffer count mismatch");
  for (uint32_t i = 0; i < nb; ++i) {
    const std::string name = rd_str(f);
    check(name == buffers[i].first, ErrorKind::kFormat,
          "load_checkpoint: buffer order mismatch at " + name);
    *buffers[i].second = rd_tensor<S>(f);
  }
  if (f.get() == 1) {
    out.adam = std::make_unique<Adam<S>>(out.model->params(),
                                         out.config.optim.weight_decay,
                                         out.config.optim.grad_clip);
    out.adam->set_steps(rd_i64(f));
    for (auto& t : out.adam->moment1()) t = rd_tensor<S>(f);
    for (auto& t : out.adam->moment2()) t = rd_tensor<S>(f);
  }
  const uint32_t nh = rd_u32(f);
  for (uint32_t i = 0; i < nh; ++i) {
    EpochStats h;
    h.epoch = int(rd_i64(f));
    h.lr = rd_f64(f);
    h.loss_total = rd_f64(f);
    h.loss_se = rd_f64(f);
    h.loss_asd = rd_f64(f);
    h.val_auc = rd_f64(f);
    h.val_map = rd_f64(f);
    h.val_f1 = rd_f64(f);
    h.val_si_sdri = rd_f64(f);
    h.has_val = f.get() == 1;
    out.history.push_back(h);
  }
  check(f.good(), ErrorKind::kFormat, "load_checkpoint: truncated file");
  return out;
}

}  // namespace adenet

#endif  // ADENET_HARNESS_CHECKPOINT_HPP
