#include "adenet/harness/plot.hpp"

#include <filesystem>
#include <fstream>

namespace adenet {

namespace {

struct StreamStats {
  std::vector<double> sum, sumsq;
  int64_t count = 0;

  void init(int64_t d) {
    sum.assign(size_t(d), 0.0);
    sumsq.assign(size_t(d), 0.0);
  }
  void add(const Tensor<float>& rows) {
    const int64_t t = rows.dim(0), d = rows.dim(1);
    for (int64_t i = 0; i < t; ++i)
      for (int64_t j = 0; j < d; ++j) {
        const double v = double(rows[i * d + j]);
        sum[size_t(j)] += v;
        sumsq[size_t(j)] += v * v;
      }
    count += t;
  }
  void dump(std::ostream& os, const std::string& stream,
            const std::string& phase) const {
    for (size_t j = 0; j < sum.size(); ++j) {
      const double m = sum[j] / double(count);
      const double var = sumsq[j] / double(count) - m * m;
      os << stream << " " << phase << " " << j << " " << m << " " << var
         << "\n";
    }
  }
};

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream f(dir + "/" + name);
  check(f.good(), ErrorKind::kIo, "plot: cannot write " + dir + "/" + name);
  f.precision(8);
  return f;
}

}  // namespace

void plot_embed_stats(AdenetModel<float>& model, const Dataset& ds,
                      const std::string& out_dir, uint64_t seed) {
  check(ds.size() > 0, ErrorKind::kLength, "plot: empty dataset");
  NoGradGuard ng;
  const int64_t d = model.config().enc.d;
  StreamStats a_pre, a_post, v_pre, v_post;
  a_pre.init(d);
  a_post.init(d);
  v_pre.init(d);
  v_post.init(d);

  // fixed random 2-D projection shared by both streams
  Rng rng(seed);
  std::vector<double> proj(size_t(2 * d));
  for (auto& x : proj) x = rng.gauss() / std::sqrt(double(d));

  auto scatter = open_out(out_dir, "projection.txt");
  for (size_t i = 0; i < ds.size(); ++i) {
    auto inputs = ds.make_inputs(i, false, 0);
    auto out = model.forward(inputs, false);
    a_pre.add(out.embed_a_pre->value);
    a_post.add(out.embed_a_post->value);
    v_pre.add(out.embed_v_pre->value);
    v_post.add(out.embed_v_post->value);
    auto emit = [&](const Tensor<float>& rows, const char* stream) {
      const int64_t t = rows.dim(0);
      for (int64_t ti = 0; ti < t; ++ti) {
        double x = 0, y = 0;
        for (int64_t j = 0; j < d; ++j) {
          x += proj[size_t(j)] * double(rows[ti * d + j]);
          y += proj[size_t(d + j)] * double(rows[ti * d + j]);
        }
        scatter << x << " " << y << " " << stream << "\n";
      }
    };
    emit(out.embed_a_post->value, "audio");
    emit(out.embed_v_post->value, "visual");
  }
  auto stats = open_out(out_dir, "embed_stats.txt");
  a_pre.dump(stats, "audio", "pre");
  a_post.dump(stats, "audio", "post");
  v_pre.dump(stats, "visual", "pre");
  v_post.dump(stats, "visual", "post");
}

void plot_scores(AdenetModel<float>& model, const Dataset& ds,
                 const std::string& out_dir) {
  for (size_t i = 0; i < ds.size(); ++i) {
    auto sc = score_clip(model, ds, i);
    auto f = open_out(out_dir, "scores_" + ds.clip(i).clip_id + ".txt");
    for (size_t t = 0; t < sc.scores.size(); ++t)
      f << t << " " << sc.scores[t] << " " << ds.labels(i)[t] << "\n";
  }
}

void plot_waveforms(AdenetModel<float>& model, const Dataset& ds,
                    const std::string& out_dir) {
  for (size_t i = 0; i < ds.size(); ++i) {
    auto sc = score_clip(model, ds, i);
    const auto& clip = ds.clip(i);
    auto f = open_out(out_dir, "waveforms_" + clip.clip_id + ".txt");
    for (size_t t = 0; t < sc.enhanced.size(); ++t)
      f << t << " " << clip.mixture.samples[t] << " "
        << clip.clean_target.samples[t] << " " << sc.enhanced[t] << "\n";
  }
}

}  // namespace adenet
