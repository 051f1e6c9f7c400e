// adenet CLI: corpus generation, training, evaluation, ablations and text
// renders for the joint active-speaker-detection / speech-enhancement model.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "adenet/harness/plot.hpp"
#include "adenet/harness/trainer.hpp"

using namespace adenet;

namespace {

CorpusManifest manifest_for(const std::string& data_dir) {
  return load_manifest(data_dir + "/manifest.jsonl");
}

// Single-clip dataset for detect/enhance.
std::pair<Dataset, ClipRecord> single_clip(const std::string& data_dir,
                                           const std::string& clip_id) {
  auto m = manifest_for(data_dir);
  for (const auto& rec : m.records) {
    if (rec.clip_id != clip_id) continue;
    CorpusManifest one;
    one.generator_seed = m.generator_seed;
    one.root_dir = m.root_dir;
    one.records.push_back(rec);
    Dataset ds(one, rec.split);
    auto clip = load_clip(one, rec);
    return {std::move(ds), std::move(clip)};
  }
  throw Error(ErrorKind::kConfig, "clip id not found: " + clip_id);
}

RunConfig config_with_data(const std::string& config_path,
                           const std::string& data_dir) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
  if (!data_dir.empty()) cfg.data.dir = data_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adenet: joint active speaker detection and speech enhancement"};
  app.require_subcommand(1);

  // gen-data
  std::string gd_config, gd_out;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic corpus");
  gen->add_option("--config", gd_config, "corpus config (key = value)");
  gen->add_option("--out", gd_out, "output directory")->required();

  // train
  std::string tr_config, tr_data, tr_out;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--config", tr_config, "run config file");
  train_cmd->add_option("--data", tr_data, "corpus directory");
  train_cmd->add_option("--out", tr_out, "checkpoint path")->required();

  // eval
  std::string ev_ckpt, ev_data, ev_report, ev_split = "test";
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("--ckpt", ev_ckpt)->required();
  eval_cmd->add_option("--data", ev_data, "corpus directory");
  eval_cmd->add_option("--report", ev_report, "report file (key-value text)");
  eval_cmd->add_option("--split", ev_split, "corpus split (default test)");

  // detect
  std::string dt_ckpt, dt_data, dt_clip, dt_out;
  auto* detect_cmd = app.add_subcommand("detect", "per-frame speaking scores");
  detect_cmd->add_option("--ckpt", dt_ckpt)->required();
  detect_cmd->add_option("--data", dt_data)->required();
  detect_cmd->add_option("--clip", dt_clip)->required();
  detect_cmd->add_option("--out", dt_out, "output file (default stdout)");

  // enhance
  std::string en_ckpt, en_data, en_clip, en_out;
  auto* enhance_cmd = app.add_subcommand("enhance", "write the enhanced WAV");
  enhance_cmd->add_option("--ckpt", en_ckpt)->required();
  enhance_cmd->add_option("--data", en_data)->required();
  enhance_cmd->add_option("--clip", en_clip)->required();
  enhance_cmd->add_option("--out", en_out)->required();

  // ablate
  std::string ab_axis, ab_config, ab_out, ab_pos = "final";
  auto* ablate_cmd =
      app.add_subcommand("ablate", "derive a single-flag ablation config");
  ablate_cmd->add_option("--axis", ab_axis,
                         "no_cmc|no_mln|mln_position|audio_raw|no_a_to_s|"
                         "no_s_to_a|tcn")
      ->required();
  ablate_cmd->add_option("--config", ab_config, "base run config");
  ablate_cmd->add_option("--mln-pos", ab_pos, "target position for mln_position");
  ablate_cmd->add_option("--out", ab_out, "output config file (default stdout)");

  // plot
  std::string pl_ckpt, pl_data, pl_kind, pl_out = "plots", pl_split = "test";
  uint64_t pl_seed = 7;
  auto* plot_cmd = app.add_subcommand("plot", "text renders of model internals");
  plot_cmd->add_option("--ckpt", pl_ckpt)->required();
  plot_cmd->add_option("--data", pl_data)->required();
  plot_cmd->add_option("--kind", pl_kind, "embed_stats|scores|waveforms")
      ->required();
  plot_cmd->add_option("--out", pl_out, "output directory");
  plot_cmd->add_option("--split", pl_split);
  plot_cmd->add_option("--seed", pl_seed, "projection seed");

  // features dump
  std::string fd_wav, fd_out;
  auto* features_cmd = app.add_subcommand("features", "feature debugging");
  auto* dump_cmd = features_cmd->add_subcommand("dump", "write MFCC as text");
  dump_cmd->add_option("--wav", fd_wav)->required();
  dump_cmd->add_option("--out", fd_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      CorpusConfig cfg =
          gd_config.empty() ? CorpusConfig{} : load_corpus_config(gd_config);
      auto m = gen_corpus(cfg, gd_out);
      std::cout << "wrote " << m.records.size() << " clips to " << gd_out
                << "\n";
    } else if (train_cmd->parsed()) {
      auto cfg = config_with_data(tr_config, tr_data);
      check(!cfg.data.dir.empty(), ErrorKind::kConfig,
            "train: no corpus directory (set --data or data.dir)");
      Trainer trainer(cfg);
      auto res = trainer.train(tr_out);
      for (const auto& h : res.history) {
        std::cout << "epoch " << h.epoch << " lr " << h.lr << " loss "
                  << h.loss_total << " (se " << h.loss_se << ", asd "
                  << h.loss_asd << ")";
        if (h.has_val)
          std::cout << " val_auc " << h.val_auc << " val_sisdri "
                    << h.val_si_sdri;
        std::cout << "\n";
      }
      std::cout << "best epoch " << res.best_epoch << "; checkpoint at "
                << res.checkpoint_path << "\n";
    } else if (eval_cmd->parsed()) {
      auto loaded = load_checkpoint<float>(ev_ckpt);
      const std::string dir =
          ev_data.empty() ? loaded.config.data.dir : ev_data;
      Dataset ds(manifest_for(dir), ev_split);
      auto rep = evaluate_model(*loaded.model, ds);
      std::cout << rep.to_table();
      if (!ev_report.empty()) {
        std::ofstream f(ev_report);
        check(f.good(), ErrorKind::kIo, "eval: cannot write " + ev_report);
        f << rep.to_kv_text();
      }
    } else if (detect_cmd->parsed()) {
      auto loaded = load_checkpoint<float>(dt_ckpt);
      auto [ds, clip] = single_clip(dt_data, dt_clip);
      auto sc = score_clip(*loaded.model, ds, 0);
      std::ostream* os = &std::cout;
      std::ofstream f;
      if (!dt_out.empty()) {
        f.open(dt_out);
        check(f.good(), ErrorKind::kIo, "detect: cannot write " + dt_out);
        os = &f;
      }
      for (size_t t = 0; t < sc.scores.size(); ++t)
        *os << t << " " << sc.scores[t] << "\n";
    } else if (enhance_cmd->parsed()) {
      auto loaded = load_checkpoint<float>(en_ckpt);
      auto [ds, clip] = single_clip(en_data, en_clip);
      auto sc = score_clip(*loaded.model, ds, 0);
      Waveform w;
      w.samples = sc.enhanced;
      save_wav(en_out, w);
      std::cout << "wrote " << en_out << "\n";
    } else if (ablate_cmd->parsed()) {
      RunConfig base =
          ab_config.empty() ? RunConfig{} : load_run_config(ab_config);
      auto axis = ablation_axis_from_name(ab_axis);
      auto derived = ablate(base, axis, mln_position_from_name(ab_pos));
      const std::string text = serialize_run_config(derived);
      if (ab_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream f(ab_out);
        check(f.good(), ErrorKind::kIo, "ablate: cannot write " + ab_out);
        f << text;
      }
    } else if (plot_cmd->parsed()) {
      auto loaded = load_checkpoint<float>(pl_ckpt);
      Dataset ds(manifest_for(pl_data), pl_split);
      if (pl_kind == "embed_stats")
        plot_embed_stats(*loaded.model, ds, pl_out, pl_seed);
      else if (pl_kind == "scores")
        plot_scores(*loaded.model, ds, pl_out);
      else if (pl_kind == "waveforms")
        plot_waveforms(*loaded.model, ds, pl_out);
      else
        throw Error(ErrorKind::kConfig, "plot: unknown kind " + pl_kind);
      std::cout << "wrote " << pl_kind << " to " << pl_out << "\n";
    } else if (dump_cmd->parsed()) {
      auto wave = load_wav(fd_wav);
      auto seq = mfcc(wave);
      std::ostream* os = &std::cout;
      std::ofstream f;
      if (!fd_out.empty()) {
        f.open(fd_out);
        check(f.good(), ErrorKind::kIo, "features dump: cannot write " + fd_out);
        os = &f;
      }
      os->precision(8);
      for (int64_t t = 0; t < seq.frames; ++t) {
        for (int c = 0; c < kMfccDim; ++c)
          *os << (c ? " " : "") << seq.at(t, c);
        *os << "\n";
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
