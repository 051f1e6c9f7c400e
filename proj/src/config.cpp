#include "adenet/harness/config.hpp"

#include <cstdlib>
#include <sstream>

namespace adenet {

namespace {

std::array<int64_t, 4> parse4(const std::string& s, const std::string& key) {
  auto toks = split(s, ',');
  check(toks.size() == 4, ErrorKind::kConfig, "config " + key + ": need 4 values");
  std::array<int64_t, 4> out{};
  for (int i = 0; i < 4; ++i) out[size_t(i)] = std::stoll(toks[size_t(i)]);
  return out;
}

std::string join4(const std::array<int64_t, 4>& a) {
  std::ostringstream os;
  os << a[0] << "," << a[1] << "," << a[2] << "," << a[3];
  return os.str();
}

}  // namespace

RunConfig parse_run_config(const std::map<std::string, std::string>& kv) {
  RunConfig c;
  auto& m = c.model;
  m.enc.d = kv_int(kv, "model.d", m.enc.d);
  m.heads = kv_int(kv, "model.heads", m.heads);
  if (kv.count("model.se_blocks"))
    m.enc.se_stage_blocks = parse4(kv.at("model.se_blocks"), "model.se_blocks");
  if (kv.count("model.se_channels"))
    m.enc.se_stage_channels =
        parse4(kv.at("model.se_channels"), "model.se_channels");
  if (kv.count("model.v_channels"))
    m.enc.v_stage_channels = parse4(kv.at("model.v_channels"), "model.v_channels");
  m.enc.c_se = kv_int(kv, "model.c_se", m.enc.c_se);
  m.enc.kernel = kv_int(kv, "model.kernel", m.enc.kernel);
  m.enc.stride = kv_int(kv, "model.stride", m.enc.stride);
  m.enc.vtcn_depth = kv_int(kv, "model.vtcn_depth", m.enc.vtcn_depth);
  m.enc.scale = kv_double(kv, "model.scale", m.enc.scale);
  m.ctx.num_blocks = kv_int(kv, "model.context_blocks", m.ctx.num_blocks);
  m.ctx.c_se = m.enc.c_se;
  m.ctx.heads = m.heads;
  const std::string cv = kv_str(kv, "model.context_variant", "conformer");
  if (cv == "conformer")
    m.ctx.variant = ContextVariant::kConformer;
  else if (cv == "tcn")
    m.ctx.variant = ContextVariant::kTcn;
  else
    throw Error(ErrorKind::kConfig, "model.context_variant: " + cv);
  m.mln_position =
      mln_position_from_name(kv_str(kv, "model.mln_position", "final"));
  const std::string cma = kv_str(kv, "model.cma_variant", "as_printed");
  if (cma == "as_printed")
    m.cma_variant = CmaVariant::kAsPrinted;
  else if (cma == "conventional")
    m.cma_variant = CmaVariant::kConventional;
  else
    throw Error(ErrorKind::kConfig, "model.cma_variant: " + cma);
  const std::string ai = kv_str(kv, "model.audio_input", "mfcc");
  if (ai == "mfcc")
    m.audio_input = AudioInput::kMfcc;
  else if (ai == "raw")
    m.audio_input = AudioInput::kRaw;
  else
    throw Error(ErrorKind::kConfig, "model.audio_input: " + ai);
  m.no_cmc = kv_bool(kv, "model.no_cmc", m.no_cmc);
  m.fus.ablate_a_to_s = kv_bool(kv, "model.ablate_a_to_s", false);
  m.fus.ablate_s_to_a = kv_bool(kv, "model.ablate_s_to_a", false);
  m.fus.resample_scale = kv_int(kv, "model.resample_scale", 32);
  m.fus.d = m.enc.d;
  m.fus.c_se = m.enc.c_se;

  c.optim.lr = kv_double(kv, "optim.lr", c.optim.lr);
  c.optim.weight_decay = kv_double(kv, "optim.weight_decay", c.optim.weight_decay);
  c.optim.lr_decay = kv_double(kv, "optim.lr_decay", c.optim.lr_decay);
  c.optim.epochs = int(kv_int(kv, "optim.epochs", c.optim.epochs));
  c.optim.batch_size = int(kv_int(kv, "optim.batch_size", c.optim.batch_size));
  c.optim.seed = uint64_t(kv_int(kv, "optim.seed", int64_t(c.optim.seed)));
  c.optim.grad_clip = kv_double(kv, "optim.grad_clip", c.optim.grad_clip);
  c.optim.max_steps = kv_int(kv, "optim.max_steps", c.optim.max_steps);

  c.data.dir = kv_str(kv, "data.dir", "");
  const std::string sm = kv_str(kv, "data.snr_mode", "mixed");
  if (sm == "mixed")
    c.data.snr_mode = SnrMode::kMixed;
  else if (sm == "fixed")
    c.data.snr_mode = SnrMode::kFixed;
  else
    throw Error(ErrorKind::kConfig, "data.snr_mode: " + sm);

  c.loss.lambda1 = kv_double(kv, "loss.lambda1", c.loss.lambda1);
  c.loss.lambda2 = kv_double(kv, "loss.lambda2", c.loss.lambda2);

  const char* env_seed = std::getenv("ADENET_SEED");
  if (env_seed && *env_seed) c.optim.seed = uint64_t(std::stoull(env_seed));

  c.validate();
  return c;
}

RunConfig run_config_from_text(const std::string& text) {
  return parse_run_config(parse_kv_text(text));
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_kv_file(path));
}

std::string serialize_run_config(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  const auto& m = c.model;
  os << "model.d = " << m.enc.d << "\n";
  os << "model.heads = " << m.heads << "\n";
  os << "model.se_blocks = " << join4(m.enc.se_stage_blocks) << "\n";
  os << "model.se_channels = " << join4(m.enc.se_stage_channels) << "\n";
  os << "model.v_channels = " << join4(m.enc.v_stage_channels) << "\n";
  os << "model.c_se = " << m.enc.c_se << "\n";
  os << "model.kernel = " << m.enc.kernel << "\n";
  os << "model.stride = " << m.enc.stride << "\n";
  os << "model.vtcn_depth = " << m.enc.vtcn_depth << "\n";
  os << "model.scale = " << m.enc.scale << "\n";
  os << "model.context_blocks = " << m.ctx.num_blocks << "\n";
  os << "model.context_variant = "
     << (m.ctx.variant == ContextVariant::kConformer ? "conformer" : "tcn")
     << "\n";
  os << "model.mln_position = " << mln_position_name(m.mln_position) << "\n";
  os << "model.cma_variant = "
     << (m.cma_variant == CmaVariant::kAsPrinted ? "as_printed" : "conventional")
     << "\n";
  os << "model.audio_input = "
     << (m.audio_input == AudioInput::kMfcc ? "mfcc" : "raw") << "\n";
  os << "model.no_cmc = " << (m.no_cmc ? "true" : "false") << "\n";
  os << "model.ablate_a_to_s = " << (m.fus.ablate_a_to_s ? "true" : "false")
     << "\n";
  os << "model.ablate_s_to_a = " << (m.fus.ablate_s_to_a ? "true" : "false")
     << "\n";
  os << "model.resample_scale = " << m.fus.resample_scale << "\n";
  os << "optim.lr = " << c.optim.lr << "\n";
  os << "optim.weight_decay = " << c.optim.weight_decay << "\n";
  os << "optim.lr_decay = " << c.optim.lr_decay << "\n";
  os << "optim.epochs = " << c.optim.epochs << "\n";
  os << "optim.batch_size = " << c.optim.batch_size << "\n";
  os << "optim.seed = " << c.optim.seed << "\n";
  os << "optim.grad_clip = " << c.optim.grad_clip << "\n";
  os << "optim.max_steps = " << c.optim.max_steps << "\n";
  os << "data.dir = " << c.data.dir << "\n";
  os << "data.snr_mode = "
     << (c.data.snr_mode == SnrMode::kMixed ? "mixed" : "fixed") << "\n";
  os << "loss.lambda1 = " << c.loss.lambda1 << "\n";
  os << "loss.lambda2 = " << c.loss.lambda2 << "\n";
  return os.str();
}

int config_diff_count(const RunConfig& a, const RunConfig& b) {
  const auto ka = parse_kv_text(serialize_run_config(a));
  const auto kb = parse_kv_text(serialize_run_config(b));
  int diff = 0;
  for (const auto& [k, v] : ka) {
    auto it = kb.find(k);
    if (it == kb.end() || it->second != v) ++diff;
  }
  for (const auto& [k, v] : kb)
    if (!ka.count(k)) ++diff;
  return diff;
}

const char* ablation_axis_name(AblationAxis a) {
  switch (a) {
    case AblationAxis::kNoCmc: return "no_cmc";
    case AblationAxis::kNoMln: return "no_mln";
    case AblationAxis::kMlnPosition: return "mln_position";
    case AblationAxis::kAudioRaw: return "audio_raw";
    case AblationAxis::kNoAToS: return "no_a_to_s";
    case AblationAxis::kNoSToA: return "no_s_to_a";
    case AblationAxis::kTcn: return "tcn";
  }
  return "?";
}

AblationAxis ablation_axis_from_name(const std::string& s) {
  for (auto a : all_ablation_axes())
    if (s == ablation_axis_name(a)) return a;
  throw Error(ErrorKind::kConfig, "unknown ablation axis: " + s);
}

std::vector<AblationAxis> all_ablation_axes() {
  return {AblationAxis::kNoCmc,  AblationAxis::kNoMln, AblationAxis::kMlnPosition,
          AblationAxis::kAudioRaw, AblationAxis::kNoAToS, AblationAxis::kNoSToA,
          AblationAxis::kTcn};
}

RunConfig ablate(const RunConfig& base, AblationAxis axis, MlnPosition pos) {
  RunConfig out = base;
  switch (axis) {
    case AblationAxis::kNoCmc:
      out.model.no_cmc = true;
      break;
    case AblationAxis::kNoMln:
      out.model.mln_position = MlnPosition::kNone;
      break;
    case AblationAxis::kMlnPosition:
      check(pos != base.model.mln_position, ErrorKind::kConfig,
            "ablate: mln position unchanged");
      out.model.mln_position = pos;
      break;
    case AblationAxis::kAudioRaw:
      out.model.audio_input = AudioInput::kRaw;
      break;
    case AblationAxis::kNoAToS:
      out.model.fus.ablate_a_to_s = true;
      break;
    case AblationAxis::kNoSToA:
      out.model.fus.ablate_s_to_a = true;
      break;
    case AblationAxis::kTcn:
      out.model.ctx.variant = ContextVariant::kTcn;
      break;
  }
  return out;
}

}  // namespace adenet
