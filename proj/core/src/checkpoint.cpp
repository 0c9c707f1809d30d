#include "pedp/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "pedp/digest.hpp"
#include "pedp/errors.hpp"

namespace pedp {

using json = nlohmann::ordered_json;

namespace {
constexpr char kMagic[8] = {'P', 'E', 'D', 'P', 'C', 'K', 'P', '1'};
}

std::string kind_name(CheckpointKind kind) {
  switch (kind) {
    case CheckpointKind::pedp:
      return "pedp";
    case CheckpointKind::multiclass:
      return "multiclass";
    case CheckpointKind::multidense:
      return "multidense";
    case CheckpointKind::seq:
      return "seq";
  }
  return "pedp";
}

CheckpointKind kind_from_name(const std::string& name) {
  if (name == "pedp") return CheckpointKind::pedp;
  if (name == "multiclass") return CheckpointKind::multiclass;
  if (name == "multidense") return CheckpointKind::multidense;
  if (name == "seq") return CheckpointKind::seq;
  throw ValidationError("unknown checkpoint kind \"" + name + "\"");
}

Checkpoint Checkpoint::from_params(CheckpointKind kind, json config, std::string vocab_digest,
                                   std::string config_digest,
                                   const std::vector<const ad::Param*>& params) {
  Checkpoint ckpt;
  ckpt.kind = kind;
  ckpt.config = std::move(config);
  ckpt.vocab_digest = std::move(vocab_digest);
  ckpt.config_digest = std::move(config_digest);
  for (const ad::Param* p : params) {
    ckpt.arrays.emplace_back(p->name, p->value);
  }
  return ckpt;
}

void Checkpoint::restore_into(const std::vector<ad::Param*>& params) const {
  for (ad::Param* p : params) {
    const ad::Mat* found = nullptr;
    for (const auto& [name, mat] : arrays) {
      if (name == p->name) {
        found = &mat;
        break;
      }
    }
    if (found == nullptr) {
      throw ValidationError("checkpoint missing array \"" + p->name + "\"");
    }
    if (found->rows() != p->value.rows() || found->cols() != p->value.cols()) {
      throw ValidationError("checkpoint array \"" + p->name + "\" has shape " +
                            std::to_string(found->rows()) + "x" + std::to_string(found->cols()) +
                            ", expected " + std::to_string(p->value.rows()) + "x" +
                            std::to_string(p->value.cols()));
    }
    p->value = *found;
    p->zero_grad();
  }
}

void Checkpoint::save(const std::string& path) const {
  // Row-major float32 payload, concatenated in directory order.
  std::vector<char> payload;
  json dir = json::array();
  for (const auto& [name, mat] : arrays) {
    dir.push_back({{"name", name},
                   {"rows", static_cast<int>(mat.rows())},
                   {"cols", static_cast<int>(mat.cols())}});
    for (Eigen::Index r = 0; r < mat.rows(); ++r) {
      for (Eigen::Index c = 0; c < mat.cols(); ++c) {
        float v = static_cast<float>(mat(r, c));
        const char* bytes = reinterpret_cast<const char*>(&v);
        payload.insert(payload.end(), bytes, bytes + sizeof(float));
      }
    }
  }

  json header;
  header["format_version"] = 1;
  header["kind"] = kind_name(kind);
  header["config"] = config;
  header["vocab_digest"] = vocab_digest;
  header["config_digest"] = config_digest;
  header["arrays"] = dir;
  header["payload_fnv"] = to_hex(fnv1a(0xcbf29ce484222325ull, payload.data(), payload.size()));
  std::string header_bytes = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint \"" + path + "\"");
  out.write(kMagic, sizeof(kMagic));
  std::uint32_t len = static_cast<std::uint32_t>(header_bytes.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint \"" + path + "\"");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ValidationError("\"" + path + "\" is not a PEDP checkpoint (bad magic)");
  }
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string header_bytes(len, '\0');
  in.read(header_bytes.data(), len);
  if (!in) throw ValidationError("checkpoint \"" + path + "\" truncated header");
  json header;
  try {
    header = json::parse(header_bytes);
  } catch (const json::exception& e) {
    throw ValidationError("checkpoint \"" + path + "\" header: " + e.what());
  }
  if (header.at("format_version").get<int>() != 1) {
    throw ValidationError("checkpoint \"" + path + "\" has unsupported format version");
  }

  Checkpoint ckpt;
  ckpt.kind = kind_from_name(header.at("kind").get<std::string>());
  ckpt.config = header.at("config");
  ckpt.vocab_digest = header.at("vocab_digest").get<std::string>();
  ckpt.config_digest = header.value("config_digest", "");

  std::vector<char> payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string declared = header.at("payload_fnv").get<std::string>();
  std::string actual = to_hex(fnv1a(0xcbf29ce484222325ull, payload.data(), payload.size()));
  if (declared != actual) {
    throw ValidationError("checkpoint \"" + path + "\" payload checksum mismatch (" + declared +
                          " declared, " + actual + " computed)");
  }

  size_t off = 0;
  for (const auto& entry : header.at("arrays")) {
    int rows = entry.at("rows").get<int>();
    int cols = entry.at("cols").get<int>();
    size_t need = static_cast<size_t>(rows) * static_cast<size_t>(cols) * sizeof(float);
    if (off + need > payload.size()) {
      throw ValidationError("checkpoint \"" + path + "\" payload shorter than directory");
    }
    ad::Mat mat(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        float v;
        std::memcpy(&v, payload.data() + off, sizeof(float));
        off += sizeof(float);
        mat(r, c) = static_cast<double>(v);
      }
    }
    ckpt.arrays.emplace_back(entry.at("name").get<std::string>(), std::move(mat));
  }
  if (off != payload.size()) {
    throw ValidationError("checkpoint \"" + path + "\" has trailing payload bytes");
  }
  return ckpt;
}

json pedp_config_to_json(const PedpConfig& cfg) {
  json j;
  j["S"] = cfg.S;
  j["H"] = cfg.H;
  j["M"] = cfg.M;
  j["K"] = cfg.K;
  j["N_max"] = cfg.N_max;
  j["E"] = cfg.E;
  j["decoder_hidden"] = cfg.decoder_hidden;
  j["stop_hidden"] = cfg.stop_hidden;
  j["recover_hidden"] = cfg.recover_hidden;
  j["tau_d"] = cfg.gumbel.tau_d;
  j["tau_s"] = cfg.gumbel.tau_s;
  j["tau_out"] = cfg.gumbel.tau_out;
  j["hard"] = cfg.gumbel.hard;
  j["logit_domain_sampling"] = cfg.logit_domain_sampling;
  return j;
}

PedpConfig pedp_config_from_json(const nlohmann::json& j) {
  PedpConfig cfg;
  cfg.S = j.at("S").get<int>();
  cfg.H = j.at("H").get<int>();
  cfg.M = j.at("M").get<int>();
  cfg.K = j.at("K").get<int>();
  cfg.N_max = j.at("N_max").get<int>();
  cfg.E = j.at("E").get<int>();
  cfg.decoder_hidden = j.at("decoder_hidden").get<int>();
  cfg.stop_hidden = j.at("stop_hidden").get<int>();
  cfg.recover_hidden = j.at("recover_hidden").get<int>();
  cfg.gumbel.tau_d = j.at("tau_d").get<double>();
  cfg.gumbel.tau_s = j.at("tau_s").get<double>();
  cfg.gumbel.tau_out = j.at("tau_out").get<double>();
  cfg.gumbel.hard = j.at("hard").get<bool>();
  cfg.logit_domain_sampling = j.at("logit_domain_sampling").get<bool>();
  cfg.validate();
  return cfg;
}

json baseline_config_to_json(const BaselineConfig& cfg) {
  json j;
  j["kind"] = cfg.kind == BaselineKind::multiclass ? "multiclass"
              : cfg.kind == BaselineKind::seq      ? "seq"
                                                   : "multidense";
  j["S"] = cfg.S;
  j["M"] = cfg.M;
  j["H"] = cfg.H;
  j["E"] = cfg.E;
  j["decode_cap"] = cfg.decode_cap;
  j["beam_width"] = cfg.beam_width;
  j["tau_out"] = cfg.gumbel.tau_out;
  return j;
}

BaselineConfig baseline_config_from_json(const nlohmann::json& j) {
  BaselineConfig cfg;
  std::string kind = j.at("kind").get<std::string>();
  cfg.kind = kind == "multiclass" ? BaselineKind::multiclass
             : kind == "seq"      ? BaselineKind::seq
                                  : BaselineKind::multidense;
  cfg.S = j.at("S").get<int>();
  cfg.M = j.at("M").get<int>();
  cfg.H = j.at("H").get<int>();
  cfg.E = j.at("E").get<int>();
  cfg.decode_cap = j.at("decode_cap").get<int>();
  cfg.beam_width = j.at("beam_width").get<int>();
  cfg.gumbel.tau_out = j.at("tau_out").get<double>();
  cfg.validate();
  return cfg;
}

void save_pedp_model(const std::string& path, const PedpModel& model, CheckpointKind kind,
                     const std::string& vocab_digest, const std::string& config_digest) {
  Checkpoint ckpt = Checkpoint::from_params(kind, pedp_config_to_json(model.config()),
                                            vocab_digest, config_digest, model.params().all());
  ckpt.save(path);
}

PedpModel load_pedp_model(const std::string& path, const std::string& expected_vocab_digest,
                          CheckpointKind* kind_out) {
  Checkpoint ckpt = Checkpoint::load(path);
  if (ckpt.kind != CheckpointKind::pedp && ckpt.kind != CheckpointKind::multidense) {
    throw ValidationError("checkpoint \"" + path + "\" holds a " + kind_name(ckpt.kind) +
                          " model, not pedp/multidense");
  }
  if (!expected_vocab_digest.empty() && ckpt.vocab_digest != expected_vocab_digest) {
    throw ValidationError("checkpoint vocab digest " + ckpt.vocab_digest +
                          " does not match corpus/schema digest " + expected_vocab_digest);
  }
  if (kind_out != nullptr) *kind_out = ckpt.kind;
  PedpConfig cfg = pedp_config_from_json(ckpt.config);
  Rng dummy(0);
  PedpModel model = PedpModel::create(cfg, dummy);
  ckpt.restore_into(model.params().all());
  return model;
}

void save_multiclass(const std::string& path, DiaMultiClass& model,
                     const std::string& vocab_digest, const std::string& config_digest) {
  std::vector<const ad::Param*> params;
  for (ad::Param* p : model.all_params()) params.push_back(p);
  Checkpoint ckpt =
      Checkpoint::from_params(CheckpointKind::multiclass, baseline_config_to_json(model.config()),
                              vocab_digest, config_digest, params);
  ckpt.save(path);
}

DiaMultiClass load_multiclass(const std::string& path, const std::string& expected_vocab_digest) {
  Checkpoint ckpt = Checkpoint::load(path);
  if (ckpt.kind != CheckpointKind::multiclass) {
    throw ValidationError("checkpoint \"" + path + "\" is not a multiclass model");
  }
  if (!expected_vocab_digest.empty() && ckpt.vocab_digest != expected_vocab_digest) {
    throw ValidationError("checkpoint vocab digest " + ckpt.vocab_digest +
                          " does not match corpus/schema digest " + expected_vocab_digest);
  }
  BaselineConfig cfg = baseline_config_from_json(ckpt.config);
  Rng dummy(0);
  DiaMultiClass model = DiaMultiClass::create(cfg, dummy);
  ckpt.restore_into(model.all_params());
  return model;
}

void save_seq(const std::string& path, DiaSeq& model, const std::string& vocab_digest,
              const std::string& config_digest) {
  std::vector<const ad::Param*> params;
  for (ad::Param* p : model.all_params()) params.push_back(p);
  Checkpoint ckpt = Checkpoint::from_params(
      CheckpointKind::seq, baseline_config_to_json(model.config()), vocab_digest, config_digest,
      params);
  ckpt.save(path);
}

DiaSeq load_seq(const std::string& path, const std::string& expected_vocab_digest) {
  Checkpoint ckpt = Checkpoint::load(path);
  if (ckpt.kind != CheckpointKind::seq) {
    throw ValidationError("checkpoint \"" + path + "\" is not a seq model");
  }
  if (!expected_vocab_digest.empty() && ckpt.vocab_digest != expected_vocab_digest) {
    throw ValidationError("checkpoint vocab digest " + ckpt.vocab_digest +
                          " does not match corpus/schema digest " + expected_vocab_digest);
  }
  BaselineConfig cfg = baseline_config_from_json(ckpt.config);
  Rng dummy(0);
  DiaSeq model = DiaSeq::create(cfg, dummy);
  ckpt.restore_into(model.all_params());
  return model;
}

CheckpointKind peek_checkpoint_kind(const std::string& path) { return Checkpoint::load(path).kind; }

}  // namespace pedp
