#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "pedp/autodiff.hpp"
#include "pedp/baselines.hpp"
#include "pedp/model.hpp"

namespace pedp {

enum class CheckpointKind { pedp, multiclass, multidense, seq };

std::string kind_name(CheckpointKind kind);
CheckpointKind kind_from_name(const std::string& name);

// Single-file archive: magic "PEDPCKP1", a JSON header (format version, kind
// tag, model config, vocabulary digest, run-config digest, array directory,
// payload checksum), then the row-major float32 payloads in directory order.
struct Checkpoint {
  CheckpointKind kind = CheckpointKind::pedp;
  nlohmann::ordered_json config;
  std::string vocab_digest;
  std::string config_digest;
  std::vector<std::pair<std::string, ad::Mat>> arrays;

  static Checkpoint from_params(CheckpointKind kind, nlohmann::ordered_json config,
                                std::string vocab_digest, std::string config_digest,
                                const std::vector<const ad::Param*>& params);
  // Restores by name; throws on missing arrays or shape drift.
  void restore_into(const std::vector<ad::Param*>& params) const;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

nlohmann::ordered_json pedp_config_to_json(const PedpConfig& cfg);
PedpConfig pedp_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json baseline_config_to_json(const BaselineConfig& cfg);
BaselineConfig baseline_config_from_json(const nlohmann::json& j);

// Model-level wrappers. Loaders verify the stored vocabulary digest against
// expected_vocab_digest when nonempty.
void save_pedp_model(const std::string& path, const PedpModel& model, CheckpointKind kind,
                     const std::string& vocab_digest, const std::string& config_digest);
PedpModel load_pedp_model(const std::string& path, const std::string& expected_vocab_digest = "",
                          CheckpointKind* kind_out = nullptr);

void save_multiclass(const std::string& path, DiaMultiClass& model,
                     const std::string& vocab_digest, const std::string& config_digest);
DiaMultiClass load_multiclass(const std::string& path,
                              const std::string& expected_vocab_digest = "");

void save_seq(const std::string& path, DiaSeq& model, const std::string& vocab_digest,
              const std::string& config_digest);
DiaSeq load_seq(const std::string& path, const std::string& expected_vocab_digest = "");

CheckpointKind peek_checkpoint_kind(const std::string& path);

}  // namespace pedp
