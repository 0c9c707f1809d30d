#pragma once

#include <cstdint>
#include <vector>

#include "pedp/corpus.hpp"
#include "pedp/model.hpp"
#include "pedp/training.hpp"

namespace pedp {

enum class BaselineKind { multiclass, multidense, seq };

enum class SeqDecodeMode { greedy, sample, beam };

struct BaselineConfig {
  BaselineKind kind = BaselineKind::multiclass;
  int S = 0;
  int M = 0;
  int H = 64;  // hidden width, kept equal to PEDP's H for comparability
  int E = 32;  // seq decoder token-embedding width
  int decode_cap = 10;
  int beam_width = 4;
  GumbelConfig gumbel;

  void validate() const;
};

// FFN with a sigmoid head over the full action space.
class DiaMultiClass {
public:
  static DiaMultiClass create(BaselineConfig cfg, Rng& rng);

  const BaselineConfig& config() const { return config_; }

  ad::Var probs(ad::Tape& tape, ad::Var state);
  Eigen::VectorXd probs(const Eigen::VectorXd& state);
  // threshold or Gumbel-Sigmoid sampling over the head's logits
  MacroAction predict(const Eigen::VectorXd& state, Rng& rng,
                      PredictMode mode = PredictMode::threshold);

  struct Params {
    ad::Param w1, b1, w2, b2;
  };
  Params& params() { return params_; }
  const Params& params() const { return params_; }
  std::vector<ad::Param*> all_params();

  struct Fit {
    Params best_params;
    int best_epoch = -1;
    double best_val_f1 = -1.0;
    std::vector<EpochRecord> log;
  };
  Fit fit(const Corpus& corpus, const FitSettings& settings);

private:
  DiaMultiClass(BaselineConfig cfg, Params params)
      : config_(std::move(cfg)), params_(std::move(params)) {}
  BaselineConfig config_;
  Params params_;
};

// The PEDP decoder with the terminal embedding replaced by h_0. The model is
// shared with pedp_core so the -planning ablation and this baseline are the
// same computation by construction.
class DiaMultiDense {
public:
  explicit DiaMultiDense(PedpModel model) : model_(std::move(model)) {}
  static DiaMultiDense create(PedpConfig cfg, Rng& rng);

  PedpModel& model() { return model_; }

  Eigen::VectorXd probs(const Eigen::VectorXd& state);
  Prediction predict(const Eigen::VectorXd& state, Rng& rng,
                     PredictMode mode = PredictMode::sample);

  FitResult fit(const Corpus& corpus, FitSettings settings);

private:
  PedpModel model_;
};

// FFN encoder + recurrent decoder over the action vocabulary extended with an
// end token. Duplicate emitted actions collapse into the set.
class DiaSeq {
public:
  static DiaSeq create(BaselineConfig cfg, Rng& rng);

  const BaselineConfig& config() const { return config_; }

  MacroAction predict(const Eigen::VectorXd& state, Rng& rng,
                      SeqDecodeMode mode = SeqDecodeMode::greedy);

  struct Params {
    ad::Param enc_w1, enc_b1, enc_w2, enc_b2;  // S -> H -> H
    ad::Param tok_emb;                         // (M+2) x E: actions, end, start
    ad::Param gru_wz, gru_uz, gru_bz;
    ad::Param gru_wr, gru_ur, gru_br;
    ad::Param gru_wn, gru_un, gru_bn;
    ad::Param out_w, out_b;  // H -> M+1 logits (actions + end)
  };
  Params& params() { return params_; }
  std::vector<ad::Param*> all_params();

  int end_token() const { return config_.M; }
  int start_token() const { return config_.M + 1; }

  struct Fit {
    Params best_params;
    int best_epoch = -1;
    double best_val_f1 = -1.0;
    std::vector<EpochRecord> log;
  };
  Fit fit(const Corpus& corpus, const FitSettings& settings);

private:
  DiaSeq(BaselineConfig cfg, Params params) : config_(std::move(cfg)), params_(std::move(params)) {}

  Eigen::VectorXd encode(const Eigen::VectorXd& state) const;
  Eigen::VectorXd gru_cell(const Eigen::VectorXd& h, const Eigen::VectorXd& input) const;
  Eigen::VectorXd output_logits(const Eigen::VectorXd& h) const;

  BaselineConfig config_;
  Params params_;
};

}  // namespace pedp
