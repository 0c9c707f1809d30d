#pragma once

#include <Eigen/Core>
#include <vector>

#include "pedp/actions.hpp"
#include "pedp/autodiff.hpp"
#include "pedp/rng.hpp"
#include "pedp/sampling.hpp"

namespace pedp {

// Model dimensions. S and M come from the corpus; the rest are free.
struct PedpConfig {
  int S = 0;                // dialog-state width
  int H = 64;               // state-embedding width
  int M = 0;                // action count
  int K = 3;                // planned paths per prediction
  int N_max = 10;           // planning-horizon cap
  int E = 32;               // action-embedding width
  int decoder_hidden = 32;  // hidden width of each per-action decoder FFN
  int stop_hidden = 32;
  int recover_hidden = 32;
  GumbelConfig gumbel;
  // When false, the output Gumbel-Sigmoid is applied to the aggregated
  // probabilities directly instead of their logit transform.
  bool logit_domain_sampling = true;

  void validate() const;
};

// Trainable parameter groups: encoder, policy head, world model (embedding
// table + GRU cell), stop predictor, recovery model, per-action decoders.
struct PedpParameters {
  ad::Param enc_w1, enc_b1, enc_w2, enc_b2;
  ad::Param pol_w, pol_b;
  ad::Param emb;
  ad::Param gru_wz, gru_uz, gru_bz;
  ad::Param gru_wr, gru_ur, gru_br;
  ad::Param gru_wn, gru_un, gru_bn;
  ad::Param stop_w1, stop_b1, stop_w2, stop_b2;
  ad::Param rec_w1, rec_b1, rec_w2, rec_b2;
  std::vector<ad::Param> dec_w1, dec_b1, dec_w2, dec_b2;

  static PedpParameters init(const PedpConfig& cfg, Rng& rng);

  enum class Group { encoder, policy, world, stop, recovery, decoder };

  std::vector<ad::Param*> all();
  std::vector<const ad::Param*> all() const;
  std::vector<ad::Param*> group(Group g);
  void zero_grad();
};

// One simulated single-action dialog fragment.
struct PlannedPath {
  struct Step {
    int action = -1;
    Eigen::VectorXd sample;       // forwarded policy sample (hard one-hot by default)
    Eigen::VectorXd logits;       // pre-sample policy logits
    Eigen::VectorXd embedding;    // h_{n+1}
    Eigen::Vector2d stop_logits;  // class 1 = stop
    int stop_flag = 0;
  };

  Eigen::VectorXd initial;   // h_0
  std::vector<Step> steps;
  Eigen::VectorXd terminal;  // h_{N_k}
  int length = 0;            // N_k
  bool truncated = false;    // hit N_max without a stop flag
};

enum class PredictMode { sample, threshold };

struct Prediction {
  MacroAction macro;
  Eigen::VectorXd probs;  // aggregated P_t
  std::vector<PlannedPath> paths;
};

// The PEDP model: tape-level building blocks plus value-level inference.
// All forward passes run on a Tape so training and inference share one code
// path; inference simply never calls backward.
class PedpModel {
public:
  PedpModel(PedpConfig cfg, PedpParameters params)
      : config_(std::move(cfg)), params_(std::move(params)) {
    config_.validate();
  }
  static PedpModel create(PedpConfig cfg, Rng& rng);

  const PedpConfig& config() const { return config_; }
  PedpParameters& params() { return params_; }
  const PedpParameters& params() const { return params_; }

  struct PolicyStep {
    ad::Var logits;
    ad::Var sample;  // width M
    int action = -1;
  };
  struct StopStep {
    ad::Var logits;  // width 2
    int flag = 0;
  };
  struct Plan {
    std::vector<PolicyStep> policy_steps;
    std::vector<StopStep> stop_steps;
    std::vector<ad::Var> embeddings;  // h_1 .. h_{N_k}
    ad::Var terminal;
    int length = 0;
    bool truncated = false;
  };

  // h_t = ReLU(s W1 + b1) W2 + b2
  ad::Var encode_state(ad::Tape& tape, ad::Var state);
  // Gumbel-Softmax draw from the linear policy head.
  PolicyStep policy_step(ad::Tape& tape, ad::Var h, Rng& rng);
  // One GRU recurrence over the sampled action's embedding.
  ad::Var world_step(ad::Tape& tape, ad::Var h, ad::Var action_weights);
  // Binary stop decision from [h_0 : h_next].
  StopStep stop_predict(ad::Tape& tape, ad::Var h0, ad::Var h_next, Rng& rng);
  // Roll policy/world/stop until the stop flag fires or N_max is reached.
  Plan plan_path(ad::Tape& tape, ad::Var h0, Rng& rng);
  // Sigmoid decoder back to the structured state space (training-time only).
  ad::Var recover_state(ad::Tape& tape, ad::Var h);
  // M independent per-action FFNs over [h_0 : h_terminal].
  ad::Var decode_path(ad::Tape& tape, ad::Var h0, ad::Var h_terminal);
  // Elementwise mean of the per-path distributions.
  ad::Var aggregate(ad::Tape& tape, const std::vector<ad::Var>& path_probs);

  // Value-level surface.
  Eigen::VectorXd encode_state(const Eigen::VectorXd& s);
  PlannedPath plan_path(const Eigen::VectorXd& h0, Rng& rng);
  Eigen::VectorXd recover_state(const Eigen::VectorXd& h);
  Eigen::VectorXd decode_path(const Eigen::VectorXd& h0, const Eigen::VectorXd& h_terminal);
  static Eigen::VectorXd aggregate(const std::vector<Eigen::VectorXd>& path_probs);

  // Full prediction pipeline. ensemble=false plans a single path; planning=
  // false decodes (h_0, h_0) directly. k_override <= 0 means config K.
  Prediction predict_macro(const Eigen::VectorXd& state, Rng& rng,
                           PredictMode mode = PredictMode::sample, int k_override = -1,
                           bool ensemble = true, bool planning = true);

  PlannedPath snapshot_path(const ad::Tape& tape, ad::Var h0, const Plan& plan) const;

private:
  PedpConfig config_;
  PedpParameters params_;
};

// log(p / (1-p)) with p clamped into (0,1).
Eigen::VectorXd logit_transform(const Eigen::VectorXd& probs);

}  // namespace pedp
