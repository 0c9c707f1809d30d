#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pedp/corpus.hpp"
#include "pedp/metrics.hpp"
#include "pedp/model.hpp"

namespace pedp {

// Supervision for one turn: the canonical single-action sequence, its stop
// flags (0...01), both state vectors, and the macro label vector.
struct PlanningTargets {
  std::vector<int> action_sequence;
  std::vector<int> stop_sequence;
  Eigen::VectorXd s_t;
  Eigen::VectorXd s_t1;
  Eigen::VectorXd macro_vector;
  bool skip = false;  // empty macro: the sample contributes to MAP only
};

PlanningTargets build_targets(const TurnSample& sample, int action_count);

struct LossWeights {
  double w_dap = 1.0;
  double w_sfp = 1.0;
  double w_sr = 1.0;
  double w_map = 1.0;

  void validate() const;  // at least one weight positive, none negative
};

struct LossBreakdown {
  double total = 0.0;
  double dap = 0.0;
  double sfp = 0.0;
  double sr = 0.0;
  double map = 0.0;
};

// Teacher-forced rollout: the world model consumes the ground-truth action at
// every step, so the terminal embedding is independent of any sampling.
struct TeacherRollout {
  std::vector<ad::Var> policy_logits;  // one per step
  std::vector<ad::Var> stop_logits;
  ad::Var terminal;  // h_N
};

TeacherRollout rollout_teacher_forced(ad::Tape& tape, PedpModel& model, ad::Var h0,
                                      const std::vector<int>& target_actions);

// Mean categorical cross-entropy over steps.
ad::Var loss_dap(ad::Tape& tape, const std::vector<ad::Var>& policy_logits,
                 const std::vector<int>& target_actions);
ad::Var loss_sfp(ad::Tape& tape, const std::vector<ad::Var>& stop_logits,
                 const std::vector<int>& stop_targets);
// Mean BCE over both recovered state vectors.
ad::Var loss_sr(ad::Tape& tape, ad::Var recovered_t, ad::Var recovered_t1,
                const Eigen::VectorXd& s_t, const Eigen::VectorXd& s_t1);
ad::Var loss_map(ad::Tape& tape, ad::Var aggregated_probs, const Eigen::VectorXd& macro_vector);

struct TotalLoss {
  ad::Var node;
  LossBreakdown breakdown;
};

// Builds the full four-task objective for one sample on the given tape.
// DAP/SFP/SR run on the teacher-forced rollout; MAP runs the free-running
// K-path pipeline exactly as at inference. planning=false is the -planning
// ablation (decode (h_0, h_0), MAP only drives the decoder).
TotalLoss total_loss(ad::Tape& tape, PedpModel& model, const TurnSample& sample,
                     const LossWeights& weights, Rng& rng, bool planning = true);

struct OptimSettings {
  double lr = 1e-3;
  int batch_size = 32;
  double clip_norm = 5.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adaptive-moment gradient descent over a fixed parameter list.
class AdamOptimizer {
public:
  AdamOptimizer(std::vector<ad::Param*> params, OptimSettings settings);

  // Scales accumulated gradients by grad_scale (1/batch), clips the global
  // norm, applies one update, and zeroes the gradients.
  void step(double grad_scale);

private:
  std::vector<ad::Param*> params_;
  OptimSettings settings_;
  std::vector<ad::Mat> m_;
  std::vector<ad::Mat> v_;
  long t_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  double loss_total = 0.0;
  double loss_dap = 0.0;
  double loss_sfp = 0.0;
  double loss_sr = 0.0;
  double loss_map = 0.0;
  double val_f1 = 0.0;
  double val_precision = 0.0;
  double val_recall = 0.0;
  double seconds = 0.0;
};

struct FitSettings {
  int epochs = 100;
  OptimSettings optim;
  LossWeights weights;
  std::uint64_t seed = 0;
  bool planning = true;  // false trains the -planning (DiaMultiDense) model
};

struct FitResult {
  PedpParameters best_params;
  int best_epoch = -1;
  double best_val_f1 = -1.0;
  std::vector<EpochRecord> log;
};

// Validation split: dialogs whose id hashes to 0 mod 10 (about 10%, never
// splitting a dialog across the two sides). Falls back to the training turns
// when the split comes out empty.
std::pair<std::vector<int>, std::vector<int>> validation_split(const Corpus& corpus);

// N_max rule: max training macro cardinality + 2, floored at 10.
int default_n_max(const Corpus& corpus);

// Minibatch training with per-epoch validation F1 (threshold mode); keeps the
// best-validation parameter snapshot. Throws TrainingDivergence on a
// non-finite loss.
FitResult fit(PedpModel& model, const Corpus& corpus, const FitSettings& settings);

// JSON-lines, one record per epoch.
void write_training_log(const std::vector<EpochRecord>& log, const std::string& path);

}  // namespace pedp
