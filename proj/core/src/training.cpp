#include "pedp/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "pedp/digest.hpp"
#include "pedp/errors.hpp"

namespace pedp {

PlanningTargets build_targets(const TurnSample& sample, int action_count) {
  PlanningTargets t;
  t.s_t = to_vector(sample.state);
  t.s_t1 = to_vector(sample.next_state);
  t.macro_vector = encode_macro(sample.macro, action_count);
  if (sample.macro.empty()) {
    t.skip = true;
    return t;
  }
  t.action_sequence = decompose_macro(sample.macro);
  t.stop_sequence.assign(t.action_sequence.size(), 0);
  t.stop_sequence.back() = 1;
  return t;
}

void LossWeights::validate() const {
  if (w_dap < 0.0 || w_sfp < 0.0 || w_sr < 0.0 || w_map < 0.0) {
    throw ValidationError("loss weights must be nonnegative");
  }
  if (w_dap + w_sfp + w_sr + w_map <= 0.0) {
    throw ValidationError("at least one loss weight must be positive");
  }
}

TeacherRollout rollout_teacher_forced(ad::Tape& tape, PedpModel& model, ad::Var h0,
                                      const std::vector<int>& target_actions) {
  if (target_actions.empty()) {
    throw ValidationError("teacher-forced rollout needs at least one target action");
  }
  const int M = model.config().M;
  TeacherRollout roll;
  ad::Var h = h0;
  for (int action : target_actions) {
    ad::Var logits = tape.linear(model.params().pol_w, model.params().pol_b, h);
    roll.policy_logits.push_back(logits);
    Eigen::VectorXd one_hot = Eigen::VectorXd::Zero(M);
    one_hot[action] = 1.0;
    ad::Var h_next = model.world_step(tape, h, tape.input(one_hot));
    ad::Var x = tape.concat(h0, h_next);
    ad::Var hidden = tape.relu(tape.linear(model.params().stop_w1, model.params().stop_b1, x));
    roll.stop_logits.push_back(tape.linear(model.params().stop_w2, model.params().stop_b2, hidden));
    h = h_next;
  }
  roll.terminal = h;
  return roll;
}

namespace {

ad::Var mean_ce(ad::Tape& tape, const std::vector<ad::Var>& logits,
                const std::vector<int>& targets) {
  if (logits.size() != targets.size() || logits.empty()) {
    throw ValidationError("cross-entropy: step count mismatch");
  }
  std::vector<std::pair<double, ad::Var>> terms;
  double w = 1.0 / static_cast<double>(logits.size());
  for (size_t n = 0; n < logits.size(); ++n) {
    terms.emplace_back(w, tape.ce_with_logits(logits[n], targets[n]));
  }
  return tape.weighted_sum(terms);
}

}  // namespace

ad::Var loss_dap(ad::Tape& tape, const std::vector<ad::Var>& policy_logits,
                 const std::vector<int>& target_actions) {
  return mean_ce(tape, policy_logits, target_actions);
}

ad::Var loss_sfp(ad::Tape& tape, const std::vector<ad::Var>& stop_logits,
                 const std::vector<int>& stop_targets) {
  return mean_ce(tape, stop_logits, stop_targets);
}

ad::Var loss_sr(ad::Tape& tape, ad::Var recovered_t, ad::Var recovered_t1,
                const Eigen::VectorXd& s_t, const Eigen::VectorXd& s_t1) {
  ad::Var a = tape.bce_probs(recovered_t, s_t);
  ad::Var b = tape.bce_probs(recovered_t1, s_t1);
  return tape.weighted_sum({{0.5, a}, {0.5, b}});
}

ad::Var loss_map(ad::Tape& tape, ad::Var aggregated_probs, const Eigen::VectorXd& macro_vector) {
  return tape.bce_probs(aggregated_probs, macro_vector);
}

TotalLoss total_loss(ad::Tape& tape, PedpModel& model, const TurnSample& sample,
                     const LossWeights& weights, Rng& rng, bool planning) {
  weights.validate();
  PlanningTargets targets = build_targets(sample, model.config().M);

  ad::Var h0 = model.encode_state(tape, tape.input(targets.s_t));

  ad::Var dap = tape.constant_scalar(0.0);
  ad::Var sfp = tape.constant_scalar(0.0);
  ad::Var sr = tape.constant_scalar(0.0);
  bool need_teacher = weights.w_dap > 0.0 || weights.w_sfp > 0.0 || weights.w_sr > 0.0;
  if (!targets.skip && need_teacher) {
    TeacherRollout roll = rollout_teacher_forced(tape, model, h0, targets.action_sequence);
    dap = loss_dap(tape, roll.policy_logits, targets.action_sequence);
    sfp = loss_sfp(tape, roll.stop_logits, targets.stop_sequence);
    ad::Var rec_t = model.recover_state(tape, h0);
    ad::Var rec_t1 = model.recover_state(tape, roll.terminal);
    sr = loss_sr(tape, rec_t, rec_t1, targets.s_t, targets.s_t1);
  }

  // MAP runs the inference pipeline: free-running sampled paths.
  std::vector<ad::Var> path_probs;
  if (planning) {
    for (int k = 0; k < model.config().K; ++k) {
      Rng path_rng = rng.split();
      PedpModel::Plan plan = model.plan_path(tape, h0, path_rng);
      path_probs.push_back(model.decode_path(tape, h0, plan.terminal));
    }
  } else {
    path_probs.push_back(model.decode_path(tape, h0, h0));
  }
  ad::Var aggregated = model.aggregate(tape, path_probs);
  ad::Var map = loss_map(tape, aggregated, targets.macro_vector);

  TotalLoss out;
  out.node = tape.weighted_sum(
      {{weights.w_dap, dap}, {weights.w_sfp, sfp}, {weights.w_sr, sr}, {weights.w_map, map}});
  out.breakdown.dap = tape.scalar(dap);
  out.breakdown.sfp = tape.scalar(sfp);
  out.breakdown.sr = tape.scalar(sr);
  out.breakdown.map = tape.scalar(map);
  out.breakdown.total = tape.scalar(out.node);
  return out;
}

AdamOptimizer::AdamOptimizer(std::vector<ad::Param*> params, OptimSettings settings)
    : params_(std::move(params)), settings_(settings) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (ad::Param* p : params_) {
    m_.push_back(ad::Mat::Zero(p->rows(), p->cols()));
    v_.push_back(ad::Mat::Zero(p->rows(), p->cols()));
  }
}

void AdamOptimizer::step(double grad_scale) {
  double norm_sq = 0.0;
  for (ad::Param* p : params_) {
    norm_sq += (p->grad * grad_scale).squaredNorm();
  }
  double norm = std::sqrt(norm_sq);
  double clip_scale = 1.0;
  if (settings_.clip_norm > 0.0 && norm > settings_.clip_norm) {
    clip_scale = settings_.clip_norm / norm;
  }

  ++t_;
  double bc1 = 1.0 - std::pow(settings_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(settings_.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    ad::Param& p = *params_[i];
    ad::Mat g = p.grad * (grad_scale * clip_scale);
    m_[i] = settings_.beta1 * m_[i] + (1.0 - settings_.beta1) * g;
    v_[i] = settings_.beta2 * v_[i] + (1.0 - settings_.beta2) * g.cwiseProduct(g);
    ad::Mat m_hat = m_[i] / bc1;
    ad::Mat v_hat = v_[i] / bc2;
    p.value.array() -= settings_.lr * m_hat.array() / (v_hat.array().sqrt() + settings_.eps);
    p.zero_grad();
  }
}

std::pair<std::vector<int>, std::vector<int>> validation_split(const Corpus& corpus) {
  std::vector<int> train, val;
  for (int i = 0; i < static_cast<int>(corpus.turns.size()); ++i) {
    if (fnv1a(corpus.turns[static_cast<size_t>(i)].dialog_id) % 10 == 0) {
      val.push_back(i);
    } else {
      train.push_back(i);
    }
  }
  if (val.empty()) val = train;
  if (train.empty()) throw ValidationError("validation split left no training turns");
  return {train, val};
}

int default_n_max(const Corpus& corpus) {
  int max_card = 0;
  for (const auto& t : corpus.turns) max_card = std::max(max_card, t.macro.size());
  return std::max(10, max_card + 2);
}

namespace {

StandardReport evaluate_threshold(PedpModel& model, const Corpus& corpus,
                                  const std::vector<int>& indices, bool planning,
                                  std::uint64_t seed) {
  std::vector<MacroAction> preds, golds;
  Rng rng(seed);
  for (int i : indices) {
    const TurnSample& turn = corpus.turns[static_cast<size_t>(i)];
    Prediction p = model.predict_macro(to_vector(turn.state), rng, PredictMode::threshold, -1,
                                       true, planning);
    preds.push_back(p.macro);
    golds.push_back(turn.macro);
  }
  return standard_metrics(preds, golds);
}

}  // namespace

FitResult fit(PedpModel& model, const Corpus& corpus, const FitSettings& settings) {
  if (corpus.turns.empty()) throw ValidationError("fit: empty dataset");
  settings.weights.validate();

  auto [train_idx, val_idx] = validation_split(corpus);
  Rng rng(settings.seed);
  AdamOptimizer optimizer(model.params().all(), settings.optim);

  FitResult result;
  result.best_params = model.params();

  for (int epoch = 0; epoch < settings.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();

    // Fisher-Yates shuffle driven by the training stream.
    for (int i = static_cast<int>(train_idx.size()) - 1; i > 0; --i) {
      std::swap(train_idx[static_cast<size_t>(i)],
                train_idx[static_cast<size_t>(rng.uniform_int(i + 1))]);
    }

    LossBreakdown epoch_loss;
    int in_batch = 0;
    int seen = 0;
    for (int idx : train_idx) {
      ad::Tape tape;
      TotalLoss loss = total_loss(tape, model, corpus.turns[static_cast<size_t>(idx)],
                                  settings.weights, rng, settings.planning);
      if (!std::isfinite(loss.breakdown.total)) {
        throw TrainingDivergence("non-finite loss at epoch " + std::to_string(epoch) +
                                 ", sample " + std::to_string(idx));
      }
      tape.backward(loss.node);
      epoch_loss.total += loss.breakdown.total;
      epoch_loss.dap += loss.breakdown.dap;
      epoch_loss.sfp += loss.breakdown.sfp;
      epoch_loss.sr += loss.breakdown.sr;
      epoch_loss.map += loss.breakdown.map;
      ++in_batch;
      ++seen;
      if (in_batch == settings.optim.batch_size || seen == static_cast<int>(train_idx.size())) {
        optimizer.step(1.0 / static_cast<double>(in_batch));
        in_batch = 0;
      }
    }

    StandardReport val = evaluate_threshold(model, corpus, val_idx, settings.planning,
                                            settings.seed ^ (0x5eedull + static_cast<std::uint64_t>(epoch)));

    auto t1 = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch;
    double n = static_cast<double>(train_idx.size());
    rec.loss_total = epoch_loss.total / n;
    rec.loss_dap = epoch_loss.dap / n;
    rec.loss_sfp = epoch_loss.sfp / n;
    rec.loss_sr = epoch_loss.sr / n;
    rec.loss_map = epoch_loss.map / n;
    rec.val_f1 = val.f1;
    rec.val_precision = val.precision;
    rec.val_recall = val.recall;
    rec.seconds = std::chrono::duration<double>(t1 - t0).count();
    result.log.push_back(rec);

    if (val.f1 > result.best_val_f1) {
      result.best_val_f1 = val.f1;
      result.best_epoch = epoch;
      result.best_params = model.params();
    }
  }
  return result;
}

void write_training_log(const std::vector<EpochRecord>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write training log \"" + path + "\"");
  for (const auto& rec : log) {
    nlohmann::ordered_json j;
    j["epoch"] = rec.epoch;
    j["loss_total"] = rec.loss_total;
    j["loss_dap"] = rec.loss_dap;
    j["loss_sfp"] = rec.loss_sfp;
    j["loss_sr"] = rec.loss_sr;
    j["loss_map"] = rec.loss_map;
    j["val_f1"] = rec.val_f1;
    j["val_precision"] = rec.val_precision;
    j["val_recall"] = rec.val_recall;
    j["seconds"] = rec.seconds;
    out << j.dump() << "\n";
  }
}

}  // namespace pedp
