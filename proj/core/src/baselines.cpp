#include "pedp/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "pedp/errors.hpp"

namespace pedp {

void BaselineConfig::validate() const {
  if (S < 1 || M < 1 || H < 1) throw ValidationError("baseline widths must be >= 1");
  if (kind == BaselineKind::seq) {
    if (E < 1) throw ValidationError("seq token-embedding width must be >= 1");
    if (beam_width < 1) throw ValidationError("beam width must be >= 1");
    if (decode_cap < 1) throw ValidationError("decode cap must be >= 1");
  }
  gumbel.validate();
}

namespace {

void glorot(ad::Param& p, Rng& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(p.rows() + p.cols()));
  for (int j = 0; j < p.cols(); ++j) {
    for (int i = 0; i < p.rows(); ++i) p.value(i, j) = rng.uniform(-limit, limit);
  }
}

// Shared minibatch epoch loop. build_loss returns the scalar loss node;
// evaluate returns the validation report; on_best snapshots parameters.
template <typename BuildLoss, typename Evaluate, typename OnBest>
std::vector<EpochRecord> run_fit(const Corpus& corpus, const FitSettings& settings,
                                 std::vector<ad::Param*> params, BuildLoss build_loss,
                                 Evaluate evaluate, OnBest on_best) {
  if (corpus.turns.empty()) throw ValidationError("fit: empty dataset");
  auto [train_idx, val_idx] = validation_split(corpus);
  Rng rng(settings.seed);
  AdamOptimizer optimizer(std::move(params), settings.optim);

  std::vector<EpochRecord> log;
  double best_f1 = -1.0;
  for (int epoch = 0; epoch < settings.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    for (int i = static_cast<int>(train_idx.size()) - 1; i > 0; --i) {
      std::swap(train_idx[static_cast<size_t>(i)],
                train_idx[static_cast<size_t>(rng.uniform_int(i + 1))]);
    }
    double total = 0.0;
    int in_batch = 0, seen = 0;
    for (int idx : train_idx) {
      ad::Tape tape;
      ad::Var loss = build_loss(tape, corpus.turns[static_cast<size_t>(idx)], rng);
      double value = tape.scalar(loss);
      if (!std::isfinite(value)) {
        throw TrainingDivergence("non-finite loss at epoch " + std::to_string(epoch));
      }
      tape.backward(loss);
      total += value;
      ++in_batch;
      ++seen;
      if (in_batch == settings.optim.batch_size || seen == static_cast<int>(train_idx.size())) {
        optimizer.step(1.0 / static_cast<double>(in_batch));
        in_batch = 0;
      }
    }
    StandardReport val = evaluate(val_idx);
    auto t1 = std::chrono::steady_clock::now();

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss_total = total / static_cast<double>(train_idx.size());
    rec.loss_map = rec.loss_total;  // single-task baselines: the one loss
    rec.val_f1 = val.f1;
    rec.val_precision = val.precision;
    rec.val_recall = val.recall;
    rec.seconds = std::chrono::duration<double>(t1 - t0).count();
    log.push_back(rec);

    if (val.f1 > best_f1) {
      best_f1 = val.f1;
      on_best(epoch, val.f1);
    }
  }
  return log;
}

}  // namespace

DiaMultiClass DiaMultiClass::create(BaselineConfig cfg, Rng& rng) {
  cfg.kind = BaselineKind::multiclass;
  cfg.validate();
  Params p;
  p.w1 = ad::Param("mc.w1", cfg.H, cfg.S);
  p.b1 = ad::Param("mc.b1", cfg.H, 1);
  p.w2 = ad::Param("mc.w2", cfg.M, cfg.H);
  p.b2 = ad::Param("mc.b2", cfg.M, 1);
  glorot(p.w1, rng);
  glorot(p.w2, rng);
  return DiaMultiClass(std::move(cfg), std::move(p));
}

ad::Var DiaMultiClass::probs(ad::Tape& tape, ad::Var state) {
  ad::Var hidden = tape.relu(tape.linear(params_.w1, params_.b1, state));
  return tape.sigmoid(tape.linear(params_.w2, params_.b2, hidden));
}

Eigen::VectorXd DiaMultiClass::probs(const Eigen::VectorXd& state) {
  ad::Tape tape;
  return tape.value(probs(tape, tape.input(state)));
}

MacroAction DiaMultiClass::predict(const Eigen::VectorXd& state, Rng& rng, PredictMode mode) {
  Eigen::VectorXd p = probs(state);
  if (mode == PredictMode::sample) {
    Eigen::VectorXd sampled = gumbel_sigmoid(logit_transform(p), config_.gumbel.tau_out, rng);
    return decode_macro(hard_binarize(sampled));
  }
  return decode_macro(hard_binarize(p));
}

std::vector<ad::Param*> DiaMultiClass::all_params() {
  return {&params_.w1, &params_.b1, &params_.w2, &params_.b2};
}

DiaMultiClass::Fit DiaMultiClass::fit(const Corpus& corpus, const FitSettings& settings) {
  Fit result;
  result.best_params = params_;
  result.log = run_fit(
      corpus, settings, all_params(),
      [this](ad::Tape& tape, const TurnSample& turn, Rng&) {
        ad::Var p = probs(tape, tape.input(to_vector(turn.state)));
        return tape.bce_probs(p, encode_macro(turn.macro, config_.M));
      },
      [this, &corpus](const std::vector<int>& val_idx) {
        std::vector<MacroAction> preds, golds;
        Rng rng(0);
        for (int i : val_idx) {
          const TurnSample& t = corpus.turns[static_cast<size_t>(i)];
          preds.push_back(predict(to_vector(t.state), rng, PredictMode::threshold));
          golds.push_back(t.macro);
        }
        return standard_metrics(preds, golds);
      },
      [this, &result](int epoch, double f1) {
        result.best_epoch = epoch;
        result.best_val_f1 = f1;
        result.best_params = params_;
      });
  return result;
}

DiaMultiDense DiaMultiDense::create(PedpConfig cfg, Rng& rng) {
  return DiaMultiDense(PedpModel::create(std::move(cfg), rng));
}

Eigen::VectorXd DiaMultiDense::probs(const Eigen::VectorXd& state) {
  Eigen::VectorXd h0 = model_.encode_state(state);
  return model_.decode_path(h0, h0);
}

Prediction DiaMultiDense::predict(const Eigen::VectorXd& state, Rng& rng, PredictMode mode) {
  return model_.predict_macro(state, rng, mode, -1, true, /*planning=*/false);
}

FitResult DiaMultiDense::fit(const Corpus& corpus, FitSettings settings) {
  settings.planning = false;
  settings.weights = LossWeights{0.0, 0.0, 0.0, 1.0};
  return pedp::fit(model_, corpus, settings);
}

DiaSeq DiaSeq::create(BaselineConfig cfg, Rng& rng) {
  cfg.kind = BaselineKind::seq;
  cfg.validate();
  Params p;
  p.enc_w1 = ad::Param("seq.enc.w1", cfg.H, cfg.S);
  p.enc_b1 = ad::Param("seq.enc.b1", cfg.H, 1);
  p.enc_w2 = ad::Param("seq.enc.w2", cfg.H, cfg.H);
  p.enc_b2 = ad::Param("seq.enc.b2", cfg.H, 1);
  p.tok_emb = ad::Param("seq.emb", cfg.M + 2, cfg.E);
  p.gru_wz = ad::Param("seq.wz", cfg.H, cfg.E);
  p.gru_uz = ad::Param("seq.uz", cfg.H, cfg.H);
  p.gru_bz = ad::Param("seq.bz", cfg.H, 1);
  p.gru_wr = ad::Param("seq.wr", cfg.H, cfg.E);
  p.gru_ur = ad::Param("seq.ur", cfg.H, cfg.H);
  p.gru_br = ad::Param("seq.br", cfg.H, 1);
  p.gru_wn = ad::Param("seq.wn", cfg.H, cfg.E);
  p.gru_un = ad::Param("seq.un", cfg.H, cfg.H);
  p.gru_bn = ad::Param("seq.bn", cfg.H, 1);
  p.out_w = ad::Param("seq.out.w", cfg.M + 1, cfg.H);
  p.out_b = ad::Param("seq.out.b", cfg.M + 1, 1);
  for (ad::Param* w : {&p.enc_w1, &p.enc_w2, &p.tok_emb, &p.gru_wz, &p.gru_uz, &p.gru_wr,
                       &p.gru_ur, &p.gru_wn, &p.gru_un, &p.out_w}) {
    glorot(*w, rng);
  }
  return DiaSeq(std::move(cfg), std::move(p));
}

std::vector<ad::Param*> DiaSeq::all_params() {
  return {&params_.enc_w1, &params_.enc_b1, &params_.enc_w2, &params_.enc_b2, &params_.tok_emb,
          &params_.gru_wz, &params_.gru_uz, &params_.gru_bz, &params_.gru_wr, &params_.gru_ur,
          &params_.gru_br, &params_.gru_wn, &params_.gru_un, &params_.gru_bn, &params_.out_w,
          &params_.out_b};
}

Eigen::VectorXd DiaSeq::encode(const Eigen::VectorXd& state) const {
  Eigen::VectorXd hidden =
      ((params_.enc_w1.value * state).colwise() + params_.enc_b1.value.col(0)).cwiseMax(0.0);
  return params_.enc_w2.value * hidden + params_.enc_b2.value.col(0);
}

Eigen::VectorXd DiaSeq::gru_cell(const Eigen::VectorXd& h, const Eigen::VectorXd& input) const {
  auto sig = [](const Eigen::VectorXd& x) {
    return (1.0 / (1.0 + (-x.array()).exp())).matrix().eval();
  };
  Eigen::VectorXd z =
      sig(params_.gru_wz.value * input + params_.gru_uz.value * h + params_.gru_bz.value.col(0));
  Eigen::VectorXd r =
      sig(params_.gru_wr.value * input + params_.gru_ur.value * h + params_.gru_br.value.col(0));
  Eigen::VectorXd n = (params_.gru_wn.value * input +
                       r.cwiseProduct(params_.gru_un.value * h) + params_.gru_bn.value.col(0))
                          .array()
                          .tanh();
  return (1.0 - z.array()) * n.array() + z.array() * h.array();
}

Eigen::VectorXd DiaSeq::output_logits(const Eigen::VectorXd& h) const {
  return params_.out_w.value * h + params_.out_b.value.col(0);
}

MacroAction DiaSeq::predict(const Eigen::VectorXd& state, Rng& rng, SeqDecodeMode mode) {
  const int end = end_token();
  if (mode == SeqDecodeMode::greedy || mode == SeqDecodeMode::sample) {
    Eigen::VectorXd h = encode(state);
    int prev = start_token();
    std::vector<int> emitted;
    for (int n = 0; n < config_.decode_cap; ++n) {
      h = gru_cell(h, params_.tok_emb.value.row(prev).transpose());
      Eigen::VectorXd logits = output_logits(h);
      int tok;
      if (mode == SeqDecodeMode::greedy) {
        logits.maxCoeff(&tok);
      } else {
        // Gumbel-max draw == categorical sampling from softmax(logits).
        Eigen::VectorXd perturbed = logits + gumbel_noise(static_cast<int>(logits.size()), rng);
        perturbed.maxCoeff(&tok);
      }
      if (tok == end) break;
      emitted.push_back(tok);
      prev = tok;
    }
    return MacroAction::from_indices(std::move(emitted));
  }

  // Beam search; hypotheses score by total log-probability and finish on the
  // end token (forced at the cap).
  struct Hyp {
    Eigen::VectorXd h;
    std::vector<int> tokens;
    double logp = 0.0;
    bool done = false;
  };
  std::vector<Hyp> beams = {{encode(state), {}, 0.0, false}};
  for (int n = 0; n < config_.decode_cap; ++n) {
    bool all_done = true;
    std::vector<Hyp> candidates;
    for (const Hyp& hyp : beams) {
      if (hyp.done) {
        candidates.push_back(hyp);
        continue;
      }
      all_done = false;
      int prev = hyp.tokens.empty() ? start_token() : hyp.tokens.back();
      Eigen::VectorXd h = gru_cell(hyp.h, params_.tok_emb.value.row(prev).transpose());
      Eigen::VectorXd logits = output_logits(h);
      Eigen::VectorXd logp = logits.array() - logits.maxCoeff();
      logp = (logp.array() - std::log(logp.array().exp().sum())).matrix();
      for (int tok = 0; tok <= end; ++tok) {
        Hyp next = hyp;
        next.h = h;
        next.logp += logp[tok];
        if (tok == end) {
          next.done = true;
        } else {
          next.tokens.push_back(tok);
        }
        candidates.push_back(std::move(next));
      }
    }
    if (all_done) break;
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Hyp& a, const Hyp& b) { return a.logp > b.logp; });
    if (static_cast<int>(candidates.size()) > config_.beam_width) {
      candidates.resize(static_cast<size_t>(config_.beam_width));
    }
    beams = std::move(candidates);
  }
  const Hyp* best = nullptr;
  for (const Hyp& hyp : beams) {
    if (!hyp.done) continue;
    if (best == nullptr || hyp.logp > best->logp) best = &hyp;
  }
  if (best == nullptr) best = &beams.front();  // nothing terminated within the cap
  return MacroAction::from_indices(best->tokens);
}

DiaSeq::Fit DiaSeq::fit(const Corpus& corpus, const FitSettings& settings) {
  Fit result;
  result.best_params = params_;
  result.log = run_fit(
      corpus, settings, all_params(),
      [this](ad::Tape& tape, const TurnSample& turn, Rng&) {
        // Teacher-forced cross-entropy over the canonical sequence + end.
        ad::Var hidden =
            tape.relu(tape.linear(params_.enc_w1, params_.enc_b1, tape.input(to_vector(turn.state))));
        ad::Var h = tape.linear(params_.enc_w2, params_.enc_b2, hidden);
        std::vector<int> tokens =
            turn.macro.empty() ? std::vector<int>{} : decompose_macro(turn.macro);
        tokens.push_back(end_token());
        int prev = start_token();
        std::vector<std::pair<double, ad::Var>> terms;
        double w = 1.0 / static_cast<double>(tokens.size());
        for (int tok : tokens) {
          Eigen::VectorXd one_hot = Eigen::VectorXd::Zero(config_.M + 2);
          one_hot[prev] = 1.0;
          ad::Var e = tape.embed(params_.tok_emb, tape.input(one_hot));
          ad::Var z = tape.sigmoid(tape.add(tape.linear(params_.gru_wz, params_.gru_bz, e),
                                            tape.matvec(params_.gru_uz, h)));
          ad::Var r = tape.sigmoid(tape.add(tape.linear(params_.gru_wr, params_.gru_br, e),
                                            tape.matvec(params_.gru_ur, h)));
          ad::Var n = tape.tanh(tape.add(tape.linear(params_.gru_wn, params_.gru_bn, e),
                                         tape.cmul(r, tape.matvec(params_.gru_un, h))));
          ad::Var ones = tape.input(Eigen::VectorXd::Ones(config_.H));
          h = tape.add(tape.cmul(tape.sub(ones, z), n), tape.cmul(z, h));
          ad::Var logits = tape.linear(params_.out_w, params_.out_b, h);
          terms.emplace_back(w, tape.ce_with_logits(logits, tok));
          prev = tok;
        }
        return tape.weighted_sum(terms);
      },
      [this, &corpus](const std::vector<int>& val_idx) {
        std::vector<MacroAction> preds, golds;
        Rng rng(0);
        for (int i : val_idx) {
          const TurnSample& t = corpus.turns[static_cast<size_t>(i)];
          preds.push_back(predict(to_vector(t.state), rng, SeqDecodeMode::greedy));
          golds.push_back(t.macro);
        }
        return standard_metrics(preds, golds);
      },
      [this, &result](int epoch, double f1) {
        result.best_epoch = epoch;
        result.best_val_f1 = f1;
        result.best_params = params_;
      });
  return result;
}

}  // namespace pedp
