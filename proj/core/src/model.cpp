#include "pedp/model.hpp"

#include <cmath>

#include "pedp/errors.hpp"

namespace pedp {

void PedpConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ValidationError(std::string(name) + " must be >= 1");
  };
  positive(S, "S");
  positive(H, "H");
  positive(M, "M");
  positive(K, "K");
  positive(N_max, "N_max");
  positive(E, "E");
  positive(decoder_hidden, "decoder_hidden");
  positive(stop_hidden, "stop_hidden");
  positive(recover_hidden, "recover_hidden");
  gumbel.validate();
}

namespace {

void glorot(ad::Param& p, Rng& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(p.rows() + p.cols()));
  for (int j = 0; j < p.cols(); ++j) {
    for (int i = 0; i < p.rows(); ++i) {
      p.value(i, j) = rng.uniform(-limit, limit);
    }
  }
}

}  // namespace

PedpParameters PedpParameters::init(const PedpConfig& cfg, Rng& rng) {
  PedpParameters p;
  p.enc_w1 = ad::Param("enc.w1", cfg.H, cfg.S);
  p.enc_b1 = ad::Param("enc.b1", cfg.H, 1);
  p.enc_w2 = ad::Param("enc.w2", cfg.H, cfg.H);
  p.enc_b2 = ad::Param("enc.b2", cfg.H, 1);
  p.pol_w = ad::Param("pol.w", cfg.M, cfg.H);
  p.pol_b = ad::Param("pol.b", cfg.M, 1);
  p.emb = ad::Param("world.emb", cfg.M, cfg.E);
  p.gru_wz = ad::Param("world.wz", cfg.H, cfg.E);
  p.gru_uz = ad::Param("world.uz", cfg.H, cfg.H);
  p.gru_bz = ad::Param("world.bz", cfg.H, 1);
  p.gru_wr = ad::Param("world.wr", cfg.H, cfg.E);
  p.gru_ur = ad::Param("world.ur", cfg.H, cfg.H);
  p.gru_br = ad::Param("world.br", cfg.H, 1);
  p.gru_wn = ad::Param("world.wn", cfg.H, cfg.E);
  p.gru_un = ad::Param("world.un", cfg.H, cfg.H);
  p.gru_bn = ad::Param("world.bn", cfg.H, 1);
  p.stop_w1 = ad::Param("stop.w1", cfg.stop_hidden, 2 * cfg.H);
  p.stop_b1 = ad::Param("stop.b1", cfg.stop_hidden, 1);
  p.stop_w2 = ad::Param("stop.w2", 2, cfg.stop_hidden);
  p.stop_b2 = ad::Param("stop.b2", 2, 1);
  p.rec_w1 = ad::Param("rec.w1", cfg.recover_hidden, cfg.H);
  p.rec_b1 = ad::Param("rec.b1", cfg.recover_hidden, 1);
  p.rec_w2 = ad::Param("rec.w2", cfg.S, cfg.recover_hidden);
  p.rec_b2 = ad::Param("rec.b2", cfg.S, 1);
  p.dec_w1.reserve(cfg.M);
  for (int m = 0; m < cfg.M; ++m) {
    std::string base = "dec." + std::to_string(m) + ".";
    p.dec_w1.emplace_back(base + "w1", cfg.decoder_hidden, 2 * cfg.H);
    p.dec_b1.emplace_back(base + "b1", cfg.decoder_hidden, 1);
    p.dec_w2.emplace_back(base + "w2", 1, cfg.decoder_hidden);
    p.dec_b2.emplace_back(base + "b2", 1, 1);
  }
  // Biases stay zero; weights are fan-scaled uniform. Initialization order is
  // fixed so a seed fully determines the starting point.
  for (ad::Param* w : p.all()) {
    if (w->name.ends_with("w1") || w->name.ends_with("w2") || w->name.ends_with(".w") ||
        w->name.ends_with("emb") || w->name.ends_with("wz") || w->name.ends_with("uz") ||
        w->name.ends_with("wr") || w->name.ends_with("ur") || w->name.ends_with("wn") ||
        w->name.ends_with("un")) {
      glorot(*w, rng);
    }
  }
  return p;
}

std::vector<ad::Param*> PedpParameters::all() {
  std::vector<ad::Param*> out = {
      &enc_w1, &enc_b1, &enc_w2, &enc_b2, &pol_w,   &pol_b,   &emb,     &gru_wz,  &gru_uz,
      &gru_bz, &gru_wr, &gru_ur, &gru_br, &gru_wn,  &gru_un,  &gru_bn,  &stop_w1, &stop_b1,
      &stop_w2, &stop_b2, &rec_w1, &rec_b1, &rec_w2, &rec_b2};
  for (size_t m = 0; m < dec_w1.size(); ++m) {
    out.push_back(&dec_w1[m]);
    out.push_back(&dec_b1[m]);
    out.push_back(&dec_w2[m]);
    out.push_back(&dec_b2[m]);
  }
  return out;
}

std::vector<const ad::Param*> PedpParameters::all() const {
  auto mutable_all = const_cast<PedpParameters*>(this)->all();
  return {mutable_all.begin(), mutable_all.end()};
}

std::vector<ad::Param*> PedpParameters::group(Group g) {
  switch (g) {
    case Group::encoder:
      return {&enc_w1, &enc_b1, &enc_w2, &enc_b2};
    case Group::policy:
      return {&pol_w, &pol_b};
    case Group::world:
      return {&emb,    &gru_wz, &gru_uz, &gru_bz, &gru_wr,
              &gru_ur, &gru_br, &gru_wn, &gru_un, &gru_bn};
    case Group::stop:
      return {&stop_w1, &stop_b1, &stop_w2, &stop_b2};
    case Group::recovery:
      return {&rec_w1, &rec_b1, &rec_w2, &rec_b2};
    case Group::decoder: {
      std::vector<ad::Param*> out;
      for (size_t m = 0; m < dec_w1.size(); ++m) {
        out.push_back(&dec_w1[m]);
        out.push_back(&dec_b1[m]);
        out.push_back(&dec_w2[m]);
        out.push_back(&dec_b2[m]);
      }
      return out;
    }
  }
  return {};
}

void PedpParameters::zero_grad() {
  for (ad::Param* p : all()) p->zero_grad();
}

PedpModel PedpModel::create(PedpConfig cfg, Rng& rng) {
  cfg.validate();
  PedpParameters params = PedpParameters::init(cfg, rng);
  return PedpModel(std::move(cfg), std::move(params));
}

ad::Var PedpModel::encode_state(ad::Tape& tape, ad::Var state) {
  if (tape.width(state) != config_.S) {
    throw ValidationError("encode_state: state width " + std::to_string(tape.width(state)) +
                          " != S = " + std::to_string(config_.S));
  }
  ad::Var hidden = tape.relu(tape.linear(params_.enc_w1, params_.enc_b1, state));
  return tape.linear(params_.enc_w2, params_.enc_b2, hidden);
}

PedpModel::PolicyStep PedpModel::policy_step(ad::Tape& tape, ad::Var h, Rng& rng) {
  PolicyStep step;
  step.logits = tape.linear(params_.pol_w, params_.pol_b, h);
  Eigen::VectorXd noise = gumbel_noise(config_.M, rng);
  ad::Var perturbed = tape.add_const(step.logits, noise);
  const Eigen::VectorXd& pv = tape.value(perturbed);
  pv.maxCoeff(&step.action);
  ad::Var soft = tape.softmax(perturbed, config_.gumbel.tau_d);
  if (config_.gumbel.hard) {
    Eigen::VectorXd one_hot = Eigen::VectorXd::Zero(config_.M);
    one_hot[step.action] = 1.0;
    step.sample = tape.straight_through(one_hot, soft);
  } else {
    step.sample = soft;
  }
  return step;
}

ad::Var PedpModel::world_step(ad::Tape& tape, ad::Var h, ad::Var action_weights) {
  ad::Var e = tape.embed(params_.emb, action_weights);
  ad::Var z = tape.sigmoid(
      tape.add(tape.linear(params_.gru_wz, params_.gru_bz, e), tape.matvec(params_.gru_uz, h)));
  ad::Var r = tape.sigmoid(
      tape.add(tape.linear(params_.gru_wr, params_.gru_br, e), tape.matvec(params_.gru_ur, h)));
  ad::Var n = tape.tanh(tape.add(tape.linear(params_.gru_wn, params_.gru_bn, e),
                                 tape.cmul(r, tape.matvec(params_.gru_un, h))));
  ad::Var ones = tape.input(Eigen::VectorXd::Ones(config_.H));
  return tape.add(tape.cmul(tape.sub(ones, z), n), tape.cmul(z, h));
}

PedpModel::StopStep PedpModel::stop_predict(ad::Tape& tape, ad::Var h0, ad::Var h_next, Rng& rng) {
  StopStep step;
  ad::Var x = tape.concat(h0, h_next);
  ad::Var hidden = tape.relu(tape.linear(params_.stop_w1, params_.stop_b1, x));
  step.logits = tape.linear(params_.stop_w2, params_.stop_b2, hidden);
  Eigen::VectorXd noise = gumbel_noise(2, rng);
  Eigen::Vector2d perturbed = tape.value(step.logits) + noise;
  step.flag = perturbed[1] > perturbed[0] ? 1 : 0;
  return step;
}

PedpModel::Plan PedpModel::plan_path(ad::Tape& tape, ad::Var h0, Rng& rng) {
  Plan plan;
  ad::Var h = h0;
  for (int n = 0; n < config_.N_max; ++n) {
    PolicyStep ps = policy_step(tape, h, rng);
    ad::Var h_next = world_step(tape, h, ps.sample);
    StopStep ss = stop_predict(tape, h0, h_next, rng);
    plan.policy_steps.push_back(ps);
    plan.stop_steps.push_back(ss);
    plan.embeddings.push_back(h_next);
    h = h_next;
    plan.length = n + 1;
    if (ss.flag == 1) break;
    if (n + 1 == config_.N_max) plan.truncated = true;
  }
  plan.terminal = h;
  return plan;
}

ad::Var PedpModel::recover_state(ad::Tape& tape, ad::Var h) {
  ad::Var hidden = tape.relu(tape.linear(params_.rec_w1, params_.rec_b1, h));
  return tape.sigmoid(tape.linear(params_.rec_w2, params_.rec_b2, hidden));
}

ad::Var PedpModel::decode_path(ad::Tape& tape, ad::Var h0, ad::Var h_terminal) {
  ad::Var x = tape.concat(h0, h_terminal);
  std::vector<ad::Var> per_action;
  per_action.reserve(config_.M);
  for (int m = 0; m < config_.M; ++m) {
    ad::Var hidden = tape.relu(tape.linear(params_.dec_w1[m], params_.dec_b1[m], x));
    per_action.push_back(tape.sigmoid(tape.linear(params_.dec_w2[m], params_.dec_b2[m], hidden)));
  }
  return tape.concat_many(per_action);
}

ad::Var PedpModel::aggregate(ad::Tape& tape, const std::vector<ad::Var>& path_probs) {
  return tape.mean(path_probs);
}

Eigen::VectorXd PedpModel::encode_state(const Eigen::VectorXd& s) {
  ad::Tape tape;
  return tape.value(encode_state(tape, tape.input(s)));
}

PlannedPath PedpModel::snapshot_path(const ad::Tape& tape, ad::Var h0, const Plan& plan) const {
  PlannedPath path;
  path.initial = tape.value(h0);
  path.length = plan.length;
  path.truncated = plan.truncated;
  path.terminal = tape.value(plan.terminal);
  for (int n = 0; n < plan.length; ++n) {
    PlannedPath::Step step;
    step.action = plan.policy_steps[static_cast<size_t>(n)].action;
    step.sample = tape.value(plan.policy_steps[static_cast<size_t>(n)].sample);
    step.logits = tape.value(plan.policy_steps[static_cast<size_t>(n)].logits);
    step.embedding = tape.value(plan.embeddings[static_cast<size_t>(n)]);
    step.stop_logits = tape.value(plan.stop_steps[static_cast<size_t>(n)].logits);
    step.stop_flag = plan.stop_steps[static_cast<size_t>(n)].flag;
    path.steps.push_back(std::move(step));
  }
  return path;
}

PlannedPath PedpModel::plan_path(const Eigen::VectorXd& h0, Rng& rng) {
  ad::Tape tape;
  ad::Var h0_var = tape.input(h0);
  Plan plan = plan_path(tape, h0_var, rng);
  return snapshot_path(tape, h0_var, plan);
}

Eigen::VectorXd PedpModel::recover_state(const Eigen::VectorXd& h) {
  ad::Tape tape;
  return tape.value(recover_state(tape, tape.input(h)));
}

Eigen::VectorXd PedpModel::decode_path(const Eigen::VectorXd& h0, const Eigen::VectorXd& h_terminal) {
  ad::Tape tape;
  return tape.value(decode_path(tape, tape.input(h0), tape.input(h_terminal)));
}

Eigen::VectorXd PedpModel::aggregate(const std::vector<Eigen::VectorXd>& path_probs) {
  if (path_probs.empty()) throw ValidationError("aggregate over zero paths");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(path_probs[0].size());
  for (const auto& p : path_probs) mean += p;
  return mean / static_cast<double>(path_probs.size());
}

Eigen::VectorXd logit_transform(const Eigen::VectorXd& probs) {
  Eigen::VectorXd out(probs.size());
  for (int i = 0; i < probs.size(); ++i) {
    double p = std::min(std::max(probs[i], 1e-12), 1.0 - 1e-12);
    out[i] = std::log(p / (1.0 - p));
  }
  return out;
}

Prediction PedpModel::predict_macro(const Eigen::VectorXd& state, Rng& rng, PredictMode mode,
                                    int k_override, bool ensemble, bool planning) {
  ad::Tape tape;
  ad::Var h0 = encode_state(tape, tape.input(state));

  Prediction pred;
  std::vector<ad::Var> path_probs;
  if (planning) {
    int paths = ensemble ? (k_override > 0 ? k_override : config_.K) : 1;
    for (int k = 0; k < paths; ++k) {
      Rng path_rng = rng.split();
      Plan plan = plan_path(tape, h0, path_rng);
      pred.paths.push_back(snapshot_path(tape, h0, plan));
      path_probs.push_back(decode_path(tape, h0, plan.terminal));
    }
  } else {
    path_probs.push_back(decode_path(tape, h0, h0));
  }
  pred.probs = tape.value(aggregate(tape, path_probs));

  if (mode == PredictMode::sample) {
    Eigen::VectorXd pre =
        config_.logit_domain_sampling ? logit_transform(pred.probs) : pred.probs;
    Eigen::VectorXd sampled = gumbel_sigmoid(pre, config_.gumbel.tau_out, rng);
    pred.macro = decode_macro(hard_binarize(sampled));
  } else {
    pred.macro = decode_macro(hard_binarize(pred.probs));
  }
  return pred;
}

}  // namespace pedp
