#include <doctest.h>

#include <cmath>

#include "pedp/simulator.hpp"
#include "pedp/training.hpp"

using namespace pedp;

namespace {

PedpConfig tiny_config() {
  PedpConfig cfg;
  cfg.S = 8;
  cfg.H = 6;
  cfg.M = 5;
  cfg.K = 2;
  cfg.N_max = 3;
  cfg.E = 4;
  cfg.decoder_hidden = 4;
  cfg.stop_hidden = 4;
  cfg.recover_hidden = 4;
  return cfg;
}

TurnSample tiny_sample(Rng& rng, int s_width, std::vector<int> macro) {
  TurnSample t;
  t.dialog_id = "d0";
  t.turn_id = 0;
  t.state.resize(static_cast<size_t>(s_width));
  t.next_state.resize(static_cast<size_t>(s_width));
  for (int i = 0; i < s_width; ++i) {
    t.state[static_cast<size_t>(i)] = rng.bernoulli(0.4) ? 1 : 0;
    t.next_state[static_cast<size_t>(i)] = rng.bernoulli(0.4) ? 1 : 0;
  }
  t.macro = MacroAction::from_indices(std::move(macro));
  return t;
}

}  // namespace

TEST_CASE("build_targets produces the canonical sequence and terminal stop") {
  Rng rng(1);
  TurnSample a = tiny_sample(rng, 8, {3});
  PlanningTargets ta = build_targets(a, 5);
  CHECK(ta.action_sequence == std::vector<int>{3});
  CHECK(ta.stop_sequence == std::vector<int>{1});
  CHECK_FALSE(ta.skip);

  TurnSample b = tiny_sample(rng, 8, {1, 4, 2});
  PlanningTargets tb = build_targets(b, 5);
  CHECK(tb.action_sequence == std::vector<int>{1, 2, 4});
  CHECK(tb.stop_sequence == std::vector<int>{0, 0, 1});
  CHECK(tb.macro_vector.sum() == 3.0);

  TurnSample empty = tiny_sample(rng, 8, {});
  PlanningTargets te = build_targets(empty, 5);
  CHECK(te.skip);
}

TEST_CASE("loss weights validation") {
  LossWeights zero{0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(zero.validate(), ValidationError);
  LossWeights negative{1.0, -0.1, 1.0, 1.0};
  CHECK_THROWS_AS(negative.validate(), ValidationError);
  LossWeights ok{1.0, 0.0, 0.0, 0.0};
  ok.validate();
}

TEST_CASE("teacher-forced rollout runs exactly N steps") {
  Rng rng(2);
  PedpModel model = PedpModel::create(tiny_config(), rng);
  ad::Tape tape;
  ad::Var h0 = tape.input(Eigen::VectorXd::Constant(6, 0.2));
  TeacherRollout roll = rollout_teacher_forced(tape, model, h0, {1});
  CHECK(roll.policy_logits.size() == 1);
  CHECK(roll.stop_logits.size() == 1);
  CHECK(tape.value(roll.terminal).size() == 6);

  CHECK_THROWS_AS(rollout_teacher_forced(tape, model, h0, {}), ValidationError);
}

TEST_CASE("teacher-forced terminal embedding is seed independent") {
  Rng rng(3);
  PedpModel model = PedpModel::create(tiny_config(), rng);
  TurnSample sample = tiny_sample(rng, 8, {0, 2});
  LossWeights weights;

  auto terminal_for = [&](std::uint64_t seed) {
    ad::Tape tape;
    PlanningTargets targets = build_targets(sample, 5);
    ad::Var h0 = model.encode_state(tape, tape.input(targets.s_t));
    TeacherRollout roll = rollout_teacher_forced(tape, model, h0, targets.action_sequence);
    return tape.value(roll.terminal).eval();
  };
  CHECK(terminal_for(10) == terminal_for(999));
}

TEST_CASE("loss anchors at the uniform prediction point") {
  // ln C for cross-entropy, ln 2 for BCE at one half.
  ad::Tape tape;
  ad::Var uniform_logits = tape.input(Eigen::VectorXd::Zero(5));
  ad::Var dap = loss_dap(tape, {uniform_logits}, {3});
  CHECK(std::abs(tape.scalar(dap) - std::log(5.0)) < 1e-6);

  ad::Var stop_logits = tape.input(Eigen::VectorXd::Zero(2));
  ad::Var sfp = loss_sfp(tape, {stop_logits}, {1});
  CHECK(std::abs(tape.scalar(sfp) - std::log(2.0)) < 1e-6);

  Eigen::VectorXd s = Eigen::VectorXd::Zero(8);
  s[1] = 1.0;
  ad::Var half = tape.input(Eigen::VectorXd::Constant(8, 0.5));
  ad::Var sr = loss_sr(tape, half, half, s, s);
  CHECK(std::abs(tape.scalar(sr) - std::log(2.0)) < 1e-6);

  Eigen::VectorXd macro = Eigen::VectorXd::Zero(5);
  macro[2] = 1.0;
  ad::Var p_half = tape.input(Eigen::VectorXd::Constant(5, 0.5));
  ad::Var map = loss_map(tape, p_half, macro);
  CHECK(std::abs(tape.scalar(map) - std::log(2.0)) < 1e-6);
}

TEST_CASE("saturated predictions drive losses toward zero") {
  ad::Tape tape;
  Eigen::VectorXd logits = Eigen::VectorXd::Zero(5);
  logits[3] = 30.0;
  ad::Var dap = loss_dap(tape, {tape.input(logits)}, {3});
  CHECK(tape.scalar(dap) < 1e-3);

  Eigen::VectorXd macro(5);
  macro << 1, 0, 0, 1, 0;
  Eigen::VectorXd probs(5);
  probs << 0.999, 0.001, 0.001, 0.999, 0.001;
  ad::Var map = loss_map(tape, tape.input(probs), macro);
  CHECK(std::abs(tape.scalar(map) - 0.001) < 1e-4);
}

TEST_CASE("total_loss with weights (1,0,0,0) equals the DAP loss") {
  Rng rng(4);
  PedpModel model = PedpModel::create(tiny_config(), rng);
  TurnSample sample = tiny_sample(rng, 8, {1, 3});

  Rng r1(5);
  ad::Tape tape;
  TotalLoss loss = total_loss(tape, model, sample, LossWeights{1, 0, 0, 0}, r1);
  CHECK(loss.breakdown.total == doctest::Approx(loss.breakdown.dap).epsilon(1e-12));

  Rng r2(5);
  ad::Tape t2;
  TotalLoss defaults = total_loss(t2, model, sample, LossWeights{}, r2);
  CHECK(std::isfinite(defaults.breakdown.total));
  CHECK(defaults.breakdown.total > 0.0);
}

TEST_CASE("whole-model gradients match central finite differences (relaxed mode)") {
  // Soft relaxations on the forward path make the objective smooth; fixed
  // noise keeps the sampled control flow identical across perturbations.
  PedpConfig cfg = tiny_config();
  cfg.gumbel.hard = false;
  Rng rng(6);
  PedpModel model = PedpModel::create(cfg, rng);
  TurnSample sample = tiny_sample(rng, 8, {0, 2, 4});
  LossWeights weights;
  const std::uint64_t noise_seed = 77;

  auto loss_value = [&] {
    ad::Tape tape;
    Rng r(noise_seed);
    return total_loss(tape, model, sample, weights, r).breakdown.total;
  };

  model.params().zero_grad();
  {
    ad::Tape tape;
    Rng r(noise_seed);
    TotalLoss loss = total_loss(tape, model, sample, weights, r);
    tape.backward(loss.node);
  }

  const double h = 1e-6;
  for (auto group : {PedpParameters::Group::encoder, PedpParameters::Group::policy,
                     PedpParameters::Group::world, PedpParameters::Group::stop,
                     PedpParameters::Group::recovery, PedpParameters::Group::decoder}) {
    bool group_has_signal = false;
    for (ad::Param* p : model.params().group(group)) {
      for (int j = 0; j < p->cols(); ++j) {
        for (int i = 0; i < p->rows(); ++i) {
          double saved = p->value(i, j);
          p->value(i, j) = saved + h;
          double up = loss_value();
          p->value(i, j) = saved - h;
          double down = loss_value();
          p->value(i, j) = saved;
          double fd = (up - down) / (2.0 * h);
          double analytic = p->grad(i, j);
          if (std::abs(fd) > 1e-6) group_has_signal = true;
          double denom = std::max({std::abs(fd), std::abs(analytic), 1e-6});
          INFO("group param ", p->name, " (", i, ",", j, "): fd=", fd, " analytic=", analytic);
          CHECK(std::abs(fd - analytic) / denom < 1e-4);
        }
      }
    }
    CHECK(group_has_signal);  // every parameter group participates
  }
}

TEST_CASE("zero MAP weight leaves decoder gradients exactly zero") {
  Rng rng(7);
  PedpModel model = PedpModel::create(tiny_config(), rng);
  TurnSample sample = tiny_sample(rng, 8, {1, 2});
  model.params().zero_grad();
  ad::Tape tape;
  Rng r(8);
  TotalLoss loss = total_loss(tape, model, sample, LossWeights{1, 1, 1, 0}, r);
  tape.backward(loss.node);
  for (ad::Param* p : model.params().group(PedpParameters::Group::decoder)) {
    CHECK(p->grad.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("empty macro contributes through MAP only") {
  Rng rng(9);
  PedpModel model = PedpModel::create(tiny_config(), rng);
  TurnSample sample = tiny_sample(rng, 8, {});
  ad::Tape tape;
  Rng r(10);
  TotalLoss loss = total_loss(tape, model, sample, LossWeights{}, r);
  CHECK(loss.breakdown.dap == 0.0);
  CHECK(loss.breakdown.sfp == 0.0);
  CHECK(loss.breakdown.sr == 0.0);
  CHECK(loss.breakdown.map > 0.0);
}

TEST_CASE("default N_max rule") {
  DomainSchema schema = DomainSchema::toy_default();
  Rng rng(11);
  Corpus corpus = generate_corpus(schema, 40, true, rng);
  int max_card = 0;
  for (const auto& t : corpus.turns) max_card = std::max(max_card, t.macro.size());
  CHECK(default_n_max(corpus) == std::max(10, max_card + 2));
}

TEST_CASE("fit overfits a small synthetic corpus") {
  DomainSchema schema = DomainSchema::toy_default();
  Rng gen_rng(12);
  Corpus corpus = generate_corpus(schema, 8, true, gen_rng);
  REQUIRE(corpus.turns.size() >= 15);

  PedpConfig cfg;
  cfg.S = corpus.state_width();
  cfg.M = corpus.action_count();
  cfg.H = 32;
  cfg.E = 16;
  cfg.K = 2;
  cfg.N_max = 10;
  cfg.decoder_hidden = 16;
  Rng init(13);
  PedpModel model = PedpModel::create(cfg, init);

  FitSettings settings;
  settings.epochs = 150;
  settings.seed = 13;
  FitResult result = fit(model, corpus, settings);
  REQUIRE_FALSE(result.log.empty());

  // Threshold-mode F1 on the training turns themselves.
  PedpModel best(cfg, result.best_params);
  std::vector<MacroAction> preds, golds;
  Rng eval_rng(14);
  for (const auto& turn : corpus.turns) {
    preds.push_back(best.predict_macro(to_vector(turn.state), eval_rng, PredictMode::threshold).macro);
    golds.push_back(turn.macro);
  }
  StandardReport report = standard_metrics(preds, golds);
  CHECK(report.f1 >= 0.9);

  // Loss trends downward: compare 10-epoch window means early vs late.
  double early = 0.0, late = 0.0;
  for (int e = 0; e < 10; ++e) early += result.log[static_cast<size_t>(e)].loss_total;
  for (size_t e = result.log.size() - 10; e < result.log.size(); ++e) {
    late += result.log[e].loss_total;
  }
  CHECK(late < early);
}

TEST_CASE("fit is deterministic under a fixed seed") {
  DomainSchema schema = DomainSchema::toy_default();
  Rng gen_rng(15);
  Corpus corpus = generate_corpus(schema, 5, true, gen_rng);

  auto run = [&] {
    PedpConfig cfg;
    cfg.S = corpus.state_width();
    cfg.M = corpus.action_count();
    cfg.H = 16;
    cfg.E = 8;
    cfg.K = 2;
    cfg.N_max = 6;
    cfg.decoder_hidden = 8;
    Rng init(21);
    PedpModel model = PedpModel::create(cfg, init);
    FitSettings settings;
    settings.epochs = 5;
    settings.seed = 21;
    return fit(model, corpus, settings).log.back().loss_total;
  };
  CHECK(run() == run());
}

TEST_CASE("training log serializes one record per epoch") {
  std::vector<EpochRecord> log(3);
  for (int i = 0; i < 3; ++i) {
    log[static_cast<size_t>(i)].epoch = i;
    log[static_cast<size_t>(i)].loss_total = 1.0 / (i + 1);
  }
  auto path = (std::filesystem::temp_directory_path() / "pedp_log_test.jsonl").string();
  write_training_log(log, path);
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    CHECK(line.find("\"epoch\"") != std::string::npos);
    CHECK(line.find("\"loss_dap\"") != std::string::npos);
    CHECK(line.find("\"seconds\"") != std::string::npos);
    ++lines;
  }
  CHECK(lines == 3);
}
