// pedp: data generation, training, evaluation, ablations, and transcript
// export for the planning-enhanced dialog policy.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "pedp/baselines.hpp"
#include "pedp/checkpoint.hpp"
#include "pedp/corpus.hpp"
#include "pedp/digest.hpp"
#include "pedp/errors.hpp"
#include "pedp/metrics.hpp"
#include "pedp/model.hpp"
#include "pedp/simulator.hpp"
#include "pedp/training.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace pedp;

namespace {

std::vector<std::uint64_t> resolve_seeds(std::vector<std::uint64_t> seeds) {
  if (!seeds.empty()) return seeds;
  if (const char* env = std::getenv("PEDP_SEED")) {
    return {static_cast<std::uint64_t>(std::strtoull(env, nullptr, 10))};
  }
  return {0};
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write \"" + path + "\"");
  out << j.dump(2) << "\n";
}

// Effective configuration sits next to every output; its digest is embedded
// in each artifact.
std::string write_run_config(json effective, const fs::path& out_dir) {
  std::string digest = digest_string(effective.dump());
  effective["config_digest"] = digest;
  write_json(effective, (out_dir / "run_config.json").string());
  return digest;
}

struct PredictFlags {
  bool no_sample = false;
  bool no_ensemble = false;
  bool no_planning = false;
  bool paper_literal_gs = false;
  int k_paths = -1;
  std::string decode = "greedy";  // seq baseline decode mode
  int beam_width = 4;
};

// Loads any checkpoint kind and wraps it as a state-vector policy.
struct LoadedPolicy {
  Policy policy;
  CheckpointKind kind = CheckpointKind::pedp;
};

LoadedPolicy make_policy(const std::string& checkpoint_path, const std::string& vocab_digest,
                         const PredictFlags& flags) {
  LoadedPolicy out;
  CheckpointKind kind = peek_checkpoint_kind(checkpoint_path);
  out.kind = kind;
  PredictMode mode = flags.no_sample ? PredictMode::threshold : PredictMode::sample;
  if (kind == CheckpointKind::pedp || kind == CheckpointKind::multidense) {
    auto model = std::make_shared<PedpModel>(load_pedp_model(checkpoint_path, vocab_digest));
    if (flags.paper_literal_gs) {
      PedpConfig cfg = model->config();
      cfg.logit_domain_sampling = false;
      model = std::make_shared<PedpModel>(cfg, model->params());
    }
    bool planning = kind == CheckpointKind::pedp && !flags.no_planning;
    bool ensemble = !flags.no_ensemble;
    int k = flags.k_paths;
    out.policy = [model, mode, planning, ensemble, k](const Eigen::VectorXd& s, Rng& rng) {
      return model->predict_macro(s, rng, mode, k, ensemble, planning).macro;
    };
  } else if (kind == CheckpointKind::multiclass) {
    auto model = std::make_shared<DiaMultiClass>(load_multiclass(checkpoint_path, vocab_digest));
    out.policy = [model, mode](const Eigen::VectorXd& s, Rng& rng) {
      return model->predict(s, rng, mode);
    };
  } else {
    auto model = std::make_shared<DiaSeq>(load_seq(checkpoint_path, vocab_digest));
    SeqDecodeMode decode = flags.decode == "beam"     ? SeqDecodeMode::beam
                           : flags.decode == "sample" ? SeqDecodeMode::sample
                                                      : SeqDecodeMode::greedy;
    out.policy = [model, decode](const Eigen::VectorXd& s, Rng& rng) {
      return model->predict(s, rng, decode);
    };
  }
  return out;
}

int cmd_gen_data(const std::string& schema_path, const std::string& out_dir, int n_dialogs,
                 std::vector<std::uint64_t> seeds, bool single_action, int max_turns) {
  seeds = resolve_seeds(std::move(seeds));
  fs::create_directories(out_dir);
  DomainSchema schema =
      schema_path.empty() ? DomainSchema::toy_default() : DomainSchema::load(schema_path);
  fs::path dir(out_dir);
  schema.save((dir / "schema.json").string());

  json effective;
  effective["command"] = "gen-data";
  effective["n_dialogs"] = n_dialogs;
  effective["seed"] = seeds[0];
  effective["single_action"] = single_action;
  effective["max_turns"] = max_turns;
  effective["schema"] = schema_path.empty() ? "<toy_default>" : schema_path;
  std::string digest = write_run_config(effective, dir);

  Rng rng(seeds[0]);
  Corpus corpus = generate_corpus(schema, n_dialogs, !single_action, rng, true, max_turns);
  save_corpus(corpus, (dir / "corpus.jsonl").string());

  json manifest;
  manifest["config_digest"] = digest;
  manifest["n_dialogs"] = n_dialogs;
  manifest["n_turns"] = corpus.turns.size();
  manifest["vocab_digest"] = corpus.vocab.digest();
  manifest["state_width"] = corpus.layout.width();
  manifest["action_count"] = corpus.vocab.size();
  write_json(manifest, (dir / "manifest.json").string());
  std::cout << "wrote " << corpus.turns.size() << " turns over " << n_dialogs << " dialogs to "
            << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& corpus_path, const std::string& out_dir,
              std::vector<std::uint64_t> seeds, int epochs, int k_paths, int n_max,
              const std::string& baseline, const PredictFlags& flags, int hidden, int embed,
              double lr, int batch_size, LossWeights weights) {
  seeds = resolve_seeds(std::move(seeds));
  Corpus corpus = load_corpus(corpus_path);
  if (corpus.turns.empty()) throw ValidationError("training corpus is empty");
  fs::path dir(out_dir);
  fs::create_directories(dir);

  json effective;
  effective["command"] = "train";
  effective["corpus"] = corpus_path;
  effective["baseline"] = baseline.empty() ? "pedp" : baseline;
  effective["epochs"] = epochs;
  effective["k_paths"] = k_paths;
  effective["n_max"] = n_max;
  effective["no_planning"] = flags.no_planning;
  effective["paper_literal_gs"] = flags.paper_literal_gs;
  effective["hidden"] = hidden;
  effective["embed"] = embed;
  effective["lr"] = lr;
  effective["batch_size"] = batch_size;
  effective["weights"] = {weights.w_dap, weights.w_sfp, weights.w_sr, weights.w_map};
  effective["seeds"] = seeds;
  std::string digest = write_run_config(effective, dir);

  for (std::uint64_t seed : seeds) {
    FitSettings settings;
    settings.epochs = epochs;
    settings.optim.lr = lr;
    settings.optim.batch_size = batch_size;
    settings.weights = weights;
    settings.seed = seed;

    std::string ckpt_path = (dir / ("model_seed" + std::to_string(seed) + ".ckpt")).string();
    std::string log_path = (dir / ("train_seed" + std::to_string(seed) + ".jsonl")).string();

    if (baseline == "multiclass") {
      BaselineConfig cfg;
      cfg.kind = BaselineKind::multiclass;
      cfg.S = corpus.state_width();
      cfg.M = corpus.action_count();
      cfg.H = hidden;
      Rng rng(seed);
      DiaMultiClass model = DiaMultiClass::create(cfg, rng);
      auto fit = model.fit(corpus, settings);
      model.params() = fit.best_params;
      save_multiclass(ckpt_path, model, corpus.vocab.digest(), digest);
      write_training_log(fit.log, log_path);
      std::cout << "seed " << seed << ": best val F1 " << fit.best_val_f1 << " at epoch "
                << fit.best_epoch << "\n";
    } else if (baseline == "seq") {
      BaselineConfig cfg;
      cfg.kind = BaselineKind::seq;
      cfg.S = corpus.state_width();
      cfg.M = corpus.action_count();
      cfg.H = hidden;
      cfg.E = embed;
      cfg.beam_width = flags.beam_width;
      cfg.decode_cap = n_max > 0 ? n_max : default_n_max(corpus);
      Rng rng(seed);
      DiaSeq model = DiaSeq::create(cfg, rng);
      auto fit = model.fit(corpus, settings);
      model.params() = fit.best_params;
      save_seq(ckpt_path, model, corpus.vocab.digest(), digest);
      write_training_log(fit.log, log_path);
      std::cout << "seed " << seed << ": best val F1 " << fit.best_val_f1 << " at epoch "
                << fit.best_epoch << "\n";
    } else {
      // pedp (default) or the multidense baseline, which is pedp without
      // planning by construction.
      bool planning = baseline != "multidense" && !flags.no_planning;
      PedpConfig cfg;
      cfg.S = corpus.state_width();
      cfg.M = corpus.action_count();
      cfg.H = hidden;
      cfg.E = embed;
      cfg.K = k_paths;
      cfg.N_max = n_max > 0 ? n_max : default_n_max(corpus);
      cfg.logit_domain_sampling = !flags.paper_literal_gs;
      Rng rng(seed);
      PedpModel model = PedpModel::create(cfg, rng);
      settings.planning = planning;
      if (!planning) settings.weights = LossWeights{0.0, 0.0, 0.0, 1.0};
      FitResult fit = pedp::fit(model, corpus, settings);
      PedpModel best(cfg, fit.best_params);
      save_pedp_model(ckpt_path, best,
                      planning ? CheckpointKind::pedp : CheckpointKind::multidense,
                      corpus.vocab.digest(), digest);
      write_training_log(fit.log, log_path);
      std::cout << "seed " << seed << ": best val F1 " << fit.best_val_f1 << " at epoch "
                << fit.best_epoch << "\n";
    }
  }
  return 0;
}

int cmd_eval_standard(const std::string& checkpoint_path, const std::string& corpus_path,
                      const std::string& out_path, std::vector<std::uint64_t> seeds,
                      const PredictFlags& flags) {
  seeds = resolve_seeds(std::move(seeds));
  Corpus corpus = load_corpus(corpus_path);
  if (corpus.turns.empty()) throw ValidationError("evaluation corpus is empty");
  LoadedPolicy loaded = make_policy(checkpoint_path, corpus.vocab.digest(), flags);

  json effective;
  effective["command"] = "eval-standard";
  effective["checkpoint"] = checkpoint_path;
  effective["corpus"] = corpus_path;
  effective["no_sample"] = flags.no_sample;
  effective["no_ensemble"] = flags.no_ensemble;
  effective["seeds"] = seeds;
  std::string digest = digest_string(effective.dump());

  json per_seed = json::array();
  std::vector<double> f1s, ps, rs;
  for (std::uint64_t seed : seeds) {
    Rng rng(seed);
    std::vector<MacroAction> preds, golds;
    for (const auto& turn : corpus.turns) {
      preds.push_back(loaded.policy(to_vector(turn.state), rng));
      golds.push_back(turn.macro);
    }
    StandardReport report = standard_metrics(preds, golds);
    per_seed.push_back({{"seed", seed},
                        {"precision", report.precision},
                        {"recall", report.recall},
                        {"f1", report.f1},
                        {"n_samples", report.n_samples}});
    f1s.push_back(report.f1);
    ps.push_back(report.precision);
    rs.push_back(report.recall);
  }

  json out;
  out["config_digest"] = digest;
  out["kind"] = kind_name(loaded.kind);
  out["per_seed"] = per_seed;
  out["mean"] = {{"precision", mean_of(ps)}, {"recall", mean_of(rs)}, {"f1", mean_of(f1s)}};
  out["std"] = {{"precision", sample_std(ps)}, {"recall", sample_std(rs)}, {"f1", sample_std(f1s)}};
  if (!out_path.empty()) write_json(out, out_path);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_eval_interactive(const std::string& checkpoint_path, const std::string& schema_path,
                         const std::string& out_path, int episodes, int max_turns,
                         std::vector<std::uint64_t> seeds, bool expert,
                         const PredictFlags& flags) {
  seeds = resolve_seeds(std::move(seeds));
  DomainSchema schema =
      schema_path.empty() ? DomainSchema::toy_default() : DomainSchema::load(schema_path);
  std::string vocab_digest = schema.system_vocab().digest();

  LoadedPolicy loaded;
  if (!expert) loaded = make_policy(checkpoint_path, vocab_digest, flags);

  json effective;
  effective["command"] = "eval-interactive";
  effective["checkpoint"] = expert ? "<expert>" : checkpoint_path;
  effective["episodes"] = episodes;
  effective["max_turns"] = max_turns;
  effective["no_sample"] = flags.no_sample;
  effective["no_ensemble"] = flags.no_ensemble;
  effective["seeds"] = seeds;
  std::string digest = digest_string(effective.dump());

  json per_seed = json::array();
  std::vector<double> success, inform_f1, inform_recall, match, turns;
  for (std::uint64_t seed : seeds) {
    Rng rng(seed);
    std::vector<EpisodeOutcome> outcomes;
    for (int e = 0; e < episodes; ++e) {
      UserGoal goal = sample_goal(schema, rng);
      EpisodeLog log = expert
                           ? run_expert_episode(schema, goal, max_turns, rng)
                           : run_episode(schema, goal, loaded.policy, max_turns, rng);
      outcomes.push_back(log.outcome());
    }
    InteractiveReport report = interactive_metrics(outcomes);
    per_seed.push_back({{"seed", seed},
                        {"inform_f1", report.inform_f1},
                        {"inform_recall", report.inform_recall},
                        {"match", report.match_rate},
                        {"turns", report.avg_turns},
                        {"success", report.success_rate},
                        {"n_episodes", report.n_episodes}});
    success.push_back(report.success_rate);
    inform_f1.push_back(report.inform_f1);
    inform_recall.push_back(report.inform_recall);
    match.push_back(report.match_rate);
    turns.push_back(report.avg_turns);
  }

  json out;
  out["config_digest"] = digest;
  out["kind"] = expert ? "expert" : kind_name(loaded.kind);
  out["per_seed"] = per_seed;
  out["mean"] = {{"inform_f1", mean_of(inform_f1)},
                 {"inform_recall", mean_of(inform_recall)},
                 {"match", mean_of(match)},
                 {"turns", mean_of(turns)},
                 {"success", mean_of(success)}};
  out["std"] = {{"inform_f1", sample_std(inform_f1)},
                {"inform_recall", sample_std(inform_recall)},
                {"match", sample_std(match)},
                {"turns", sample_std(turns)},
                {"success", sample_std(success)}};
  if (!out_path.empty()) write_json(out, out_path);
  std::cout << out.dump(2) << "\n";
  return 0;
}

void write_transcript(const EpisodeLog& log, const ActionVocab& sys_vocab,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write transcript \"" + path + "\"");
  out << "goal:\n";
  for (const auto& dg : log.goal.domains) {
    out << "  domain " << dg.domain << "\n";
    for (const auto& [slot, value] : dg.constraints) {
      out << "    constraint " << slot << " = " << value << "\n";
    }
    for (const auto& r : dg.requests) out << "    request " << r << "\n";
    out << "    book: " << (dg.book ? "yes" : "no") << "\n";
  }
  out << "\n";
  for (size_t t = 0; t < log.turns.size(); ++t) {
    const auto& turn = log.turns[t];
    out << "turn " << t << "\n";
    out << "  USER:  ";
    for (size_t i = 0; i < turn.user_acts.size(); ++i) {
      out << (i ? ", " : "") << turn.user_acts[i];
    }
    out << "\n  SYSTEM: ";
    for (size_t i = 0; i < turn.system_macro.members.size(); ++i) {
      out << (i ? ", " : "") << sys_vocab.at(turn.system_macro.members[i]).str();
    }
    out << "\n";
  }
  out << "\nturns: " << log.turn_count << "\n";
  out << "match: " << (log.match ? "yes" : "no") << "\n";
}

int cmd_dump_dialogs(const std::string& ckpt_a, const std::string& ckpt_b,
                     const std::string& schema_path, const std::string& out_dir, int n_goals,
                     int max_turns, std::vector<std::uint64_t> seeds, const PredictFlags& flags) {
  seeds = resolve_seeds(std::move(seeds));
  DomainSchema schema =
      schema_path.empty() ? DomainSchema::toy_default() : DomainSchema::load(schema_path);
  std::string vocab_digest = schema.system_vocab().digest();
  ActionVocab sys_vocab = schema.system_vocab();
  LoadedPolicy a = make_policy(ckpt_a, vocab_digest, flags);
  LoadedPolicy b = make_policy(ckpt_b, vocab_digest, flags);

  fs::path dir(out_dir);
  fs::create_directories(dir);
  json effective;
  effective["command"] = "dump-dialogs";
  effective["checkpoint_a"] = ckpt_a;
  effective["checkpoint_b"] = ckpt_b;
  effective["n_goals"] = n_goals;
  effective["seed"] = seeds[0];
  write_run_config(effective, dir);

  Rng goal_rng(seeds[0]);
  for (int g = 0; g < n_goals; ++g) {
    UserGoal goal = sample_goal(schema, goal_rng);
    char name[32];
    std::snprintf(name, sizeof(name), "goal_%03d", g);
    Rng rng_a(seeds[0] ^ (0xa5a5ull + static_cast<std::uint64_t>(g)));
    Rng rng_b(seeds[0] ^ (0xb6b6ull + static_cast<std::uint64_t>(g)));
    EpisodeLog log_a = run_episode(schema, goal, a.policy, max_turns, rng_a);
    EpisodeLog log_b = run_episode(schema, goal, b.policy, max_turns, rng_b);
    write_transcript(log_a, sys_vocab, (dir / (std::string(name) + "_a.txt")).string());
    write_transcript(log_b, sys_vocab, (dir / (std::string(name) + "_b.txt")).string());
  }
  std::cout << "wrote " << n_goals << " paired transcripts to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planning-enhanced multi-action dialog policy"};
  app.require_subcommand(1);

  std::vector<std::uint64_t> seeds;
  std::string schema_path, corpus_path, checkpoint_path, out_path;
  std::string checkpoint_a, checkpoint_b;
  std::string baseline;
  PredictFlags flags;
  int n_dialogs = 200, epochs = 100, k_paths = 3, n_max = -1;
  int episodes = 500, max_turns = 20, n_goals = 100;
  int hidden = 64, embed = 32, batch_size = 32;
  double lr = 1e-3;
  LossWeights weights;
  bool single_action = false, expert = false;

  auto add_predict_flags = [&flags](CLI::App* cmd) {
    cmd->add_flag("--no-planning", flags.no_planning, "decode (h0, h0); the -planning ablation");
    cmd->add_flag("--no-ensemble", flags.no_ensemble, "plan a single path; the -ensemble ablation");
    cmd->add_flag("--no-sample", flags.no_sample, "threshold at 0.5; the -sample ablation");
    cmd->add_flag("--paper-literal-gs", flags.paper_literal_gs,
                  "Gumbel-Sigmoid over probabilities instead of their logits");
    cmd->add_option("--k-paths", flags.k_paths, "override planned path count");
    cmd->add_option("--decode", flags.decode, "seq decode mode: greedy|sample|beam")
        ->check(CLI::IsMember({"greedy", "sample", "beam"}));
    cmd->add_option("--beam-width", flags.beam_width, "seq beam width");
  };

  CLI::App* gen = app.add_subcommand("gen-data", "generate a toy corpus from the scripted expert");
  gen->add_option("--schema", schema_path, "domain schema JSON (default: built-in toy)");
  gen->add_option("--out", out_path, "output directory")->required();
  gen->add_option("--n-dialogs", n_dialogs, "dialogs to simulate");
  gen->add_option("--seed", seeds, "RNG seed (repeatable; PEDP_SEED fallback)");
  gen->add_option("--max-turns", max_turns, "per-dialog system turn cap");
  gen->add_flag("--single-action", single_action, "emit one act per row (fragment corpus)");

  CLI::App* train = app.add_subcommand("train", "train PEDP or a baseline");
  train->add_option("--corpus", corpus_path, "training corpus JSONL")->required();
  train->add_option("--out", out_path, "output directory")->required();
  train->add_option("--seed", seeds, "training seed (repeatable)");
  train->add_option("--epochs", epochs, "training epochs");
  train->add_option("--k-paths", k_paths, "planned paths K");
  train->add_option("--n-max", n_max, "planning-horizon cap (default: max |macro|+2, floor 10)");
  train->add_option("--baseline", baseline, "train a baseline instead of PEDP")
      ->check(CLI::IsMember({"multiclass", "multidense", "seq"}));
  train->add_flag("--no-planning", flags.no_planning, "train the -planning ablation");
  train->add_flag("--paper-literal-gs", flags.paper_literal_gs,
                  "Gumbel-Sigmoid over probabilities instead of their logits");
  train->add_option("--hidden", hidden, "hidden width H");
  train->add_option("--embed", embed, "action-embedding width E");
  train->add_option("--lr", lr, "learning rate");
  train->add_option("--batch-size", batch_size, "minibatch size");
  train->add_option("--beam-width", flags.beam_width, "seq beam width");
  train->add_option("--w-dap", weights.w_dap, "DAP loss weight");
  train->add_option("--w-sfp", weights.w_sfp, "SFP loss weight");
  train->add_option("--w-sr", weights.w_sr, "SR loss weight");
  train->add_option("--w-map", weights.w_map, "MAP loss weight");

  CLI::App* eval_std = app.add_subcommand("eval-standard", "corpus precision/recall/F1");
  eval_std->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  eval_std->add_option("--corpus", corpus_path, "evaluation corpus JSONL")->required();
  eval_std->add_option("--out", out_path, "report JSON path");
  eval_std->add_option("--seed", seeds, "sampling seed (repeatable)");
  add_predict_flags(eval_std);

  CLI::App* eval_int = app.add_subcommand("eval-interactive", "simulated dialog evaluation");
  eval_int->add_option("--checkpoint", checkpoint_path, "model checkpoint");
  eval_int->add_option("--schema", schema_path, "domain schema JSON (default: built-in toy)");
  eval_int->add_option("--out", out_path, "report JSON path");
  eval_int->add_option("--episodes", episodes, "episodes per seed");
  eval_int->add_option("--max-turns", max_turns, "system turn cap per episode");
  eval_int->add_option("--seed", seeds, "evaluation seed (repeatable)");
  eval_int->add_flag("--expert", expert, "evaluate the scripted expert instead of a checkpoint");
  add_predict_flags(eval_int);

  CLI::App* dump = app.add_subcommand("dump-dialogs", "paired human-readable transcripts");
  dump->add_option("--checkpoint-a", checkpoint_a, "first model")->required();
  dump->add_option("--checkpoint-b", checkpoint_b, "second model")->required();
  dump->add_option("--schema", schema_path, "domain schema JSON (default: built-in toy)");
  dump->add_option("--out", out_path, "output directory")->required();
  dump->add_option("--n-goals", n_goals, "paired goals to sample");
  dump->add_option("--max-turns", max_turns, "system turn cap per episode");
  dump->add_option("--seed", seeds, "goal sampling seed");
  add_predict_flags(dump);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      return cmd_gen_data(schema_path, out_path, n_dialogs, seeds, single_action, max_turns);
    }
    if (train->parsed()) {
      return cmd_train(corpus_path, out_path, seeds, epochs, k_paths, n_max, baseline, flags,
                       hidden, embed, lr, batch_size, weights);
    }
    if (eval_std->parsed()) {
      return cmd_eval_standard(checkpoint_path, corpus_path, out_path, seeds, flags);
    }
    if (eval_int->parsed()) {
      if (!expert && checkpoint_path.empty()) {
        std::cerr << "error: --checkpoint or --expert required\n";
        return 1;
      }
      return cmd_eval_interactive(checkpoint_path, schema_path, out_path, episodes, max_turns,
                                  seeds, expert, flags);
    }
    if (dump->parsed()) {
      return cmd_dump_dialogs(checkpoint_a, checkpoint_b, schema_path, out_path, n_goals,
                              max_turns, seeds, flags);
    }
  } catch (const TrainingDivergence& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
