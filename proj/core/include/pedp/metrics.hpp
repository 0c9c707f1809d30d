#pragma once

#include <string>
#include <vector>

#include "pedp/actions.hpp"

namespace pedp {

// Sample-wise precision/recall/F1 over macro-actions.
struct StandardReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int n_samples = 0;

  struct PerSample {
    double precision;
    double recall;
    double f1;
  };
  std::vector<PerSample> per_sample;
};

// Per sample: tp = |pred n gold|; precision = tp/|pred| with the empty-set
// conventions (1 when both empty, 0 when pred empty but gold nonempty);
// recall = tp/|gold| (1 when gold empty); f1 = 2pr/(p+r), 0 when p+r = 0.
// Report values are means of the per-sample values.
StandardReport standard_metrics(const std::vector<MacroAction>& predictions,
                                const std::vector<MacroAction>& golds);

// Flags extracted from one simulated dialog, already reduced to what the
// interactive metrics need.
struct EpisodeOutcome {
  int requested = 0;         // goal-requested slots
  int provided_requested = 0;  // |provided n requested|
  int provided_total = 0;    // everything the system informed
  bool match = false;        // booked/offered entities satisfy the goal (vacuous true)
  int turns = 0;
};

struct InteractiveReport {
  double inform_f1 = 0.0;
  double inform_recall = 0.0;
  double match_rate = 0.0;
  double avg_turns = 0.0;
  double success_rate = 0.0;
  int n_episodes = 0;
  std::vector<bool> per_episode_success;
};

// Success = (inform recall == 1) and (match == 1), per episode.
InteractiveReport interactive_metrics(const std::vector<EpisodeOutcome>& episodes);

// Mean / sample standard deviation (n-1) / delta per metric across seeds.
struct RunComparison {
  struct Row {
    std::string metric;
    double mean_a = 0.0, std_a = 0.0;
    double mean_b = 0.0, std_b = 0.0;
    double delta = 0.0;  // mean_a - mean_b
  };
  std::vector<Row> rows;

  std::string to_table() const;  // aligned plain text
};

// One map per run: metric name -> per-seed values. Both runs must carry the
// same metric set.
RunComparison compare_runs(const std::vector<std::pair<std::string, std::vector<double>>>& run_a,
                           const std::vector<std::pair<std::string, std::vector<double>>>& run_b);

double mean_of(const std::vector<double>& xs);
double sample_std(const std::vector<double>& xs);

}  // namespace pedp
