#include "pedp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pedp/errors.hpp"

namespace pedp {

StandardReport standard_metrics(const std::vector<MacroAction>& predictions,
                                const std::vector<MacroAction>& golds) {
  if (predictions.size() != golds.size()) {
    throw ValidationError("standard_metrics: " + std::to_string(predictions.size()) +
                          " predictions vs " + std::to_string(golds.size()) + " golds");
  }
  if (predictions.empty()) throw ValidationError("standard_metrics: no samples");

  StandardReport report;
  report.n_samples = static_cast<int>(predictions.size());
  double sum_p = 0.0, sum_r = 0.0, sum_f = 0.0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    const auto& pred = predictions[i].members;
    const auto& gold = golds[i].members;
    std::vector<int> tp_set;
    std::set_intersection(pred.begin(), pred.end(), gold.begin(), gold.end(),
                          std::back_inserter(tp_set));
    double tp = static_cast<double>(tp_set.size());
    double p, r;
    if (pred.empty()) {
      p = gold.empty() ? 1.0 : 0.0;
    } else {
      p = tp / static_cast<double>(pred.size());
    }
    r = gold.empty() ? 1.0 : tp / static_cast<double>(gold.size());
    double f = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    report.per_sample.push_back({p, r, f});
    sum_p += p;
    sum_r += r;
    sum_f += f;
  }
  double n = static_cast<double>(report.n_samples);
  report.precision = sum_p / n;
  report.recall = sum_r / n;
  report.f1 = sum_f / n;
  return report;
}

InteractiveReport interactive_metrics(const std::vector<EpisodeOutcome>& episodes) {
  if (episodes.empty()) throw ValidationError("interactive_metrics: no episodes");
  InteractiveReport report;
  report.n_episodes = static_cast<int>(episodes.size());
  double sum_f1 = 0.0, sum_recall = 0.0, sum_match = 0.0, sum_turns = 0.0, sum_success = 0.0;
  for (const auto& ep : episodes) {
    double recall = ep.requested == 0
                        ? 1.0
                        : static_cast<double>(ep.provided_requested) / ep.requested;
    double precision;
    if (ep.provided_total == 0) {
      precision = ep.requested == 0 ? 1.0 : 0.0;
    } else {
      precision = static_cast<double>(ep.provided_requested) / ep.provided_total;
    }
    double f1 = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    bool success = recall >= 1.0 && ep.match;
    report.per_episode_success.push_back(success);
    sum_f1 += f1;
    sum_recall += recall;
    sum_match += ep.match ? 1.0 : 0.0;
    sum_turns += ep.turns;
    sum_success += success ? 1.0 : 0.0;
  }
  double n = static_cast<double>(report.n_episodes);
  report.inform_f1 = sum_f1 / n;
  report.inform_recall = sum_recall / n;
  report.match_rate = sum_match / n;
  report.avg_turns = sum_turns / n;
  report.success_rate = sum_success / n;
  return report;
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

RunComparison compare_runs(const std::vector<std::pair<std::string, std::vector<double>>>& run_a,
                           const std::vector<std::pair<std::string, std::vector<double>>>& run_b) {
  if (run_a.size() != run_b.size()) {
    throw ValidationError("compare_runs: metric sets differ in size");
  }
  RunComparison cmp;
  for (size_t i = 0; i < run_a.size(); ++i) {
    if (run_a[i].first != run_b[i].first) {
      throw ValidationError("compare_runs: metric mismatch \"" + run_a[i].first + "\" vs \"" +
                            run_b[i].first + "\"");
    }
    RunComparison::Row row;
    row.metric = run_a[i].first;
    row.mean_a = mean_of(run_a[i].second);
    row.std_a = sample_std(run_a[i].second);
    row.mean_b = mean_of(run_b[i].second);
    row.std_b = sample_std(run_b[i].second);
    row.delta = row.mean_a - row.mean_b;
    cmp.rows.push_back(row);
  }
  return cmp;
}

std::string RunComparison::to_table() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-16s %12s %10s %12s %10s %10s\n", "metric", "mean_a",
                "std_a", "mean_b", "std_b", "delta");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-16s %12.4f %10.4f %12.4f %10.4f %+10.4f\n",
                  r.metric.c_str(), r.mean_a, r.std_a, r.mean_b, r.std_b, r.delta);
    out << line;
  }
  return out.str();
}

}  // namespace pedp
