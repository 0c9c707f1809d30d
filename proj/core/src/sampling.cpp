#include "pedp/sampling.hpp"

#include <cmath>

#include "pedp/errors.hpp"

namespace pedp {

void GumbelConfig::validate() const {
  if (tau_d <= 0.0 || tau_s <= 0.0 || tau_out <= 0.0) {
    throw ValidationError("Gumbel temperatures must be strictly positive");
  }
}

namespace {
constexpr double kUniformEps = 1e-10;
}

double gumbel_noise_scalar(Rng& rng) {
  double u = rng.uniform();
  if (u < kUniformEps) u = kUniformEps;
  if (u > 1.0 - kUniformEps) u = 1.0 - kUniformEps;
  return -std::log(-std::log(u));
}

Eigen::VectorXd gumbel_noise(int n, Rng& rng) {
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g[i] = gumbel_noise_scalar(rng);
  return g;
}

Eigen::VectorXd softmax_stable(const Eigen::VectorXd& logits) {
  Eigen::VectorXd shifted = logits.array() - logits.maxCoeff();
  Eigen::VectorXd e = shifted.array().exp();
  return e / e.sum();
}

SoftmaxSample gumbel_softmax(const Eigen::VectorXd& logits, double tau, Rng& rng) {
  if (logits.size() < 2) throw ValidationError("gumbel_softmax needs at least two classes");
  if (!logits.allFinite()) throw ValidationError("gumbel_softmax logits must be finite");
  if (tau <= 0.0) throw ValidationError("gumbel_softmax temperature must be positive");

  Eigen::VectorXd perturbed = logits + gumbel_noise(static_cast<int>(logits.size()), rng);
  SoftmaxSample s;
  perturbed.maxCoeff(&s.index);
  s.soft = softmax_stable(perturbed / tau);
  return s;
}

Eigen::VectorXd gumbel_sigmoid_with_noise(const Eigen::VectorXd& values,
                                          const Eigen::VectorXd& g1,
                                          const Eigen::VectorXd& g2, double tau) {
  // Two-logit softmax over ((v+g1)/tau, g2/tau); subtracting the max exponent
  // keeps both exponentials bounded.
  Eigen::VectorXd out(values.size());
  for (int i = 0; i < values.size(); ++i) {
    double a = (values[i] + g1[i]) / tau;
    double b = g2[i] / tau;
    double m = std::max(a, b);
    double ea = std::exp(a - m);
    double eb = std::exp(b - m);
    out[i] = ea / (ea + eb);
  }
  return out;
}

Eigen::VectorXd gumbel_sigmoid(const Eigen::VectorXd& values, double tau, Rng& rng) {
  if (tau <= 0.0) throw ValidationError("gumbel_sigmoid temperature must be positive");
  int n = static_cast<int>(values.size());
  // g1, g2 are fresh per element; draw pairwise so per-element streams are
  // stable regardless of vector width changes upstream.
  Eigen::VectorXd g1(n), g2(n);
  for (int i = 0; i < n; ++i) {
    g1[i] = gumbel_noise_scalar(rng);
    g2[i] = gumbel_noise_scalar(rng);
  }
  return gumbel_sigmoid_with_noise(values, g1, g2, tau);
}

Eigen::VectorXd hard_binarize(const Eigen::VectorXd& probs) {
  Eigen::VectorXd out(probs.size());
  for (int i = 0; i < probs.size(); ++i) out[i] = probs[i] > 0.5 ? 1.0 : 0.0;
  return out;
}

}  // namespace pedp
