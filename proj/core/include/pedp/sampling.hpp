#pragma once

#include <Eigen/Core>

#include "pedp/rng.hpp"

namespace pedp {

// Temperatures for the three sampling sites: the discrete policy (tau_d), the
// stop predictor (tau_s), and the output macro-action sampler (tau_out).
// hard=true selects straight-through forwarding of the discrete sample.
struct GumbelConfig {
  double tau_d = 1.0;
  double tau_s = 1.0;
  double tau_out = 1.0;
  bool hard = true;

  void validate() const;
};

// i.i.d. Gumbel(0,1) noise: g = -log(-log u), with u clamped away from
// {0, 1} by 1e-10.
Eigen::VectorXd gumbel_noise(int n, Rng& rng);
double gumbel_noise_scalar(Rng& rng);

struct SoftmaxSample {
  Eigen::VectorXd soft;  // softmax((logits + g)/tau), sums to 1
  int index = -1;        // argmax(logits + g)
};

// Tempered Gumbel-Softmax draw. Throws ValidationError on non-finite logits
// or fewer than two classes.
SoftmaxSample gumbel_softmax(const Eigen::VectorXd& logits, double tau, Rng& rng);

// Deterministic core used by both the sampler and the model's tape ops.
Eigen::VectorXd softmax_stable(const Eigen::VectorXd& logits);

// Binary analogue: sigmoid treated as a two-logit softmax with independent
// Gumbel noise g1, g2 on each logit. Computed in max-subtracted form.
Eigen::VectorXd gumbel_sigmoid(const Eigen::VectorXd& values, double tau, Rng& rng);
Eigen::VectorXd gumbel_sigmoid_with_noise(const Eigen::VectorXd& values,
                                          const Eigen::VectorXd& g1,
                                          const Eigen::VectorXd& g2, double tau);

// out[i] = 1 iff probs[i] > 0.5 (strict, so ties at 0.5 round down).
Eigen::VectorXd hard_binarize(const Eigen::VectorXd& probs);

}  // namespace pedp
