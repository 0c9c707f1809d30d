#include <doctest.h>

#include <cmath>

#include "pedp/sampling.hpp"

using namespace pedp;

// Monte-Carlo oracles: Gumbel(0,1) has mean = Euler-Mascheroni and variance
// pi^2/6; argmax(logits + g) is distributed softmax(logits) (Gumbel-max).

TEST_CASE("gumbel noise matches the known mean and variance") {
  Rng rng(101);
  const int n = 1'000'000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = gumbel_noise_scalar(rng);
    sum += g;
    sum_sq += g * g;
  }
  double mean = sum / n;
  double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean - 0.5772) < 0.01);
  CHECK(std::abs(var - 1.6449) < 0.02);
}

TEST_CASE("fixed seed gives a bit-identical noise stream") {
  Rng a(42), b(42);
  Eigen::VectorXd ga = gumbel_noise(64, a);
  Eigen::VectorXd gb = gumbel_noise(64, b);
  CHECK(ga == gb);
}

TEST_CASE("gumbel_softmax soft output is a simplex point") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    int c = 2 + rng.uniform_int(8);
    Eigen::VectorXd logits(c);
    for (int i = 0; i < c; ++i) logits[i] = rng.uniform(-6.0, 6.0);
    SoftmaxSample s = gumbel_softmax(logits, 0.5 + rng.uniform(), rng);
    CHECK(std::abs(s.soft.sum() - 1.0) < 1e-6);
    CHECK(s.soft.minCoeff() >= 0.0);
    CHECK(s.index >= 0);
    CHECK(s.index < c);
  }
}

TEST_CASE("temperature to zero collapses the soft sample onto the argmax") {
  Eigen::VectorXd logits(4);
  logits << 0.3, -1.0, 0.8, 0.1;
  // Same seed, same noise stream: only tau differs.
  Rng warm(99);
  SoftmaxSample hot = gumbel_softmax(logits, 1.0, warm);
  Rng cold(99);
  SoftmaxSample frozen = gumbel_softmax(logits, 1e-9, cold);
  CHECK(frozen.index == hot.index);
  CHECK(frozen.soft[frozen.index] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("argmax frequencies follow softmax(logits)") {
  const int draws = 100'000;

  SUBCASE("uniform logits") {
    Eigen::VectorXd logits = Eigen::VectorXd::Zero(4);
    Rng rng(11);
    Eigen::Vector4d counts = Eigen::Vector4d::Zero();
    for (int i = 0; i < draws; ++i) counts[gumbel_softmax(logits, 1.0, rng).index] += 1.0;
    for (int c = 0; c < 4; ++c) {
      CHECK(std::abs(counts[c] / draws - 0.25) < 0.01);
    }
  }

  SUBCASE("peaked logits [5,0,0]") {
    Eigen::VectorXd logits(3);
    logits << 5.0, 0.0, 0.0;
    double expected = std::exp(5.0) / (std::exp(5.0) + 2.0);  // 0.98661
    Rng rng(12);
    int hits = 0;
    for (int i = 0; i < draws; ++i) {
      if (gumbel_softmax(logits, 1.0, rng).index == 0) ++hits;
    }
    CHECK(std::abs(static_cast<double>(hits) / draws - expected) < 0.005);
  }
}

TEST_CASE("gumbel_softmax input validation") {
  Rng rng(1);
  Eigen::VectorXd one(1);
  one << 0.0;
  CHECK_THROWS_AS(gumbel_softmax(one, 1.0, rng), ValidationError);
  Eigen::VectorXd bad(3);
  bad << 0.0, std::nan(""), 1.0;
  CHECK_THROWS_AS(gumbel_softmax(bad, 1.0, rng), ValidationError);
  Eigen::VectorXd ok(2);
  ok << 0.0, 1.0;
  CHECK_THROWS_AS(gumbel_softmax(ok, 0.0, rng), ValidationError);
}

TEST_CASE("gumbel_sigmoid with symmetric zero noise is exactly one half") {
  Eigen::VectorXd values = Eigen::VectorXd::Zero(5);
  Eigen::VectorXd zeros = Eigen::VectorXd::Zero(5);
  Eigen::VectorXd out = gumbel_sigmoid_with_noise(values, zeros, zeros, 1.0);
  for (int i = 0; i < 5; ++i) CHECK(out[i] == 0.5);
}

TEST_CASE("gumbel_sigmoid with noise disabled equals sigmoid(values/tau)") {
  Eigen::VectorXd values(4);
  values << -3.0, -0.5, 0.7, 4.0;
  Eigen::VectorXd zeros = Eigen::VectorXd::Zero(4);
  for (double tau : {0.5, 1.0, 2.0}) {
    Eigen::VectorXd out = gumbel_sigmoid_with_noise(values, zeros, zeros, tau);
    for (int i = 0; i < 4; ++i) {
      double expected = 1.0 / (1.0 + std::exp(-values[i] / tau));
      CHECK(std::abs(out[i] - expected) < 1e-6);
    }
  }
}

TEST_CASE("gumbel_sigmoid selection frequency matches sigmoid(value)") {
  // g2 - g1 is standard-logistic, so P(out > 0.5) = sigmoid(v) at any tau.
  const int draws = 100'000;
  Rng rng(13);
  for (double v : {-2.0, 0.0, 1.0}) {
    Eigen::VectorXd values = Eigen::VectorXd::Constant(1, v);
    int hits = 0;
    for (int i = 0; i < draws; ++i) {
      if (gumbel_sigmoid(values, 1.0, rng)[0] > 0.5) ++hits;
    }
    double expected = 1.0 / (1.0 + std::exp(-v));
    CHECK(std::abs(static_cast<double>(hits) / draws - expected) < 0.01);
  }
}

TEST_CASE("gumbel_sigmoid survives extreme values without overflow") {
  Eigen::VectorXd values(2);
  values << 1e4, -1e4;
  Rng rng(3);
  Eigen::VectorXd out = gumbel_sigmoid(values, 1.0, rng);
  CHECK(std::isfinite(out[0]));
  CHECK(std::isfinite(out[1]));
  CHECK(out[0] > 0.99);
  CHECK(out[1] < 0.01);
}

TEST_CASE("hard_binarize thresholds strictly above one half") {
  Eigen::VectorXd p(2);
  p << 0.49, 0.51;
  Eigen::VectorXd b = hard_binarize(p);
  CHECK(b[0] == 0.0);
  CHECK(b[1] == 1.0);

  Eigen::VectorXd ties = Eigen::VectorXd::Constant(3, 0.5);
  CHECK(hard_binarize(ties).sum() == 0.0);

  Eigen::VectorXd binary(4);
  binary << 0.0, 1.0, 1.0, 0.0;
  CHECK(hard_binarize(binary) == binary);
}

TEST_CASE("temperature validation") {
  GumbelConfig bad;
  bad.tau_d = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  GumbelConfig ok;
  ok.validate();
}
