#include <doctest.h>

#include <cmath>
#include <functional>

#include "pedp/autodiff.hpp"
#include "pedp/rng.hpp"
#include "pedp/sampling.hpp"

using namespace pedp;
using ad::Param;
using ad::Tape;
using ad::Var;

namespace {

void randomize(Param& p, Rng& rng, double scale = 0.8) {
  for (int j = 0; j < p.cols(); ++j) {
    for (int i = 0; i < p.rows(); ++i) p.value(i, j) = rng.uniform(-scale, scale);
  }
}

// Central finite differences over every entry of every parameter, compared
// against the tape's accumulated gradients. The loss builder must be a pure
// function of the parameter values.
void check_gradients(std::vector<Param*> params, const std::function<double()>& loss_value,
                     const std::function<void()>& loss_backward, double rel_tol = 1e-6,
                     double h = 1e-6) {
  for (Param* p : params) p->zero_grad();
  loss_backward();
  for (Param* p : params) {
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
        double denom = std::max({std::abs(fd), std::abs(analytic), 1e-8});
        INFO("param ", p->name, " entry (", i, ",", j, ") fd=", fd, " analytic=", analytic);
        CHECK(std::abs(fd - analytic) / denom < rel_tol);
      }
    }
  }
}

}  // namespace

TEST_CASE("linear + relu + bce gradients match finite differences") {
  Rng rng(21);
  Param w("w", 4, 3), b("b", 4, 1);
  randomize(w, rng);
  randomize(b, rng);
  Eigen::VectorXd x(3);
  x << 0.3, -0.7, 1.1;
  Eigen::VectorXd targets(4);
  targets << 1.0, 0.0, 1.0, 0.0;

  auto value = [&] {
    Tape t;
    Var y = t.sigmoid(t.relu(t.linear(w, b, t.input(x))));
    return t.scalar(t.bce_probs(y, targets));
  };
  auto backward = [&] {
    Tape t;
    Var y = t.sigmoid(t.relu(t.linear(w, b, t.input(x))));
    t.backward(t.bce_probs(y, targets));
  };
  check_gradients({&w, &b}, value, backward);
}

TEST_CASE("matvec, embed, cmul, tanh, concat gradients match finite differences") {
  Rng rng(22);
  Param u("u", 3, 3), table("table", 5, 3), w("w", 1, 6), b("b", 1, 1);
  randomize(u, rng);
  randomize(table, rng);
  randomize(w, rng);
  randomize(b, rng);
  Eigen::VectorXd x(3), weights(5), one_target(1);
  x << 0.2, 0.5, -0.4;
  weights << 0.1, 0.3, 0.2, 0.25, 0.15;
  one_target << 1.0;

  auto build = [&](Tape& t) {
    Var xv = t.input(x);
    Var e = t.embed(table, t.input(weights));
    Var m = t.cmul(t.tanh(t.matvec(u, xv)), e);
    Var out = t.sigmoid(t.linear(w, b, t.concat(m, e)));
    return t.bce_probs(out, one_target);
  };
  auto value = [&] {
    Tape t;
    return t.scalar(build(t));
  };
  auto backward = [&] {
    Tape t;
    t.backward(build(t));
  };
  check_gradients({&u, &table, &w, &b}, value, backward);
}

TEST_CASE("softmax and cross-entropy gradients match finite differences") {
  Rng rng(23);
  Param w("w", 5, 4), b("b", 5, 1);
  randomize(w, rng);
  randomize(b, rng);
  Eigen::VectorXd x(4);
  x << 0.4, -0.2, 0.9, 0.1;

  // CE with logits.
  auto ce_value = [&] {
    Tape t;
    return t.scalar(t.ce_with_logits(t.linear(w, b, t.input(x)), 2));
  };
  auto ce_backward = [&] {
    Tape t;
    t.backward(t.ce_with_logits(t.linear(w, b, t.input(x)), 2));
  };
  check_gradients({&w, &b}, ce_value, ce_backward);

  // Tempered softmax feeding a BCE head.
  Eigen::VectorXd targets(5);
  targets << 0.0, 1.0, 0.0, 0.0, 1.0;
  auto sm_value = [&] {
    Tape t;
    Var s = t.softmax(t.linear(w, b, t.input(x)), 0.7);
    return t.scalar(t.bce_probs(s, targets));
  };
  auto sm_backward = [&] {
    Tape t;
    Var s = t.softmax(t.linear(w, b, t.input(x)), 0.7);
    t.backward(t.bce_probs(s, targets));
  };
  check_gradients({&w, &b}, sm_value, sm_backward);
}

TEST_CASE("weighted_sum and mean gradients match finite differences") {
  Rng rng(24);
  Param w("w", 3, 2), b("b", 3, 1);
  randomize(w, rng);
  randomize(b, rng);
  Eigen::VectorXd x(2), targets(3);
  x << 0.6, -0.3;
  targets << 1.0, 0.0, 1.0;

  auto build = [&](Tape& t) {
    Var h = t.sigmoid(t.linear(w, b, t.input(x)));
    Var g = t.sigmoid(t.scale(t.linear(w, b, t.input(x)), 0.5));
    Var m = t.mean({h, g});
    Var l1 = t.bce_probs(m, targets);
    Var l2 = t.bce_probs(h, targets);
    return t.weighted_sum({{0.7, l1}, {0.3, l2}});
  };
  auto value = [&] {
    Tape t;
    return t.scalar(build(t));
  };
  auto backward = [&] {
    Tape t;
    t.backward(build(t));
  };
  check_gradients({&w, &b}, value, backward);
}

TEST_CASE("straight-through forwards the hard sample and backs the soft gradient") {
  // Scalar toy objective L = c . sample. With the straight-through estimator
  // the gradient received by the logits must equal the gradient of the soft
  // relaxation, verified against finite differences of the soft path.
  Rng noise_rng(31);
  Eigen::VectorXd noise = gumbel_noise(4, noise_rng);
  Eigen::VectorXd c(4);
  c << 0.9, -0.4, 0.3, 0.7;

  Param logits_p("logits", 4, 1);
  Rng rng(32);
  randomize(logits_p, rng, 1.5);

  auto build = [&](Tape& t, bool hard) {
    Var logits = t.matvec(logits_p, t.input(Eigen::VectorXd::Ones(1)));
    Var perturbed = t.add_const(logits, noise);
    Var soft = t.softmax(perturbed, 1.0);
    Var sample = soft;
    if (hard) {
      int idx;
      t.value(perturbed).maxCoeff(&idx);
      Eigen::VectorXd one_hot = Eigen::VectorXd::Zero(4);
      one_hot[idx] = 1.0;
      sample = t.straight_through(one_hot, soft);
    }
    return t.sum_entries(t.cmul(sample, t.input(c)));
  };

  // Hard forward differs in value but must deliver the soft path's gradient.
  logits_p.zero_grad();
  {
    Tape t;
    t.backward(build(t, true));
  }
  Eigen::MatrixXd st_grad = logits_p.grad;

  logits_p.zero_grad();
  {
    Tape t;
    t.backward(build(t, false));
  }
  CHECK((st_grad - logits_p.grad).lpNorm<Eigen::Infinity>() < 1e-12);

  // And the soft path's gradient itself matches finite differences.
  auto soft_value = [&] {
    Tape t;
    return t.scalar(build(t, false));
  };
  auto soft_backward = [&] {
    Tape t;
    t.backward(build(t, false));
  };
  check_gradients({&logits_p}, soft_value, soft_backward, 1e-4);
}

TEST_CASE("sum_entries gradient") {
  Rng rng(33);
  Param w("w", 3, 2), b("b", 3, 1);
  randomize(w, rng);
  randomize(b, rng);
  Eigen::VectorXd x(2);
  x << 0.4, -0.9;
  auto value = [&] {
    Tape t;
    return t.scalar(t.sum_entries(t.tanh(t.linear(w, b, t.input(x)))));
  };
  auto backward = [&] {
    Tape t;
    t.backward(t.sum_entries(t.tanh(t.linear(w, b, t.input(x)))));
  };
  check_gradients({&w, &b}, value, backward);
}
