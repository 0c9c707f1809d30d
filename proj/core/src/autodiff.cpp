#include "pedp/autodiff.hpp"

#include <cmath>

#include "pedp/errors.hpp"

namespace pedp::ad {

namespace {
constexpr double kProbEps = 1e-12;
}

Var Tape::push(Vec value, std::function<void(Tape&)> back) {
  Node n;
  n.grad = Vec::Zero(value.size());
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::input(Vec v) { return push(std::move(v), nullptr); }

Var Tape::constant_scalar(double v) { return input(Vec::Constant(1, v)); }

Var Tape::linear(Param& w, Param& b, Var x) {
  if (w.cols() != width(x) || w.rows() != b.rows() || b.cols() != 1) {
    throw ValidationError("linear: shape mismatch for parameter \"" + w.name + "\"");
  }
  Vec y = w.value * node(x).value + b.value.col(0);
  int xi = x.index;
  Param* wp = &w;
  Param* bp = &b;
  Var out = push(std::move(y), nullptr);
  int oi = out.index;
  node(out).back = [oi, xi, wp, bp](Tape& t) {
    const Vec& g = t.nodes_[oi].grad;
    wp->grad.noalias() += g * t.nodes_[xi].value.transpose();
    bp->grad.col(0) += g;
    t.nodes_[xi].grad.noalias() += wp->value.transpose() * g;
  };
  return out;
}

Var Tape::matvec(Param& w, Var x) {
  if (w.cols() != width(x)) {
    throw ValidationError("matvec: shape mismatch for parameter \"" + w.name + "\"");
  }
  Vec y = w.value * node(x).value;
  int xi = x.index;
  Param* wp = &w;
  Var out = push(std::move(y), nullptr);
  int oi = out.index;
  node(out).back = [oi, xi, wp](Tape& t) {
    const Vec& g = t.nodes_[oi].grad;
    wp->grad.noalias() += g * t.nodes_[xi].value.transpose();
    t.nodes_[xi].grad.noalias() += wp->value.transpose() * g;
  };
  return out;
}

Var Tape::embed(Param& table, Var weights) {
  if (table.rows() != width(weights)) {
    throw ValidationError("embed: weight width does not match table rows for \"" + table.name + "\"");
  }
  Vec y = table.value.transpose() * node(weights).value;
  int wi = weights.index;
  Param* tp = &table;
  Var out = push(std::move(y), nullptr);
  int oi = out.index;
  node(out).back = [oi, wi, tp](Tape& t) {
    const Vec& g = t.nodes_[oi].grad;
    tp->grad.noalias() += t.nodes_[wi].value * g.transpose();
    t.nodes_[wi].grad.noalias() += tp->value * g;
  };
  return out;
}

Var Tape::relu(Var x) {
  Vec y = node(x).value.cwiseMax(0.0);
  int xi = x.index;
  Var out = push(std::move(y), nullptr);
  int oi = out.index;
  node(out).back = [oi, xi](Tape& t) {
    const Vec& g = t.nodes_[oi].grad;
    const Vec& v = t.nodes_[xi].value;
    for (int i = 0; i < v.size(); ++i) {
      if (v[i] > 0.0) t.nodes_[xi].grad[i] += g[i];
    }
  };
  return out;
}

Var Tape::sigmoid(Var x) {
  Vec y(width(x));
  const Vec& v = node(x).value;
  for (int i = 0; i < v.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-v[i]));
  int xi = x.index;
  Var out = push(std::move(y), nullptr);
  int oi = out.index;
  node(out).back = [oi, xi](Tape& t) {
    const Vec& g = t.nodes_[oi].grad;
    const Vec& s = t.nodes_[oi].value;
    t.nodes_[xi].grad.array() += g.array() * s.array() * (1.0 - s.array());
  };
  return out;
}

Var Tape::tanh(Var x) {
  Vec y = node(x).value.array().tanh();
  int xi = x.index;
  Var out = push(std::move(y), nullptr);
  int oi = out.index;
  node(out).back = [oi, xi](Tape& t) {
    const Vec& g = t.nodes_[oi].grad;
    const Vec& s = t.nodes_[oi].value;
    t.nodes_[xi].grad.array() += g.array() * (1.0 - s.array().square());
  };
  return out;
}

Var Tape::softmax(Var x, double tau) {
  Vec scaled = node(x).value / tau;
  Vec shifted = scaled.array() - scaled.maxCoeff();
  Vec e = shifted.array().exp();
  Vec s = e / e.sum();
  int xi = x.index;
  Var out = push(std::move(s), nullptr);
  int oi = out.index;
  node(out).back = [oi, xi, tau](Tape& t) {
    const Vec& g = t.nodes_[oi].grad;
    const Vec& s = t.nodes_[oi].value;
    double dot = s.dot(g);
    t.nodes_[xi].grad.array() += (s.array() * (g.array() - dot)) / tau;
  };
  return out;
}

Var Tape::add(Var a, Var b) {
  Vec y = node(a).value + node(b).value;
  int ai = a.index, bi = b.index;
  Var out = push(std::move(y), nullptr);
  int oi = out.index;
  node(out).back = [oi, ai, bi](Tape& t) {
    t.nodes_[ai].grad += t.nodes_[oi].grad;
    t.nodes_[bi].grad += t.nodes_[oi].grad;
  };
  return out;
}

Var Tape::sub(Var a, Var b) {
  Vec y = node(a).value - node(b).value;
  int ai = a.index, bi = b.index;
  Var out = push(std::move(y), nullptr);
  int oi = out.index;
  node(out).back = [oi, ai, bi](Tape& t) {
    t.nodes_[ai].grad += t.nodes_[oi].grad;
    t.nodes_[bi].grad -= t.nodes_[oi].grad;
  };
  return out;
}

Var Tape::cmul(Var a, Var b) {
  Vec y = node(a).value.cwiseProduct(node(b).value);
  int ai = a.index, bi = b.index;
  Var out = push(std::move(y), nullptr);
  int oi = out.index;
  node(out).back = [oi, ai, bi](Tape& t) {
    const Vec& g = t.nodes_[oi].grad;
    t.nodes_[ai].grad.array() += g.array() * t.nodes_[bi].value.array();
    t.nodes_[bi].grad.array() += g.array() * t.nodes_[ai].value.array();
  };
  return out;
}

Var Tape::scale(Var a, double c) {
  Vec y = node(a).value * c;
  int ai = a.index;
  Var out = push(std::move(y), nullptr);
  int oi = out.index;
  node(out).back = [oi, ai, c](Tape& t) { t.nodes_[ai].grad += c * t.nodes_[oi].grad; };
  return out;
}

Var Tape::add_const(Var a, const Vec& c) {
  Vec y = node(a).value + c;
  int ai = a.index;
  Var out = push(std::move(y), nullptr);
  int oi = out.index;
  node(out).back = [oi, ai](Tape& t) { t.nodes_[ai].grad += t.nodes_[oi].grad; };
  return out;
}

Var Tape::concat(Var a, Var b) { return concat_many({a, b}); }

Var Tape::concat_many(const std::vector<Var>& parts) {
  int total = 0;
  for (Var p : parts) total += width(p);
  Vec y(total);
  int off = 0;
  for (Var p : parts) {
    y.segment(off, width(p)) = node(p).value;
    off += width(p);
  }
  std::vector<int> indices;
  indices.reserve(parts.size());
  for (Var p : parts) indices.push_back(p.index);
  Var out = push(std::move(y), nullptr);
  int oi = out.index;
  node(out).back = [oi, indices](Tape& t) {
    const Vec& g = t.nodes_[oi].grad;
    int off = 0;
    for (int idx : indices) {
      int w = static_cast<int>(t.nodes_[idx].value.size());
      t.nodes_[idx].grad += g.segment(off, w);
      off += w;
    }
  };
  return out;
}

Var Tape::mean(const std::vector<Var>& xs) {
  if (xs.empty()) throw ValidationError("mean over an empty set of paths");
  Vec y = Vec::Zero(width(xs[0]));
  for (Var x : xs) y += node(x).value;
  y /= static_cast<double>(xs.size());
  std::vector<int> indices;
  for (Var x : xs) indices.push_back(x.index);
  Var out = push(std::move(y), nullptr);
  int oi = out.index;
  node(out).back = [oi, indices](Tape& t) {
    Vec g = t.nodes_[oi].grad / static_cast<double>(indices.size());
    for (int idx : indices) t.nodes_[idx].grad += g;
  };
  return out;
}

Var Tape::straight_through(const Vec& hard, Var soft) {
  if (hard.size() != width(soft)) throw ValidationError("straight_through: width mismatch");
  int si = soft.index;
  Var out = push(hard, nullptr);
  int oi = out.index;
  node(out).back = [oi, si](Tape& t) { t.nodes_[si].grad += t.nodes_[oi].grad; };
  return out;
}

Var Tape::sum_entries(Var x) {
  double s = node(x).value.sum();
  int xi = x.index;
  Var out = push(Vec::Constant(1, s), nullptr);
  int oi = out.index;
  node(out).back = [oi, xi](Tape& t) {
    t.nodes_[xi].grad.array() += t.nodes_[oi].grad[0];
  };
  return out;
}

Var Tape::ce_with_logits(Var logits, int target_index) {
  const Vec& l = node(logits).value;
  if (target_index < 0 || target_index >= l.size()) {
    throw ValidationError("cross-entropy target index out of range");
  }
  double m = l.maxCoeff();
  double lse = m + std::log((l.array() - m).exp().sum());
  Vec y = Vec::Constant(1, lse - l[target_index]);
  int li = logits.index;
  Var out = push(std::move(y), nullptr);
  int oi = out.index;
  node(out).back = [oi, li, target_index](Tape& t) {
    double g = t.nodes_[oi].grad[0];
    const Vec& l = t.nodes_[li].value;
    Vec sm = (l.array() - l.maxCoeff()).exp();
    sm /= sm.sum();
    sm[target_index] -= 1.0;
    t.nodes_[li].grad += g * sm;
  };
  return out;
}

Var Tape::bce_probs(Var probs, const Vec& targets) {
  const Vec& p = node(probs).value;
  if (p.size() != targets.size()) throw ValidationError("bce_probs: width mismatch");
  double loss = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    double pi = std::min(std::max(p[i], kProbEps), 1.0 - kProbEps);
    loss -= targets[i] * std::log(pi) + (1.0 - targets[i]) * std::log(1.0 - pi);
  }
  loss /= static_cast<double>(p.size());
  int pi_idx = probs.index;
  Vec t_copy = targets;
  Var out = push(Vec::Constant(1, loss), nullptr);
  int oi = out.index;
  node(out).back = [oi, pi_idx, t_copy](Tape& t) {
    double g = t.nodes_[oi].grad[0] / static_cast<double>(t_copy.size());
    const Vec& p = t.nodes_[pi_idx].value;
    for (int i = 0; i < p.size(); ++i) {
      double pi = std::min(std::max(p[i], kProbEps), 1.0 - kProbEps);
      t.nodes_[pi_idx].grad[i] += g * (-t_copy[i] / pi + (1.0 - t_copy[i]) / (1.0 - pi));
    }
  };
  return out;
}

Var Tape::weighted_sum(const std::vector<std::pair<double, Var>>& terms) {
  double total = 0.0;
  for (const auto& [w, v] : terms) total += w * scalar(v);
  std::vector<std::pair<double, int>> idx;
  for (const auto& [w, v] : terms) idx.emplace_back(w, v.index);
  Var out = push(Vec::Constant(1, total), nullptr);
  int oi = out.index;
  node(out).back = [oi, idx](Tape& t) {
    double g = t.nodes_[oi].grad[0];
    for (const auto& [w, i] : idx) t.nodes_[i].grad[0] += w * g;
  };
  return out;
}

const Vec& Tape::value(Var v) const { return node(v).value; }

double Tape::scalar(Var v) const {
  if (node(v).value.size() != 1) throw ValidationError("scalar() on a non-scalar node");
  return node(v).value[0];
}

int Tape::width(Var v) const { return static_cast<int>(node(v).value.size()); }

void Tape::backward(Var root) {
  if (node(root).value.size() != 1) throw ValidationError("backward root must be scalar");
  node(root).grad[0] = 1.0;
  for (int i = root.index; i >= 0; --i) {
    if (nodes_[static_cast<size_t>(i)].back) nodes_[static_cast<size_t>(i)].back(*this);
  }
}

}  // namespace pedp::ad
