#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace pedp::ad {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A named trainable array. Vectors are stored as n-by-1 matrices. Gradients
// accumulate across backward passes until zero_grad().
struct Param {
  std::string name;
  Mat value;
  Mat grad;

  Param() = default;
  Param(std::string param_name, int rows, int cols)
      : name(std::move(param_name)), value(Mat::Zero(rows, cols)), grad(Mat::Zero(rows, cols)) {}

  int rows() const { return static_cast<int>(value.rows()); }
  int cols() const { return static_cast<int>(value.cols()); }
  Eigen::Index size() const { return value.size(); }
  void zero_grad() { grad.setZero(); }
};

// Handle to a tape node. Only valid for the tape that produced it.
struct Var {
  int index = -1;
  bool valid() const { return index >= 0; }
};

// Dynamic reverse-mode tape over vector-valued nodes. One tape per forward
// pass; parameters live outside the tape and receive gradient accumulation
// directly. Scalars are size-1 vectors.
class Tape {
public:
  Var input(Vec v);
  Var constant_scalar(double v);

  // W.value (m x n) * x + b.value (m x 1)
  Var linear(Param& w, Param& b, Var x);
  // W.value (m x n) * x
  Var matvec(Param& w, Var x);
  // table.value (rows x cols), weights sized rows: result = table^T * weights.
  // With a one-hot weight vector this selects an embedding row.
  Var embed(Param& table, Var weights);

  Var relu(Var x);
  Var sigmoid(Var x);
  Var tanh(Var x);
  // softmax(x / tau)
  Var softmax(Var x, double tau = 1.0);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var cmul(Var a, Var b);  // elementwise
  Var scale(Var a, double c);
  Var add_const(Var a, const Vec& c);
  Var concat(Var a, Var b);
  Var concat_many(const std::vector<Var>& parts);
  Var mean(const std::vector<Var>& xs);  // elementwise mean of same-width vars

  // Forward value is `hard`; the gradient passes to `soft` unchanged.
  Var straight_through(const Vec& hard, Var soft);

  // Scalar sum of all entries.
  Var sum_entries(Var x);

  // Scalar losses.
  Var ce_with_logits(Var logits, int target_index);
  Var bce_probs(Var probs, const Vec& targets);  // mean over entries
  Var weighted_sum(const std::vector<std::pair<double, Var>>& terms);

  const Vec& value(Var v) const;
  double scalar(Var v) const;
  int width(Var v) const;

  // Seeds d(root)/d(root) = 1 and propagates to every node and parameter
  // reachable below it. Root must be scalar.
  void backward(Var root);

  size_t node_count() const { return nodes_.size(); }

private:
  struct Node {
    Vec value;
    Vec grad;
    std::function<void(Tape&)> back;  // may be empty for leaves
  };

  Var push(Vec value, std::function<void(Tape&)> back);
  Node& node(Var v) { return nodes_[static_cast<size_t>(v.index)]; }
  const Node& node(Var v) const { return nodes_[static_cast<size_t>(v.index)]; }

  std::vector<Node> nodes_;
};

}  // namespace pedp::ad
