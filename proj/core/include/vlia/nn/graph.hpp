#pragma once

#include <Eigen/Dense>
#include <deque>
#include <functional>
#include <string>
#include <vector>

namespace vlia::nn {

using Mat = Eigen::MatrixXd;

/// Trainable tensor living outside any graph. Gradients accumulate into
/// `grad` across a batch; the optimizer consumes and clears them.
struct Parameter {
  std::string name;
  int group = 0;
  Mat value;
  Mat grad;
  Mat adam_m, adam_v;  // optimizer state
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, int g, Mat v)
      : name(std::move(n)), group(g), value(std::move(v)) {
    grad = Mat::Zero(value.rows(), value.cols());
  }
};

struct Node {
  Mat value;
  Mat grad;  // empty until touched by backward
  bool needs_grad = false;
  std::function<void(Node&)> backward;

  void accumulate(const Mat& g) {
    if (!needs_grad) return;
    if (grad.size() == 0) grad = Mat::Zero(value.rows(), value.cols());
    grad += g;
  }
};

/// Dynamic reverse-mode tape. Nodes are created in topological order; one
/// Graph per forward pass. Ops reference nodes owned by the graph, so the
/// graph must outlive every Node* it hands out.
class Graph {
 public:
  Node* constant(Mat v);
  Node* leaf(Mat v);               // differentiable input (gradient readable after backward)
  Node* param(Parameter& p);       // copies the value; backward adds into p.grad

  Node* add(Node* a, Node* b);
  Node* sub(Node* a, Node* b);
  Node* add_scaled(Node* a, Node* b, double alpha, double beta);  // alpha*a + beta*b
  Node* add_bias(Node* a, Node* bias_row);  // broadcast a 1 x n row over rows of a
  Node* scale(Node* a, double s);
  Node* hadamard(Node* a, Node* b);
  Node* matmul(Node* a, Node* b);
  Node* matmul_nt(Node* a, Node* b);  // a * b^T
  Node* gelu(Node* a);
  /// Row softmax of (a + additive_mask); the mask may be empty.
  Node* softmax_rows(Node* a, const Mat& additive_mask = Mat());
  Node* layernorm_rows(Node* a, Node* gain_row, Node* bias_row, double eps = 1e-5);
  Node* slice_rows(Node* a, int start, int count);
  Node* slice_cols(Node* a, int start, int count);
  Node* hcat(const std::vector<Node*>& parts);
  Node* vcat(const std::vector<Node*>& parts);
  Node* gather_rows(Node* table, const std::vector<int>& indices);

  /// Mean squared error over all entries; 1 x 1 output.
  Node* mse(Node* pred, const Mat& target);
  /// Weighted token NLL: sum_i w_i * (logsumexp(l_i) - l_i[t_i]) / divisor.
  Node* cross_entropy(Node* logits, const std::vector<int>& targets,
                      const std::vector<double>& weights, double divisor);

  /// Seeds `loss` (1 x 1) with gradient 1 and runs the tape in reverse.
  void backward(Node* loss);

  size_t size() const { return nodes_.size(); }

 private:
  Node* make(Mat value, bool needs_grad, std::function<void(Node&)> back);
  std::deque<Node> nodes_;
};

}  // namespace vlia::nn
