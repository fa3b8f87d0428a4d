#include "vlia/nn/graph.hpp"

#include <cmath>
#include <memory>

#include "vlia/errors.hpp"

namespace vlia::nn {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kInvSqrt2Pi = 0.3989422804014327;
}  // namespace

Node* Graph::make(Mat value, bool needs_grad, std::function<void(Node&)> back) {
  nodes_.emplace_back();
  Node& n = nodes_.back();
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.backward = std::move(back);
  return &n;
}

Node* Graph::constant(Mat v) { return make(std::move(v), false, nullptr); }

Node* Graph::leaf(Mat v) { return make(std::move(v), true, nullptr); }

Node* Graph::param(Parameter& p) {
  Parameter* pp = &p;
  return make(p.value, true, [pp](Node& self) { pp->grad += self.grad; });
}

Node* Graph::add(Node* a, Node* b) { return add_scaled(a, b, 1.0, 1.0); }

Node* Graph::sub(Node* a, Node* b) { return add_scaled(a, b, 1.0, -1.0); }

Node* Graph::add_scaled(Node* a, Node* b, double alpha, double beta) {
  if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols())
    throw ValidationError("add_scaled: shape mismatch");
  return make(alpha * a->value + beta * b->value, a->needs_grad || b->needs_grad,
              [a, b, alpha, beta](Node& self) {
                a->accumulate(alpha * self.grad);
                b->accumulate(beta * self.grad);
              });
}

Node* Graph::add_bias(Node* a, Node* bias_row) {
  if (bias_row->value.rows() != 1 || bias_row->value.cols() != a->value.cols())
    throw ValidationError("add_bias: bias must be 1 x cols(a)");
  return make(a->value.rowwise() + bias_row->value.row(0),
              a->needs_grad || bias_row->needs_grad, [a, bias_row](Node& self) {
                a->accumulate(self.grad);
                bias_row->accumulate(self.grad.colwise().sum());
              });
}

Node* Graph::scale(Node* a, double s) {
  return make(s * a->value, a->needs_grad,
              [a, s](Node& self) { a->accumulate(s * self.grad); });
}

Node* Graph::hadamard(Node* a, Node* b) {
  if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols())
    throw ValidationError("hadamard: shape mismatch");
  return make(a->value.cwiseProduct(b->value), a->needs_grad || b->needs_grad,
              [a, b](Node& self) {
                a->accumulate(self.grad.cwiseProduct(b->value));
                b->accumulate(self.grad.cwiseProduct(a->value));
              });
}

Node* Graph::matmul(Node* a, Node* b) {
  if (a->value.cols() != b->value.rows()) throw ValidationError("matmul: shape mismatch");
  return make(a->value * b->value, a->needs_grad || b->needs_grad, [a, b](Node& self) {
    a->accumulate(self.grad * b->value.transpose());
    b->accumulate(a->value.transpose() * self.grad);
  });
}

Node* Graph::matmul_nt(Node* a, Node* b) {
  if (a->value.cols() != b->value.cols()) throw ValidationError("matmul_nt: shape mismatch");
  return make(a->value * b->value.transpose(), a->needs_grad || b->needs_grad,
              [a, b](Node& self) {
                a->accumulate(self.grad * b->value);
                b->accumulate(self.grad.transpose() * a->value);
              });
}

Node* Graph::gelu(Node* a) {
  Mat y = a->value.unaryExpr([](double x) { return x * 0.5 * (1.0 + std::erf(x * kInvSqrt2)); });
  return make(std::move(y), a->needs_grad, [a](Node& self) {
    const Mat d = a->value.unaryExpr([](double x) {
      const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
      return cdf + x * pdf;
    });
    a->accumulate(self.grad.cwiseProduct(d));
  });
}

Node* Graph::softmax_rows(Node* a, const Mat& additive_mask) {
  Mat z = a->value;
  if (additive_mask.size() != 0) {
    if (additive_mask.rows() != z.rows() || additive_mask.cols() != z.cols())
      throw ValidationError("softmax_rows: mask shape mismatch");
    z += additive_mask;
  }
  Mat y(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double m = z.row(r).maxCoeff();
    Eigen::RowVectorXd e = (z.row(r).array() - m).exp();
    y.row(r) = e / e.sum();
  }
  return make(std::move(y), a->needs_grad, [a](Node& self) {
    Mat dx(self.value.rows(), self.value.cols());
    for (Eigen::Index r = 0; r < self.value.rows(); ++r) {
      const double dot = self.grad.row(r).dot(self.value.row(r));
      dx.row(r) = self.value.row(r).cwiseProduct((self.grad.row(r).array() - dot).matrix());
    }
    a->accumulate(dx);
  });
}

Node* Graph::layernorm_rows(Node* a, Node* gain_row, Node* bias_row, double eps) {
  const Eigen::Index n = a->value.cols();
  if (gain_row->value.cols() != n || bias_row->value.cols() != n)
    throw ValidationError("layernorm_rows: gain/bias width mismatch");
  Mat xhat(a->value.rows(), n);
  Eigen::VectorXd inv_std(a->value.rows());
  for (Eigen::Index r = 0; r < a->value.rows(); ++r) {
    const double mu = a->value.row(r).mean();
    const double var = (a->value.row(r).array() - mu).square().mean();
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (a->value.row(r).array() - mu) * inv_std[r];
  }
  Mat y(a->value.rows(), n);
  for (Eigen::Index r = 0; r < a->value.rows(); ++r)
    y.row(r) = xhat.row(r).cwiseProduct(gain_row->value.row(0)) + bias_row->value.row(0);
  auto xhat_copy = std::make_shared<Mat>(std::move(xhat));
  auto inv_copy = std::make_shared<Eigen::VectorXd>(std::move(inv_std));
  return make(std::move(y), a->needs_grad || gain_row->needs_grad || bias_row->needs_grad,
              [a, gain_row, bias_row, xhat_copy, inv_copy](Node& self) {
                const Mat& xh = *xhat_copy;
                bias_row->accumulate(self.grad.colwise().sum());
                gain_row->accumulate(self.grad.cwiseProduct(xh).colwise().sum());
                if (!a->needs_grad) return;
                Mat dx(self.grad.rows(), self.grad.cols());
                for (Eigen::Index r = 0; r < self.grad.rows(); ++r) {
                  const Eigen::RowVectorXd g =
                      self.grad.row(r).cwiseProduct(gain_row->value.row(0));
                  const double mg = g.mean();
                  const double mgx = g.cwiseProduct(xh.row(r)).mean();
                  dx.row(r) = ((g.array() - mg) - xh.row(r).array() * mgx) * (*inv_copy)[r];
                }
                a->accumulate(dx);
              });
}

Node* Graph::slice_rows(Node* a, int start, int count) {
  if (start < 0 || count < 0 || start + count > a->value.rows())
    throw ValidationError("slice_rows: out of range");
  return make(a->value.middleRows(start, count), a->needs_grad, [a, start, count](Node& self) {
    if (a->needs_grad) {
      Mat g = Mat::Zero(a->value.rows(), a->value.cols());
      g.middleRows(start, count) = self.grad;
      a->accumulate(g);
    }
  });
}

Node* Graph::slice_cols(Node* a, int start, int count) {
  if (start < 0 || count < 0 || start + count > a->value.cols())
    throw ValidationError("slice_cols: out of range");
  return make(a->value.middleCols(start, count), a->needs_grad, [a, start, count](Node& self) {
    if (a->needs_grad) {
      Mat g = Mat::Zero(a->value.rows(), a->value.cols());
      g.middleCols(start, count) = self.grad;
      a->accumulate(g);
    }
  });
}

Node* Graph::hcat(const std::vector<Node*>& parts) {
  if (parts.empty()) throw ValidationError("hcat: empty");
  Eigen::Index cols = 0;
  for (Node* p : parts) cols += p->value.cols();
  Mat out(parts.front()->value.rows(), cols);
  Eigen::Index off = 0;
  bool needs = false;
  for (Node* p : parts) {
    out.middleCols(off, p->value.cols()) = p->value;
    off += p->value.cols();
    needs = needs || p->needs_grad;
  }
  auto parts_copy = parts;
  return make(std::move(out), needs, [parts_copy](Node& self) {
    Eigen::Index off = 0;
    for (Node* p : parts_copy) {
      p->accumulate(self.grad.middleCols(off, p->value.cols()));
      off += p->value.cols();
    }
  });
}

Node* Graph::vcat(const std::vector<Node*>& parts) {
  if (parts.empty()) throw ValidationError("vcat: empty");
  Eigen::Index rows = 0;
  for (Node* p : parts) rows += p->value.rows();
  Mat out(rows, parts.front()->value.cols());
  Eigen::Index off = 0;
  bool needs = false;
  for (Node* p : parts) {
    out.middleRows(off, p->value.rows()) = p->value;
    off += p->value.rows();
    needs = needs || p->needs_grad;
  }
  auto parts_copy = parts;
  return make(std::move(out), needs, [parts_copy](Node& self) {
    Eigen::Index off = 0;
    for (Node* p : parts_copy) {
      p->accumulate(self.grad.middleRows(off, p->value.rows()));
      off += p->value.rows();
    }
  });
}

Node* Graph::gather_rows(Node* table, const std::vector<int>& indices) {
  Mat out(static_cast<Eigen::Index>(indices.size()), table->value.cols());
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= table->value.rows())
      throw ValidationError("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = table->value.row(indices[i]);
  }
  auto idx = indices;
  return make(std::move(out), table->needs_grad, [table, idx](Node& self) {
    if (!table->needs_grad) return;
    Mat g = Mat::Zero(table->value.rows(), table->value.cols());
    for (size_t i = 0; i < idx.size(); ++i)
      g.row(idx[i]) += self.grad.row(static_cast<Eigen::Index>(i));
    table->accumulate(g);
  });
}

Node* Graph::mse(Node* pred, const Mat& target) {
  if (pred->value.rows() != target.rows() || pred->value.cols() != target.cols())
    throw ValidationError("mse: shape mismatch");
  const double count = static_cast<double>(target.size());
  const Mat diff = pred->value - target;
  Mat out(1, 1);
  out(0, 0) = diff.squaredNorm() / count;
  auto diff_copy = std::make_shared<Mat>(diff);
  return make(std::move(out), pred->needs_grad, [pred, diff_copy, count](Node& self) {
    pred->accumulate((2.0 / count) * self.grad(0, 0) * (*diff_copy));
  });
}

Node* Graph::cross_entropy(Node* logits, const std::vector<int>& targets,
                           const std::vector<double>& weights, double divisor) {
  const auto n = static_cast<size_t>(logits->value.rows());
  if (targets.size() != n || weights.size() != n)
    throw ValidationError("cross_entropy: row count mismatch");
  if (divisor <= 0.0) throw ValidationError("cross_entropy: divisor must be positive");
  auto probs = std::make_shared<Mat>(logits->value.rows(), logits->value.cols());
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (targets[i] < 0 || targets[i] >= logits->value.cols())
      throw ValidationError("cross_entropy: target out of range");
    const double m = logits->value.row(r).maxCoeff();
    Eigen::RowVectorXd e = (logits->value.row(r).array() - m).exp();
    const double z = e.sum();
    probs->row(r) = e / z;
    loss += weights[i] * (std::log(z) + m - logits->value(r, targets[i]));
  }
  Mat out(1, 1);
  out(0, 0) = loss / divisor;
  auto t_copy = targets;
  auto w_copy = weights;
  return make(std::move(out), logits->needs_grad,
              [logits, probs, t_copy, w_copy, divisor](Node& self) {
                Mat g = *probs;
                for (size_t i = 0; i < t_copy.size(); ++i) {
                  const auto r = static_cast<Eigen::Index>(i);
                  g(r, t_copy[i]) -= 1.0;
                  g.row(r) *= w_copy[i];
                }
                logits->accumulate((self.grad(0, 0) / divisor) * g);
              });
}

void Graph::backward(Node* loss) {
  if (loss->value.rows() != 1 || loss->value.cols() != 1)
    throw ValidationError("backward: loss must be 1 x 1");
  loss->grad = Mat::Ones(1, 1);
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node& n = *it;
    if (n.backward && n.grad.size() != 0) n.backward(n);
  }
}

}  // namespace vlia::nn
