#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "graphgen/tensor.hpp"

namespace graphgen {

/// One tape entry: a value, its (lazily allocated) gradient, and the
/// closure that pushes the gradient to the parents.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;

  Tensor& ensure_grad();
};

/// Value handle on the tape. Copies share the node.
class Var {
 public:
  Var() = default;
  Var(Tensor value, bool requires_grad);

  static Var param(Tensor value) { return Var(std::move(value), true); }
  static Var constant(Tensor value) { return Var(std::move(value), false); }

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  bool has_grad() const { return !node_->grad.data.empty(); }
  bool requires_grad() const { return node_->requires_grad; }
  void zero_grad();

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Reverse-mode sweep from a scalar loss. Gradients accumulate into
/// every reachable node with requires_grad; leaves keep them until
/// zero_grad.
void backward(const Var& loss);

// Core ops. Shapes are validated; violations throw std::invalid_argument.

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
/// m[r x c] + row[1 x c] broadcast over rows.
Var add_rowvec(const Var& m, const Var& row);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var vexp(const Var& a);
Var relu(const Var& a);
Var vtanh(const Var& a);

/// Normalizes each row to zero mean and unit variance (no learned affine).
Var layer_norm_rows(const Var& a);
/// Sum of all entries -> [1 x 1].
Var sum_all(const Var& a);
/// Column sums taken with rows visited in lexicographic row-value order,
/// so the result is identical for any row permutation of the input.
Var readout_sum_sorted(const Var& h);
Var concat_cols(const Var& a, const Var& b);
/// rows are [1 x c] each -> [n x c].
Var stack_rows(const std::vector<Var>& rows);
/// out[r][k] = a[r][offset + k*stride].
Var take_stride(const Var& a, int offset, int stride);
/// out[v] = (1 + eps) * h[v] + sum of h[u] over neighbors u, the sum
/// taken in lexicographic row-value order (see readout_sum_sorted).
/// eps is a [1 x 1] parameter.
Var gin_aggregate(const Var& h, const std::vector<std::vector<int>>& adj, const Var& eps);
/// Softmax over consecutive column pairs: columns (2k, 2k+1) form one
/// two-way distribution. Column count must be even.
Var pair_softmax(const Var& logits);
/// Sum of -[t log p + (1-t) log(1-p)] with p clipped into
/// [1e-7, 1 - 1e-7] inside the logs -> [1 x 1].
Var bce_sum(const Var& probs, const Tensor& targets);
/// -0.5 * sum(1 + logvar - mu^2 - exp(logvar)) -> [1 x 1].
Var kl_sum(const Var& mu, const Var& logvar);
/// Mean of squared differences over all entries -> [1 x 1].
Var mse_mean(const Var& pred, const Tensor& target);
/// Hard one-hot per consecutive column pair (argmax, ties to the lower
/// column), straight-through: the backward pass is the identity.
Var st_pair_argmax(const Var& probs);

}  // namespace graphgen
