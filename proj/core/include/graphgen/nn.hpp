#pragma once

#include <vector>

#include "graphgen/autograd.hpp"
#include "graphgen/rng.hpp"

namespace graphgen {

/// Dense layer y = x W + b, W [in x out], b [1 x out]. Weights start
/// uniform in +-sqrt(6/(in+out)), biases at zero.
struct Linear {
  Var weight;
  Var bias;

  Linear() = default;
  /// Xavier-uniform init scaled by `gain`; small gains keep heads near zero
  /// at the start of training.
  Linear(int in, int out, Rng& rng, double gain = 1.0);

  Var operator()(const Var& x) const { return add_rowvec(matmul(x, weight), bias); }
  void params(std::vector<Var>& out) const;
};

/// Stacked dense layers with ReLU between them, none after the last.
/// dims = {in, hidden..., out}; dims.size() - 1 layers.
struct Mlp {
  std::vector<Linear> layers;

  Mlp() = default;
  Mlp(const std::vector<int>& dims, Rng& rng);

  Var operator()(const Var& x) const;
  void params(std::vector<Var>& out) const;
};

/// One GIN update: MLP((1 + eps) h_v + sum of neighbor rows). The MLP is
/// two dense layers with a ReLU between; eps is learned per layer.
struct GinLayer {
  Mlp mlp;
  Var eps;

  GinLayer() = default;
  GinLayer(int in, int hidden, int out, Rng& rng);

  Var operator()(const Var& h, const std::vector<std::vector<int>>& adj) const {
    return mlp(gin_aggregate(h, adj, eps));
  }
  void params(std::vector<Var>& out) const;
};

/// Adam with bias correction (beta1 0.9, beta2 0.999, eps 1e-8).
/// step() throws if any parameter goes non-finite afterwards.
class Adam {
 public:
  Adam(std::vector<Var> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void step();
  void zero_grad();
  long long steps() const { return t_; }

 private:
  std::vector<Var> params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
};

/// Sinusoidal step embedding [1 x dim], halves layout: the first dim/2
/// entries are sin(t * w_i), the rest cos(t * w_i), w_i = 10000^(-i/(dim/2)).
/// t = 0 gives zeros then ones. dim must be even.
Tensor time_embedding(int t, int dim);

struct GumbelSample {
  Var hard;     // one-hot per pair, straight-through gradient
  Var relaxed;  // softened pair softmax
};

/// Straight-through Gumbel-Softmax over consecutive logit pairs:
/// relaxed = pair_softmax((logits + gumbel noise) / tau), hard = one-hot
/// argmax with the relaxed gradient.
GumbelSample gumbel_softmax_st(const Var& logits, double tau, Rng& rng);

long long param_count(const std::vector<Var>& params);

}  // namespace graphgen
