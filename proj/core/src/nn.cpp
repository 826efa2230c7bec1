#include "graphgen/nn.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace graphgen {

Linear::Linear(int in, int out, Rng& rng, double gain) {
  if (in < 1 || out < 1) throw std::invalid_argument("Linear: dims must be positive");
  Tensor w = Tensor::zeros({in, out});
  const double bound = gain * std::sqrt(6.0 / (in + out));
  for (double& x : w.data) x = rng.uniform(-bound, bound);
  weight = Var::param(std::move(w));
  bias = Var::param(Tensor::zeros({1, out}));
}

void Linear::params(std::vector<Var>& out) const {
  out.push_back(weight);
  out.push_back(bias);
}

Mlp::Mlp(const std::vector<int>& dims, Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("Mlp: need at least in and out dims");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    layers.emplace_back(dims[i], dims[i + 1], rng);
  }
}

Var Mlp::operator()(const Var& x) const {
  Var h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = layers[i](h);
    if (i + 1 < layers.size()) h = relu(h);
  }
  return h;
}

void Mlp::params(std::vector<Var>& out) const {
  for (const auto& layer : layers) layer.params(out);
}

GinLayer::GinLayer(int in, int hidden, int out, Rng& rng)
    : mlp({in, hidden, out}, rng), eps(Var::param(Tensor::zeros({1, 1}))) {}

void GinLayer::params(std::vector<Var>& out) const {
  mlp.params(out);
  out.push_back(eps);
}

Adam::Adam(std::vector<Var> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.push_back(Tensor::zeros(p.value().shape));
    v_.push_back(Tensor::zeros(p.value().shape));
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& value = params_[i].mutable_value();
    // A parameter outside the current loss still decays its moments.
    const bool has_grad = params_[i].has_grad();
    for (std::size_t k = 0; k < value.data.size(); ++k) {
      const double g = has_grad ? params_[i].grad().data[k] : 0.0;
      m_[i].data[k] = beta1_ * m_[i].data[k] + (1.0 - beta1_) * g;
      v_[i].data[k] = beta2_ * v_[i].data[k] + (1.0 - beta2_) * g * g;
      const double mhat = m_[i].data[k] / bc1;
      const double vhat = v_[i].data[k] / bc2;
      value.data[k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].value().all_finite()) {
      std::ostringstream msg;
      msg << "Adam::step: parameter " << i << " went non-finite at step " << t_;
      throw std::runtime_error(msg.str());
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

Tensor time_embedding(int t, int dim) {
  if (dim < 2 || dim % 2 != 0) throw std::invalid_argument("time_embedding: dim must be even");
  const int half = dim / 2;
  Tensor out = Tensor::zeros({1, dim});
  for (int i = 0; i < half; ++i) {
    const double w = std::pow(10000.0, -static_cast<double>(i) / half);
    out.at(0, i) = std::sin(t * w);
    out.at(0, half + i) = std::cos(t * w);
  }
  return out;
}

GumbelSample gumbel_softmax_st(const Var& logits, double tau, Rng& rng) {
  if (tau <= 0.0) throw std::invalid_argument("gumbel_softmax_st: tau must be positive");
  Tensor noise = Tensor::zeros(logits.value().shape);
  for (double& x : noise.data) x = rng.gumbel();
  const Var perturbed = scale(add(logits, Var::constant(std::move(noise))), 1.0 / tau);
  GumbelSample out;
  out.relaxed = pair_softmax(perturbed);
  out.hard = st_pair_argmax(out.relaxed);
  return out;
}

long long param_count(const std::vector<Var>& params) {
  long long total = 0;
  for (const auto& p : params) total += p.value().numel();
  return total;
}

}  // namespace graphgen
