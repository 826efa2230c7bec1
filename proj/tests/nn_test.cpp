#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "gradcheck.hpp"
#include "graphgen/nn.hpp"
#include "graphgen/rng.hpp"

using namespace graphgen;
using oracle::gradcheck;

namespace {
constexpr double kTol = 1e-4;
}

TEST_CASE("Linear shapes, init bounds and gradient") {
  Rng rng(21);
  Linear lin(5, 3, rng);
  CHECK(lin.weight.value().rows() == 5);
  CHECK(lin.weight.value().cols() == 3);
  CHECK(lin.bias.value().rows() == 1);
  CHECK(lin.bias.value().cols() == 3);

  const double bound = std::sqrt(6.0 / (5 + 3));
  for (double w : lin.weight.value().data) {
    CHECK(std::abs(w) <= bound);
  }
  for (double b : lin.bias.value().data) CHECK(b == 0.0);

  // A gain shrinks the init bound proportionally.
  Rng rng2(21);
  Linear small(5, 3, rng2, 0.1);
  for (double w : small.weight.value().data) CHECK(std::abs(w) <= 0.1 * bound);

  Var x = Var::param(Tensor({2, 5}, {0.1, -0.2, 0.3, 0.4, -0.5,
                                     0.6, 0.7, -0.8, 0.9, 1.0}));
  std::vector<Var> params{x};
  lin.params(params);
  const auto r = gradcheck([&] { return sum_all(mul(lin(x), lin(x))); }, params);
  CHECK(r.max_rel_error < kTol);
}

TEST_CASE("Mlp layer count and end-to-end gradient") {
  Rng rng(22);
  Mlp mlp({4, 8, 8, 2}, rng);
  CHECK(mlp.layers.size() == 3);

  Var x = Var::param(Tensor({3, 4}, {0.5, -0.4, 0.3, 0.2,
                                     -0.1, 0.6, -0.7, 0.8,
                                     0.9, -1.0, 1.1, -1.2}));
  const Tensor out = mlp(x).value();
  CHECK(out.rows() == 3);
  CHECK(out.cols() == 2);

  std::vector<Var> params{x};
  mlp.params(params);
  const auto r = gradcheck([&] { return sum_all(mul(mlp(x), mlp(x))); }, params);
  CHECK(r.max_rel_error < kTol);
}

TEST_CASE("GinLayer respects the neighborhood and backpropagates") {
  Rng rng(23);
  GinLayer layer(3, 6, 3, rng);
  const std::vector<std::vector<int>> path{{1}, {0, 2}, {1}};

  Var h = Var::param(Tensor({3, 3}, {0.3, -0.2, 0.5,
                                     -0.6, 0.4, 0.1,
                                     0.7, 0.2, -0.4}));
  const Tensor out = layer(h, path).value();
  CHECK(out.rows() == 3);
  CHECK(out.cols() == 3);

  std::vector<Var> params{h};
  layer.params(params);
  const auto r = gradcheck([&] { return sum_all(mul(layer(h, path), layer(h, path))); },
                           params);
  CHECK(r.max_rel_error < kTol);
}

TEST_CASE("param_count sums tensor sizes") {
  Rng rng(24);
  Mlp mlp({15, 64, 64}, rng);
  std::vector<Var> params;
  mlp.params(params);
  // 15*64 + 64 + 64*64 + 64.
  CHECK(param_count(params) == 5184);
}

TEST_CASE("Adam first step moves each weight by about lr") {
  // With bias correction the very first update is lr * g / (|g| + eps),
  // i.e. lr * sign(gradient) for any nonzero gradient.
  Var w = Var::param(Tensor({1, 3}, {1.0, -2.0, 0.5}));
  Adam opt({w}, 0.01);
  Var loss = sum_all(mul(w, Var::constant(Tensor({1, 3}, {2.0, -3.0, 4.0}))));
  backward(loss);
  opt.step();
  CHECK(opt.steps() == 1);
  CHECK(w.value().at(0, 0) == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
  CHECK(w.value().at(0, 1) == doctest::Approx(-2.0 + 0.01).epsilon(1e-6));
  CHECK(w.value().at(0, 2) == doctest::Approx(0.5 - 0.01).epsilon(1e-6));
}

TEST_CASE("Adam zero_grad clears accumulated gradients") {
  Var w = Var::param(Tensor({1, 2}, {1.0, 1.0}));
  Adam opt({w}, 0.1);
  backward(sum_all(w));
  CHECK(w.has_grad());
  opt.zero_grad();
  CHECK(!w.has_grad());
}

TEST_CASE("Adam converges on a quadratic") {
  Var w = Var::param(Tensor({1, 2}, {3.0, -4.0}));
  Adam opt({w}, 0.1);
  for (int i = 0; i < 400; ++i) {
    opt.zero_grad();
    backward(mse_mean(w, Tensor({1, 2}, {1.0, 2.0})));
    opt.step();
  }
  CHECK(w.value().at(0, 0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(w.value().at(0, 1) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("Adam throws when a parameter goes non-finite") {
  Var w = Var::param(Tensor({1, 1}, {1.0}));
  Adam opt({w}, 1.0);
  backward(sum_all(w));
  w.mutable_value().data[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(opt.step(), std::runtime_error);
}

TEST_CASE("time_embedding layout") {
  const Tensor at0 = time_embedding(0, 8);
  CHECK(at0.rows() == 1);
  CHECK(at0.cols() == 8);
  for (int i = 0; i < 4; ++i) {
    CHECK(at0.at(0, i) == doctest::Approx(0.0));       // sin half
    CHECK(at0.at(0, 4 + i) == doctest::Approx(1.0));   // cos half
  }

  const Tensor at7 = time_embedding(7, 8);
  for (int i = 0; i < 4; ++i) {
    const double w = std::pow(10000.0, -static_cast<double>(i) / 4.0);
    CHECK(at7.at(0, i) == doctest::Approx(std::sin(7 * w)));
    CHECK(at7.at(0, 4 + i) == doctest::Approx(std::cos(7 * w)));
  }

  CHECK_THROWS_AS(time_embedding(1, 7), std::invalid_argument);
}

TEST_CASE("gumbel_softmax_st emits one-hot pairs with relaxed gradients") {
  Rng rng(25);
  Var logits = Var::param(Tensor({2, 4}, {2.0, -1.0, 0.5, 0.3,
                                          -0.2, 0.8, 1.5, -0.5}));
  GumbelSample s = gumbel_softmax_st(logits, 1.0, rng);
  CHECK(s.hard.value().rows() == 2);
  CHECK(s.hard.value().cols() == 4);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 4; c += 2) {
      const double a = s.hard.value().at(r, c);
      const double b = s.hard.value().at(r, c + 1);
      CHECK(((a == 1.0 && b == 0.0) || (a == 0.0 && b == 1.0)));
      CHECK(s.relaxed.value().at(r, c) + s.relaxed.value().at(r, c + 1) ==
            doctest::Approx(1.0));
    }
  }

  // The straight-through hard sample must carry the relaxed gradient:
  // backward through hard and through relaxed agree.
  logits.zero_grad();
  backward(sum_all(mul(s.hard, Var::constant(Tensor::full({2, 4}, 2.0)))));
  const Tensor g_hard = logits.grad();
  logits.zero_grad();
  backward(sum_all(mul(s.relaxed, Var::constant(Tensor::full({2, 4}, 2.0)))));
  const Tensor g_relaxed = logits.grad();
  for (std::size_t i = 0; i < g_hard.data.size(); ++i) {
    CHECK(g_hard.data[i] == doctest::Approx(g_relaxed.data[i]));
  }

  CHECK_THROWS_AS(gumbel_softmax_st(logits, 0.0, rng), std::invalid_argument);

  // Low temperature drives the relaxed sample toward the hard one.
  Rng rng2(26);
  GumbelSample cold = gumbel_softmax_st(logits, 1e-4, rng2);
  for (std::size_t i = 0; i < cold.hard.value().data.size(); ++i) {
    CHECK(cold.relaxed.value().data[i] ==
          doctest::Approx(cold.hard.value().data[i]).epsilon(1e-6));
  }
}

TEST_CASE("gumbel sampling follows the logit distribution") {
  // P(pick column 0) for logits (l0, l1) under Gumbel noise is
  // softmax(l0 - l1); spot-check with a 2:1 ratio.
  Rng rng(27);
  const double l0 = std::log(2.0), l1 = 0.0;
  int picks = 0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    Var logits = Var::constant(Tensor({1, 2}, {l0, l1}));
    GumbelSample s = gumbel_softmax_st(logits, 1.0, rng);
    if (s.hard.value().at(0, 0) == 1.0) ++picks;
  }
  const double frac = static_cast<double>(picks) / trials;
  CHECK(frac == doctest::Approx(2.0 / 3.0).epsilon(0.03));
}
