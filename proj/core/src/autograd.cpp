#include "graphgen/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace graphgen {

namespace {
constexpr double kBceClip = 1e-7;
}

Tensor& Node::ensure_grad() {
  if (grad.data.empty()) grad = Tensor::zeros(value.shape);
  return grad;
}

Var::Var(Tensor value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

void Var::zero_grad() { node_->grad = Tensor(); }

namespace {

Var make_result(Tensor value, std::vector<std::shared_ptr<Node>> parents,
                std::function<void(Node&)> backprop) {
  bool rg = false;
  for (const auto& p : parents) rg = rg || p->requires_grad;
  Var out(std::move(value), rg);
  if (rg) {
    out.node()->parents = std::move(parents);
    out.node()->backprop = std::move(backprop);
  }
  return out;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* who) {
  if (!a.same_shape(b)) throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

std::vector<int> lex_row_order(const Tensor& h) {
  const int n = h.rows();
  const int d = h.cols();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int j = 0; j < d; ++j) {
      const double x = h.at(a, j);
      const double y = h.at(b, j);
      if (x != y) return x < y;
    }
    return false;  // equal rows are interchangeable in a sum
  });
  return order;
}

}  // namespace

void backward(const Var& loss) {
  if (!loss.defined() || loss.value().numel() != 1) {
    throw std::invalid_argument("backward: loss must be a defined scalar");
  }
  if (!loss.requires_grad()) return;

  // Post-order DFS = topological order of the tape.
  std::vector<Node*> topo;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node().get(), 0}};
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      topo.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->ensure_grad().data[0] = 1.0;
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    Node* node = *it;
    if (node->backprop && !node->grad.data.empty()) node->backprop(*node);
  }
}

Var matmul(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
  Tensor out = Tensor::zeros({av.rows(), bv.cols()});
  matmul_acc(av, bv, out);
  auto pa = a.node();
  auto pb = b.node();
  return make_result(std::move(out), {pa, pb}, [pa, pb](Node& self) {
    if (pa->requires_grad) matmul_a_bt_acc(self.grad, pb->value, pa->ensure_grad());
    if (pb->requires_grad) matmul_at_b_acc(pa->value, self.grad, pb->ensure_grad());
  });
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.value().data[i];
  auto pa = a.node();
  auto pb = b.node();
  return make_result(std::move(out), {pa, pb}, [pa, pb](Node& self) {
    for (auto* p : {pa.get(), pb.get()}) {
      if (!p->requires_grad) continue;
      Tensor& g = p->ensure_grad();
      for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += self.grad.data[i];
    }
  });
}

Var add_rowvec(const Var& m, const Var& row) {
  const Tensor& mv = m.value();
  const Tensor& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != mv.cols()) {
    throw std::invalid_argument("add_rowvec: row must be [1 x cols]");
  }
  Tensor out = mv;
  for (int r = 0; r < mv.rows(); ++r) {
    for (int c = 0; c < mv.cols(); ++c) out.at(r, c) += rv.at(0, c);
  }
  auto pm = m.node();
  auto pr = row.node();
  return make_result(std::move(out), {pm, pr}, [pm, pr](Node& self) {
    if (pm->requires_grad) {
      Tensor& g = pm->ensure_grad();
      for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += self.grad.data[i];
    }
    if (pr->requires_grad) {
      Tensor& g = pr->ensure_grad();
      for (int r = 0; r < self.grad.rows(); ++r) {
        for (int c = 0; c < self.grad.cols(); ++c) g.at(0, c) += self.grad.at(r, c);
      }
    }
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.value().data[i];
  auto pa = a.node();
  auto pb = b.node();
  return make_result(std::move(out), {pa, pb}, [pa, pb](Node& self) {
    if (pa->requires_grad) {
      Tensor& g = pa->ensure_grad();
      for (std::size_t i = 0; i < g.data.size(); ++i) {
        g.data[i] += self.grad.data[i] * pb->value.data[i];
      }
    }
    if (pb->requires_grad) {
      Tensor& g = pb->ensure_grad();
      for (std::size_t i = 0; i < g.data.size(); ++i) {
        g.data[i] += self.grad.data[i] * pa->value.data[i];
      }
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a.value();
  for (double& x : out.data) x *= s;
  auto pa = a.node();
  return make_result(std::move(out), {pa}, [pa, s](Node& self) {
    if (!pa->requires_grad) return;
    Tensor& g = pa->ensure_grad();
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += s * self.grad.data[i];
  });
}

Var vexp(const Var& a) {
  Tensor out = a.value();
  for (double& x : out.data) x = std::exp(x);
  auto pa = a.node();
  return make_result(std::move(out), {pa}, [pa](Node& self) {
    if (!pa->requires_grad) return;
    Tensor& g = pa->ensure_grad();
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      g.data[i] += self.grad.data[i] * self.value.data[i];
    }
  });
}

Var relu(const Var& a) {
  Tensor out = a.value();
  for (double& x : out.data) x = x > 0.0 ? x : 0.0;
  auto pa = a.node();
  return make_result(std::move(out), {pa}, [pa](Node& self) {
    if (!pa->requires_grad) return;
    Tensor& g = pa->ensure_grad();
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      if (pa->value.data[i] > 0.0) g.data[i] += self.grad.data[i];
    }
  });
}

Var vtanh(const Var& a) {
  Tensor out = a.value();
  for (double& x : out.data) x = std::tanh(x);
  auto pa = a.node();
  return make_result(std::move(out), {pa}, [pa](Node& self) {
    if (!pa->requires_grad) return;
    Tensor& g = pa->ensure_grad();
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      const double y = self.value.data[i];
      g.data[i] += self.grad.data[i] * (1.0 - y * y);
    }
  });
}

Var layer_norm_rows(const Var& a) {
  constexpr double kEps = 1e-5;
  const Tensor& av = a.value();
  const int rows = av.rows();
  const int cols = av.cols();
  if (cols < 1) throw std::invalid_argument("layer_norm_rows: empty rows");
  Tensor out = Tensor::zeros(av.shape);
  std::vector<double> inv_sigma(static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    double mean = 0.0;
    for (int c = 0; c < cols; ++c) mean += av.at(r, c);
    mean /= cols;
    double var = 0.0;
    for (int c = 0; c < cols; ++c) {
      const double d = av.at(r, c) - mean;
      var += d * d;
    }
    var /= cols;
    const double inv = 1.0 / std::sqrt(var + kEps);
    inv_sigma[static_cast<std::size_t>(r)] = inv;
    for (int c = 0; c < cols; ++c) out.at(r, c) = (av.at(r, c) - mean) * inv;
  }
  auto pa = a.node();
  return make_result(std::move(out), {pa}, [pa, inv_sigma, cols](Node& self) {
    if (!pa->requires_grad) return;
    Tensor& g = pa->ensure_grad();
    // dx = (1/sigma) * (dy - mean(dy) - y * mean(dy * y)), per row
    for (int r = 0; r < self.grad.rows(); ++r) {
      double g_mean = 0.0;
      double gy_mean = 0.0;
      for (int c = 0; c < cols; ++c) {
        g_mean += self.grad.at(r, c);
        gy_mean += self.grad.at(r, c) * self.value.at(r, c);
      }
      g_mean /= cols;
      gy_mean /= cols;
      const double inv = inv_sigma[static_cast<std::size_t>(r)];
      for (int c = 0; c < cols; ++c) {
        g.at(r, c) +=
            inv * (self.grad.at(r, c) - g_mean - self.value.at(r, c) * gy_mean);
      }
    }
  });
}

Var sum_all(const Var& a) {
  Tensor out = Tensor::zeros({1, 1});
  for (double x : a.value().data) out.data[0] += x;
  auto pa = a.node();
  return make_result(std::move(out), {pa}, [pa](Node& self) {
    if (!pa->requires_grad) return;
    Tensor& g = pa->ensure_grad();
    for (double& x : g.data) x += self.grad.data[0];
  });
}

Var readout_sum_sorted(const Var& h) {
  const Tensor& hv = h.value();
  const int d = hv.cols();
  Tensor out = Tensor::zeros({1, d});
  for (int i : lex_row_order(hv)) {
    for (int j = 0; j < d; ++j) out.at(0, j) += hv.at(i, j);
  }
  auto ph = h.node();
  return make_result(std::move(out), {ph}, [ph](Node& self) {
    if (!ph->requires_grad) return;
    Tensor& g = ph->ensure_grad();
    for (int i = 0; i < g.rows(); ++i) {
      for (int j = 0; j < g.cols(); ++j) g.at(i, j) += self.grad.at(0, j);
    }
  });
}

Var concat_cols(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rows() != bv.rows()) throw std::invalid_argument("concat_cols: row count mismatch");
  const int r = av.rows();
  const int ca = av.cols();
  const int cb = bv.cols();
  Tensor out = Tensor::zeros({r, ca + cb});
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < ca; ++j) out.at(i, j) = av.at(i, j);
    for (int j = 0; j < cb; ++j) out.at(i, ca + j) = bv.at(i, j);
  }
  auto pa = a.node();
  auto pb = b.node();
  return make_result(std::move(out), {pa, pb}, [pa, pb, ca, cb](Node& self) {
    if (pa->requires_grad) {
      Tensor& g = pa->ensure_grad();
      for (int i = 0; i < g.rows(); ++i) {
        for (int j = 0; j < ca; ++j) g.at(i, j) += self.grad.at(i, j);
      }
    }
    if (pb->requires_grad) {
      Tensor& g = pb->ensure_grad();
      for (int i = 0; i < g.rows(); ++i) {
        for (int j = 0; j < cb; ++j) g.at(i, j) += self.grad.at(i, ca + j);
      }
    }
  });
}

Var stack_rows(const std::vector<Var>& rows) {
  if (rows.empty()) throw std::invalid_argument("stack_rows: no rows");
  const int c = rows.front().value().cols();
  Tensor out = Tensor::zeros({static_cast<int>(rows.size()), c});
  std::vector<std::shared_ptr<Node>> parents;
  parents.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Tensor& rv = rows[r].value();
    if (rv.rows() != 1 || rv.cols() != c) {
      throw std::invalid_argument("stack_rows: every row must be [1 x c]");
    }
    for (int j = 0; j < c; ++j) out.at(static_cast<int>(r), j) = rv.at(0, j);
    parents.push_back(rows[r].node());
  }
  auto parents_copy = parents;
  return make_result(std::move(out), std::move(parents), [parents_copy, c](Node& self) {
    for (std::size_t r = 0; r < parents_copy.size(); ++r) {
      Node* p = parents_copy[r].get();
      if (!p->requires_grad) continue;
      Tensor& g = p->ensure_grad();
      for (int j = 0; j < c; ++j) g.at(0, j) += self.grad.at(static_cast<int>(r), j);
    }
  });
}

Var take_stride(const Var& a, int offset, int stride) {
  const Tensor& av = a.value();
  if (stride < 1 || offset < 0 || offset >= av.cols()) {
    throw std::invalid_argument("take_stride: bad offset or stride");
  }
  const int k = (av.cols() - 1 - offset) / stride + 1;
  Tensor out = Tensor::zeros({av.rows(), k});
  for (int r = 0; r < av.rows(); ++r) {
    for (int j = 0; j < k; ++j) out.at(r, j) = av.at(r, offset + j * stride);
  }
  auto pa = a.node();
  return make_result(std::move(out), {pa}, [pa, offset, stride, k](Node& self) {
    if (!pa->requires_grad) return;
    Tensor& g = pa->ensure_grad();
    for (int r = 0; r < self.grad.rows(); ++r) {
      for (int j = 0; j < k; ++j) g.at(r, offset + j * stride) += self.grad.at(r, j);
    }
  });
}

Var gin_aggregate(const Var& h, const std::vector<std::vector<int>>& adj, const Var& eps) {
  const Tensor& hv = h.value();
  if (static_cast<std::size_t>(hv.rows()) != adj.size()) {
    throw std::invalid_argument("gin_aggregate: adjacency size mismatch");
  }
  if (eps.value().numel() != 1) throw std::invalid_argument("gin_aggregate: eps must be scalar");
  const int n = hv.rows();
  const int d = hv.cols();
  const double e = eps.value().data[0];

  std::vector<int> rank(static_cast<std::size_t>(n));
  {
    const auto order = lex_row_order(hv);
    for (int pos = 0; pos < n; ++pos) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos;
  }

  Tensor out = Tensor::zeros({n, d});
  for (int v = 0; v < n; ++v) {
    for (int j = 0; j < d; ++j) out.at(v, j) = (1.0 + e) * hv.at(v, j);
    auto nbrs = adj[static_cast<std::size_t>(v)];
    std::sort(nbrs.begin(), nbrs.end(), [&](int a, int b) {
      return rank[static_cast<std::size_t>(a)] < rank[static_cast<std::size_t>(b)];
    });
    for (int u : nbrs) {
      for (int j = 0; j < d; ++j) out.at(v, j) += hv.at(u, j);
    }
  }
  auto ph = h.node();
  auto pe = eps.node();
  auto adj_copy = adj;
  return make_result(std::move(out), {ph, pe}, [ph, pe, adj_copy, e](Node& self) {
    if (ph->requires_grad) {
      Tensor& g = ph->ensure_grad();
      for (int v = 0; v < self.grad.rows(); ++v) {
        for (int j = 0; j < self.grad.cols(); ++j) g.at(v, j) += (1.0 + e) * self.grad.at(v, j);
        for (int u : adj_copy[static_cast<std::size_t>(v)]) {
          for (int j = 0; j < self.grad.cols(); ++j) g.at(u, j) += self.grad.at(v, j);
        }
      }
    }
    if (pe->requires_grad) {
      double acc = 0.0;
      for (std::size_t i = 0; i < self.grad.data.size(); ++i) {
        acc += self.grad.data[i] * ph->value.data[i];
      }
      pe->ensure_grad().data[0] += acc;
    }
  });
}

Var pair_softmax(const Var& logits) {
  const Tensor& lv = logits.value();
  if (lv.cols() % 2 != 0) throw std::invalid_argument("pair_softmax: column count must be even");
  Tensor out = Tensor::zeros(lv.shape);
  for (int r = 0; r < lv.rows(); ++r) {
    for (int c = 0; c < lv.cols(); c += 2) {
      const double x0 = lv.at(r, c);
      const double x1 = lv.at(r, c + 1);
      const double m = std::max(x0, x1);
      const double e0 = std::exp(x0 - m);
      const double e1 = std::exp(x1 - m);
      out.at(r, c) = e0 / (e0 + e1);
      out.at(r, c + 1) = e1 / (e0 + e1);
    }
  }
  auto pl = logits.node();
  return make_result(std::move(out), {pl}, [pl](Node& self) {
    if (!pl->requires_grad) return;
    Tensor& g = pl->ensure_grad();
    for (int r = 0; r < self.grad.rows(); ++r) {
      for (int c = 0; c < self.grad.cols(); c += 2) {
        const double p0 = self.value.at(r, c);
        const double p1 = self.value.at(r, c + 1);
        const double g0 = self.grad.at(r, c);
        const double g1 = self.grad.at(r, c + 1);
        const double dot = g0 * p0 + g1 * p1;
        g.at(r, c) += p0 * (g0 - dot);
        g.at(r, c + 1) += p1 * (g1 - dot);
      }
    }
  });
}

Var bce_sum(const Var& probs, const Tensor& targets) {
  const Tensor& pv = probs.value();
  check_same_shape(pv, targets, "bce_sum");
  Tensor out = Tensor::zeros({1, 1});
  for (std::size_t i = 0; i < pv.data.size(); ++i) {
    const double p = pv.data[i];
    const double t = targets.data[i];
    out.data[0] -= t * std::log(std::max(p, kBceClip)) +
                   (1.0 - t) * std::log(std::max(1.0 - p, kBceClip));
  }
  auto pp = probs.node();
  auto tcopy = targets;
  return make_result(std::move(out), {pp}, [pp, tcopy](Node& self) {
    if (!pp->requires_grad) return;
    Tensor& g = pp->ensure_grad();
    const double go = self.grad.data[0];
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      const double p = pp->value.data[i];
      const double t = tcopy.data[i];
      double d = 0.0;
      if (p > kBceClip) d -= t / p;
      if (1.0 - p > kBceClip) d += (1.0 - t) / (1.0 - p);
      g.data[i] += go * d;
    }
  });
}

Var kl_sum(const Var& mu, const Var& logvar) {
  check_same_shape(mu.value(), logvar.value(), "kl_sum");
  Tensor out = Tensor::zeros({1, 1});
  for (std::size_t i = 0; i < mu.value().data.size(); ++i) {
    const double m = mu.value().data[i];
    const double lv = logvar.value().data[i];
    out.data[0] += -0.5 * (1.0 + lv - m * m - std::exp(lv));
  }
  auto pm = mu.node();
  auto pl = logvar.node();
  return make_result(std::move(out), {pm, pl}, [pm, pl](Node& self) {
    const double go = self.grad.data[0];
    if (pm->requires_grad) {
      Tensor& g = pm->ensure_grad();
      for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += go * pm->value.data[i];
    }
    if (pl->requires_grad) {
      Tensor& g = pl->ensure_grad();
      for (std::size_t i = 0; i < g.data.size(); ++i) {
        g.data[i] += go * 0.5 * (std::exp(pl->value.data[i]) - 1.0);
      }
    }
  });
}

Var mse_mean(const Var& pred, const Tensor& target) {
  const Tensor& pv = pred.value();
  check_same_shape(pv, target, "mse_mean");
  const double n = static_cast<double>(pv.numel());
  Tensor out = Tensor::zeros({1, 1});
  for (std::size_t i = 0; i < pv.data.size(); ++i) {
    const double d = pv.data[i] - target.data[i];
    out.data[0] += d * d / n;
  }
  auto pp = pred.node();
  auto tcopy = target;
  return make_result(std::move(out), {pp}, [pp, tcopy, n](Node& self) {
    if (!pp->requires_grad) return;
    Tensor& g = pp->ensure_grad();
    const double go = self.grad.data[0];
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      g.data[i] += go * 2.0 * (pp->value.data[i] - tcopy.data[i]) / n;
    }
  });
}

Var st_pair_argmax(const Var& probs) {
  const Tensor& pv = probs.value();
  if (pv.cols() % 2 != 0) throw std::invalid_argument("st_pair_argmax: column count must be even");
  Tensor out = Tensor::zeros(pv.shape);
  for (int r = 0; r < pv.rows(); ++r) {
    for (int c = 0; c < pv.cols(); c += 2) {
      if (pv.at(r, c) >= pv.at(r, c + 1)) {
        out.at(r, c) = 1.0;
      } else {
        out.at(r, c + 1) = 1.0;
      }
    }
  }
  auto pp = probs.node();
  return make_result(std::move(out), {pp}, [pp](Node& self) {
    if (!pp->requires_grad) return;
    Tensor& g = pp->ensure_grad();
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += self.grad.data[i];
  });
}

}  // namespace graphgen
