#include "graphgen/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>
#include <utility>

#include <json.hpp>

namespace graphgen {

namespace {

const std::array<std::string, kFamilyCount>& family_names() {
  static const std::array<std::string, kFamilyCount> names = {
      "path",
      "cycle",
      "wheel",
      "star",
      "ladder",
      "lollipop",
      "erdos_renyi",
      "newman_watts_strogatz",
      "watts_strogatz",
      "random_regular",
      "barabasi_albert",
      "dual_barabasi_albert",
      "extended_barabasi_albert",
      "holme_kim",
      "random_lobster",
      "stochastic_block_model",
      "random_partition",
  };
  return names;
}

/// Growing simple-graph scratchpad for the randomized builders.
struct EdgeSet {
  int n = 0;
  std::vector<std::set<int>> adj;
  std::vector<std::pair<int, int>> edges;

  explicit EdgeSet(int nodes) : n(nodes), adj(static_cast<std::size_t>(nodes)) {}

  bool has(int u, int v) const { return adj[static_cast<std::size_t>(u)].count(v) > 0; }
  int degree(int u) const { return static_cast<int>(adj[static_cast<std::size_t>(u)].size()); }

  bool add(int u, int v) {
    if (u == v || has(u, v)) return false;
    adj[static_cast<std::size_t>(u)].insert(v);
    adj[static_cast<std::size_t>(v)].insert(u);
    edges.emplace_back(std::min(u, v), std::max(u, v));
    return true;
  }

  void remove_at(std::size_t idx) {
    const auto [u, v] = edges[idx];
    adj[static_cast<std::size_t>(u)].erase(v);
    adj[static_cast<std::size_t>(v)].erase(u);
    edges[idx] = edges.back();
    edges.pop_back();
  }

  Graph finish() const { return from_edge_list(edges, n); }
};

Graph gen_path(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return from_edge_list(edges, n);
}

Graph gen_cycle(int n) {
  auto edges = gen_path(n).edges;
  edges.emplace_back(0, n - 1);
  return from_edge_list(edges, n);
}

Graph gen_star(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) edges.emplace_back(0, i);
  return from_edge_list(edges, n);
}

Graph gen_wheel(int n) {
  // Hub 0, rim cycle on 1..n-1.
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) {
    edges.emplace_back(0, i);
    edges.emplace_back(i, i + 1 == n ? 1 : i + 1);
  }
  return from_edge_list(edges, n);
}

Graph gen_ladder(int n) {
  const int k = n / 2;
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < k; ++i) {
    edges.emplace_back(i, i + 1);
    edges.emplace_back(k + i, k + i + 1);
  }
  for (int i = 0; i < k; ++i) edges.emplace_back(i, k + i);
  return from_edge_list(edges, 2 * k);
}

Graph gen_lollipop(int n, Rng& rng) {
  // Clique on m1 >= 3 nodes, tail path on the rest.
  const int m1 = rng.uniform_int(3, n - 1);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < m1; ++i) {
    for (int j = i + 1; j < m1; ++j) edges.emplace_back(i, j);
  }
  for (int i = m1 - 1; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return from_edge_list(edges, n);
}

Graph er_fixed(int n, double p, Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) edges.emplace_back(i, j);
    }
  }
  return from_edge_list(edges, n);
}

Graph gen_er(int n, Rng& rng) { return er_fixed(n, rng.uniform(0.05, 0.9), rng); }

int draw_lattice_k(int n, Rng& rng) {
  std::vector<int> feasible;
  for (int k : {2, 4, 6}) {
    if (k < n) feasible.push_back(k);
  }
  return feasible[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(feasible.size()) - 1))];
}

EdgeSet ring_lattice(int n, int k) {
  EdgeSet g(n);
  for (int j = 1; j <= k / 2; ++j) {
    for (int i = 0; i < n; ++i) g.add(i, (i + j) % n);
  }
  return g;
}

Graph gen_ws(int n, Rng& rng) {
  const int k = draw_lattice_k(n, rng);
  const double p = rng.uniform(0.05, 0.5);
  EdgeSet g = ring_lattice(n, k);
  for (int j = 1; j <= k / 2; ++j) {
    for (int i = 0; i < n; ++i) {
      if (!rng.bernoulli(p)) continue;
      const int old = (i + j) % n;
      if (g.degree(i) >= n - 1 || !g.has(i, old)) continue;
      int w = rng.uniform_int(0, n - 1);
      while (w == i || g.has(i, w)) w = rng.uniform_int(0, n - 1);
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        if (g.edges[e] == std::make_pair(std::min(i, old), std::max(i, old))) {
          g.remove_at(e);
          break;
        }
      }
      g.add(i, w);
    }
  }
  return g.finish();
}

Graph gen_nws(int n, Rng& rng) {
  const int k = draw_lattice_k(n, rng);
  const double p = rng.uniform(0.05, 0.5);
  EdgeSet g = ring_lattice(n, k);
  for (int j = 1; j <= k / 2; ++j) {
    for (int i = 0; i < n; ++i) {
      if (!rng.bernoulli(p)) continue;
      if (g.degree(i) >= n - 1) continue;
      int w = rng.uniform_int(0, n - 1);
      while (w == i || g.has(i, w)) w = rng.uniform_int(0, n - 1);
      g.add(i, w);
    }
  }
  return g.finish();
}

Graph gen_regular(int n, Rng& rng) {
  for (int outer = 0; outer < 50; ++outer) {
    std::vector<int> feasible;
    for (int d = 2; d <= std::min(8, n - 1); ++d) {
      if ((static_cast<long long>(n) * d) % 2 == 0) feasible.push_back(d);
    }
    if (feasible.empty()) throw std::invalid_argument("random_regular: no feasible degree for n");
    const int d = feasible[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(feasible.size()) - 1))];

    // Pairing model: shuffle the stub list until the matching is simple.
    std::vector<int> stubs;
    stubs.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(d));
    for (int v = 0; v < n; ++v) {
      for (int c = 0; c < d; ++c) stubs.push_back(v);
    }
    for (int attempt = 0; attempt < 200; ++attempt) {
      rng.shuffle(stubs);
      EdgeSet g(n);
      bool simple = true;
      for (std::size_t t = 0; t + 1 < stubs.size(); t += 2) {
        if (!g.add(stubs[t], stubs[t + 1])) {
          simple = false;
          break;
        }
      }
      if (simple) return g.finish();
    }
  }
  throw std::runtime_error("random_regular: pairing model failed to produce a simple graph");
}

std::vector<int> distinct_from_pool(const std::vector<int>& pool, int want, Rng& rng) {
  std::set<int> seen;
  std::vector<int> out;
  while (static_cast<int>(out.size()) < want) {
    const int x = pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(pool.size()) - 1))];
    if (seen.insert(x).second) out.push_back(x);
  }
  return out;
}

Graph gen_ba_core(int n, int m, Rng& rng) {
  EdgeSet g(n);
  std::vector<int> targets(static_cast<std::size_t>(m));
  std::iota(targets.begin(), targets.end(), 0);
  std::vector<int> repeated;
  for (int source = m; source < n; ++source) {
    for (int t : targets) g.add(source, t);
    repeated.insert(repeated.end(), targets.begin(), targets.end());
    repeated.insert(repeated.end(), static_cast<std::size_t>(m), source);
    if (source + 1 < n) targets = distinct_from_pool(repeated, m, rng);
  }
  return g.finish();
}

Graph gen_ba(int n, Rng& rng) {
  const int m = rng.uniform_int(1, std::min(5, n - 1));
  return gen_ba_core(n, m, rng);
}

Graph gen_dual_ba(int n, Rng& rng) {
  const int cap = std::min(5, n - 2);
  const int m1 = rng.uniform_int(1, cap);
  const int m2 = rng.uniform_int(1, cap);
  const double q = rng.uniform(0.1, 0.9);
  const int m_max = std::max(m1, m2);

  EdgeSet g(n);
  std::vector<int> repeated;
  for (int i = 1; i <= m_max; ++i) {
    g.add(0, i);
    repeated.push_back(0);
    repeated.push_back(i);
  }
  for (int source = m_max + 1; source < n; ++source) {
    const int m = rng.bernoulli(q) ? m1 : m2;
    const auto targets = distinct_from_pool(repeated, m, rng);
    for (int t : targets) g.add(source, t);
    repeated.insert(repeated.end(), targets.begin(), targets.end());
    repeated.insert(repeated.end(), static_cast<std::size_t>(m), source);
  }
  return g.finish();
}

/// Degree+1 weighted draw over nodes [0, limit) accepted by `ok`.
int weighted_pick(const EdgeSet& g, int limit, Rng& rng, const std::function<bool(int)>& ok) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    long long total = 0;
    for (int v = 0; v < limit; ++v) total += g.degree(v) + 1;
    double r = rng.uniform() * static_cast<double>(total);
    int pick = limit - 1;
    for (int v = 0; v < limit; ++v) {
      r -= static_cast<double>(g.degree(v) + 1);
      if (r <= 0.0) {
        pick = v;
        break;
      }
    }
    if (ok(pick)) return pick;
  }
  for (int v = 0; v < limit; ++v) {
    if (ok(v)) return v;
  }
  return -1;
}

Graph gen_ext_ba(int n, Rng& rng) {
  const int m = rng.uniform_int(1, std::min(5, n - 1));
  const double p = rng.uniform(0.05, 0.45);
  const double q = rng.uniform(0.05, 0.45);

  EdgeSet g(n);
  int nodes = m;
  while (nodes < n) {
    const double r = rng.uniform();
    if (r < p && nodes >= 2) {
      // Densify: m extra edges between existing nodes.
      for (int t = 0; t < m; ++t) {
        const int src = rng.uniform_int(0, nodes - 1);
        const int dst = weighted_pick(g, nodes, rng,
                                      [&](int v) { return v != src && !g.has(src, v); });
        if (dst >= 0) g.add(src, dst);
      }
    } else if (r < p + q && !g.edges.empty()) {
      // Rewire: keep one endpoint, move the other preferentially.
      for (int t = 0; t < m && !g.edges.empty(); ++t) {
        const std::size_t e = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(g.edges.size()) - 1));
        const auto [u, v] = g.edges[e];
        g.remove_at(e);
        const int w = weighted_pick(g, nodes, rng,
                                    [&](int x) { return x != u && !g.has(u, x); });
        if (w >= 0) {
          g.add(u, w);
        } else {
          g.add(u, v);
        }
      }
    } else {
      const int source = nodes++;
      const int links = std::min(m, source);
      for (int t = 0; t < links; ++t) {
        const int dst = weighted_pick(g, source, rng,
                                      [&](int v) { return !g.has(source, v); });
        if (dst >= 0) g.add(source, dst);
      }
    }
  }
  return g.finish();
}

Graph gen_hk(int n, Rng& rng) {
  const int m = rng.uniform_int(1, std::min(5, n - 1));
  const double p_triad = rng.uniform(0.1, 0.9);

  EdgeSet g(n);
  std::vector<int> repeated(static_cast<std::size_t>(m));
  std::iota(repeated.begin(), repeated.end(), 0);
  for (int source = m; source < n; ++source) {
    int count = 0;
    int last = -1;
    while (count < m) {
      bool linked = false;
      if (count > 0 && rng.bernoulli(p_triad)) {
        // Triad step: close a triangle through the previous target.
        std::vector<int> cands;
        for (int w : g.adj[static_cast<std::size_t>(last)]) {
          if (w != source && !g.has(source, w)) cands.push_back(w);
        }
        if (!cands.empty()) {
          const int w = cands[static_cast<std::size_t>(
              rng.uniform_int(0, static_cast<int>(cands.size()) - 1))];
          g.add(source, w);
          repeated.push_back(w);
          last = w;
          ++count;
          linked = true;
        }
      }
      if (linked) continue;
      int t = -1;
      for (int attempt = 0; attempt < 200; ++attempt) {
        const int c = repeated[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(repeated.size()) - 1))];
        if (c != source && !g.has(source, c)) {
          t = c;
          break;
        }
      }
      if (t < 0) {
        for (int c = 0; c < source && t < 0; ++c) {
          if (!g.has(source, c)) t = c;
        }
      }
      if (t < 0) break;  // source already adjacent to everyone earlier
      g.add(source, t);
      repeated.push_back(t);
      last = t;
      ++count;
    }
    repeated.insert(repeated.end(), static_cast<std::size_t>(m), source);
  }
  return g.finish();
}

Graph gen_lobster(int n, Rng& rng) {
  const double p1 = rng.uniform(0.2, 0.7);
  const double p2 = rng.uniform(0.2, 0.7);
  const int backbone = std::max(2, n / 2);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < backbone; ++i) edges.emplace_back(i, i + 1);
  int total = backbone;
  for (int i = 0; i < backbone; ++i) {
    if (total < n && rng.bernoulli(p1)) {
      const int leaf = total++;
      edges.emplace_back(i, leaf);
      if (total < n && rng.bernoulli(p2)) {
        const int leaf2 = total++;
        edges.emplace_back(leaf, leaf2);
      }
    }
  }
  return from_edge_list(edges, total);
}

Graph blocks_graph(int n, const std::vector<int>& sizes, double p_in, double p_out, Rng& rng) {
  std::vector<int> block(static_cast<std::size_t>(n));
  int v = 0;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    for (int c = 0; c < sizes[b]; ++c) block[static_cast<std::size_t>(v++)] = static_cast<int>(b);
  }
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = block[static_cast<std::size_t>(i)] == block[static_cast<std::size_t>(j)] ? p_in : p_out;
      if (rng.bernoulli(p)) edges.emplace_back(i, j);
    }
  }
  return from_edge_list(edges, n);
}

Graph gen_sbm(int n, Rng& rng) {
  const int blocks = rng.uniform_int(2, std::min(5, n / 2));
  const double p_in = rng.uniform(0.3, 0.9);
  const double p_out = rng.uniform(0.01, 0.2);
  std::vector<int> sizes(static_cast<std::size_t>(blocks), n / blocks);
  for (int b = 0; b < n % blocks; ++b) ++sizes[static_cast<std::size_t>(b)];
  return blocks_graph(n, sizes, p_in, p_out, rng);
}

Graph gen_partition(int n, Rng& rng) {
  const int blocks = rng.uniform_int(2, std::min(5, n / 2));
  const double p_in = rng.uniform(0.3, 0.9);
  const double p_out = rng.uniform(0.01, 0.2);
  std::vector<int> sizes(static_cast<std::size_t>(blocks), 2);
  for (int extra = 0; extra < n - 2 * blocks; ++extra) {
    ++sizes[static_cast<std::size_t>(rng.uniform_int(0, blocks - 1))];
  }
  return blocks_graph(n, sizes, p_in, p_out, rng);
}

Graph drop_isolated(const Graph& g) {
  const auto deg = g.degrees();
  std::vector<int> newid(static_cast<std::size_t>(g.n), -1);
  int kept = 0;
  for (int v = 0; v < g.n; ++v) {
    if (deg[static_cast<std::size_t>(v)] > 0) newid[static_cast<std::size_t>(v)] = kept++;
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(g.edges.size());
  for (const auto& [u, v] : g.edges) {
    edges.emplace_back(newid[static_cast<std::size_t>(u)], newid[static_cast<std::size_t>(v)]);
  }
  return from_edge_list(edges, kept);
}

Graph generate_once(GraphFamily f, int n, Rng& rng) {
  switch (f) {
    case GraphFamily::Path:
      return gen_path(n);
    case GraphFamily::Cycle:
      return gen_cycle(n);
    case GraphFamily::Wheel:
      return gen_wheel(n);
    case GraphFamily::Star:
      return gen_star(n);
    case GraphFamily::Ladder:
      return gen_ladder(n % 2 == 0 ? n : n - 1);
    case GraphFamily::Lollipop:
      return gen_lollipop(n, rng);
    case GraphFamily::ErdosRenyi:
      return gen_er(n, rng);
    case GraphFamily::NewmanWattsStrogatz:
      return gen_nws(n, rng);
    case GraphFamily::WattsStrogatz:
      return gen_ws(n, rng);
    case GraphFamily::RandomRegular:
      return gen_regular(n, rng);
    case GraphFamily::BarabasiAlbert:
      return gen_ba(n, rng);
    case GraphFamily::DualBarabasiAlbert:
      return gen_dual_ba(n, rng);
    case GraphFamily::ExtendedBarabasiAlbert:
      return gen_ext_ba(n, rng);
    case GraphFamily::HolmeKim:
      return gen_hk(n, rng);
    case GraphFamily::RandomLobster:
      return gen_lobster(n, rng);
    case GraphFamily::StochasticBlockModel:
      return gen_sbm(n, rng);
    case GraphFamily::RandomPartition:
      return gen_partition(n, rng);
  }
  throw std::logic_error("generate_once: unknown family");
}

bool is_deterministic_family(GraphFamily f) {
  switch (f) {
    case GraphFamily::Path:
    case GraphFamily::Cycle:
    case GraphFamily::Wheel:
    case GraphFamily::Star:
    case GraphFamily::Ladder:
      return true;
    default:
      return false;
  }
}

}  // namespace

const std::string& family_name(GraphFamily f) {
  return family_names()[static_cast<std::size_t>(f)];
}

GraphFamily family_from_name(const std::string& name) {
  const auto& names = family_names();
  for (int i = 0; i < kFamilyCount; ++i) {
    if (names[static_cast<std::size_t>(i)] == name) return static_cast<GraphFamily>(i);
  }
  throw std::invalid_argument("family_from_name: unknown family '" + name + "'");
}

int family_min_nodes(GraphFamily f) {
  switch (f) {
    case GraphFamily::Path:
    case GraphFamily::ErdosRenyi:
    case GraphFamily::BarabasiAlbert:
      return 2;
    case GraphFamily::Cycle:
    case GraphFamily::Star:
    case GraphFamily::RandomRegular:
    case GraphFamily::DualBarabasiAlbert:
    case GraphFamily::ExtendedBarabasiAlbert:
    case GraphFamily::HolmeKim:
      return 3;
    case GraphFamily::Wheel:
    case GraphFamily::Ladder:
    case GraphFamily::Lollipop:
    case GraphFamily::RandomLobster:
    case GraphFamily::StochasticBlockModel:
    case GraphFamily::RandomPartition:
      return 4;
    case GraphFamily::NewmanWattsStrogatz:
    case GraphFamily::WattsStrogatz:
      return 5;
  }
  throw std::logic_error("family_min_nodes: unknown family");
}

std::array<double, kFamilyCount> paper_proportions() {
  // Printed sample counts; they total 1,367,703, so shares are
  // renormalized against that sum.
  static const std::array<long long, kFamilyCount> counts = {
      91,      // path
      91,      // cycle
      91,      // wheel
      91,      // star
      46,      // ladder
      4145,    // lollipop
      122568,  // erdos_renyi
      122567,  // newman_watts_strogatz
      204280,  // watts_strogatz
      7000,    // random_regular
      250136,  // barabasi_albert
      122568,  // dual_barabasi_albert
      122568,  // extended_barabasi_albert
      122567,  // holme_kim
      81713,   // random_lobster
      125468,  // stochastic_block_model
      81713,   // random_partition
  };
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), 0LL));
  std::array<double, kFamilyCount> out{};
  for (int i = 0; i < kFamilyCount; ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<double>(counts[static_cast<std::size_t>(i)]) / total;
  }
  return out;
}

std::array<double, kFamilyCount> uniform_proportions() {
  std::array<double, kFamilyCount> out{};
  out.fill(1.0 / kFamilyCount);
  return out;
}

Graph erdos_renyi_graph(int n, double p, Rng& rng) { return er_fixed(n, p, rng); }

Graph make_family_graph(GraphFamily f, int n, Rng& rng) {
  n = std::max(n, family_min_nodes(f));
  if (is_deterministic_family(f)) return generate_once(f, n, rng);

  Graph last;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    last = generate_once(f, n, rng);
    if (last.n >= 2 && !last.has_isolated_nodes()) return last;
    if (attempt >= 20) {
      const Graph repaired = drop_isolated(last);
      if (repaired.n >= 2) return repaired;
    }
  }
  throw std::runtime_error("make_family_graph: could not produce a valid " + family_name(f));
}

Graph sample_graph(GraphFamily f, Rng& rng, int n_lo, int n_hi) {
  const int lo = std::max(n_lo, family_min_nodes(f));
  const int hi = std::max(n_hi, lo);
  const int n = rng.uniform_int(lo, hi);
  return make_family_graph(f, n, rng);
}

std::array<long long, kFamilyCount> apportion_counts(long long total,
                                                     const std::array<double, kFamilyCount>& weights) {
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("apportion_counts: negative weight");
    wsum += w;
  }
  if (wsum <= 0.0) throw std::invalid_argument("apportion_counts: weights sum to zero");

  std::array<long long, kFamilyCount> counts{};
  std::array<double, kFamilyCount> remainders{};
  long long assigned = 0;
  for (int i = 0; i < kFamilyCount; ++i) {
    const double exact = static_cast<double>(total) * weights[static_cast<std::size_t>(i)] / wsum;
    counts[static_cast<std::size_t>(i)] = static_cast<long long>(std::floor(exact));
    remainders[static_cast<std::size_t>(i)] = exact - std::floor(exact);
    assigned += counts[static_cast<std::size_t>(i)];
  }
  std::array<int, kFamilyCount> order{};
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (remainders[static_cast<std::size_t>(a)] != remainders[static_cast<std::size_t>(b)]) {
      return remainders[static_cast<std::size_t>(a)] > remainders[static_cast<std::size_t>(b)];
    }
    return a < b;
  });
  for (int i = 0; assigned < total; ++i) {
    ++counts[static_cast<std::size_t>(order[static_cast<std::size_t>(i % kFamilyCount)])];
    ++assigned;
  }
  return counts;
}

namespace {

int enumerated_n(GraphFamily f, long long j, int n_min, int n_max) {
  if (f == GraphFamily::Ladder) {
    const int khi = std::max(2, n_max / 2);
    const int klo = std::min(5, khi);
    const int span = khi - klo + 1;
    return 2 * (klo + static_cast<int>(j % span));
  }
  const int hi = n_max;
  const int lo = std::max(family_min_nodes(f), std::min(n_min, hi));
  const int span = hi - lo + 1;
  return lo + static_cast<int>(j % span);
}

const char* kParamRangesDoc =
    "erdos_renyi p in [0.05,0.9]; watts_strogatz and newman_watts_strogatz k in {2,4,6} (k<n), "
    "rewire/shortcut p in [0.05,0.5]; barabasi_albert m in [1,5]; dual_barabasi_albert m1,m2 in "
    "[1,5], pick prob in [0.1,0.9]; extended_barabasi_albert m in [1,5], add/rewire probs in "
    "[0.05,0.45] each; holme_kim m in [1,5], triad prob in [0.1,0.9]; random_regular d in "
    "[2,min(8,n-1)] with n*d even; random_lobster backbone n/2, attach probs in [0.2,0.7]; "
    "stochastic_block_model and random_partition 2-5 blocks, p_in in [0.3,0.9], p_out in "
    "[0.01,0.2]; lollipop clique size in [3,n-1]; path/cycle/wheel/star/ladder enumerated over "
    "their node range";

}  // namespace

DatasetManifest build_dataset(const BuildSpec& spec,
                              const std::function<void(const DatasetRecord&)>& sink) {
  if (spec.total < 0) throw std::invalid_argument("build_dataset: negative total");
  if (spec.n_max < 2) throw std::invalid_argument("build_dataset: n_max must be at least 2");
  if (spec.n_min < 2 || spec.n_min > spec.n_max) {
    throw std::invalid_argument("build_dataset: n_min out of range");
  }

  DatasetManifest manifest;
  manifest.seed = spec.seed;
  manifest.n_max = spec.n_max;
  manifest.n_min = spec.n_min;
  manifest.total = spec.total;
  manifest.proportions = spec.proportions;
  manifest.counts = apportion_counts(spec.total, spec.proportions);
  manifest.param_ranges = kParamRangesDoc;

  long long id = 0;
  for (int fi = 0; fi < kFamilyCount; ++fi) {
    const auto f = static_cast<GraphFamily>(fi);
    for (long long j = 0; j < manifest.counts[static_cast<std::size_t>(fi)]; ++j, ++id) {
      Rng rng = Rng::for_stream(spec.seed, static_cast<std::uint64_t>(id));
      DatasetRecord rec;
      rec.id = id;
      rec.family = f;
      if (is_deterministic_family(f)) {
        rec.graph = make_family_graph(f, enumerated_n(f, j, spec.n_min, spec.n_max), rng);
      } else {
        rec.graph = sample_graph(f, rng, spec.n_min, spec.n_max);
      }
      rec.properties = compute_properties(rec.graph);
      sink(rec);
    }
  }
  return manifest;
}

SplitIndices split_dataset(const std::vector<DatasetRecord>& records,
                           const std::array<double, 3>& ratios, std::uint64_t seed) {
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split_dataset: ratios must sum to 1");
  }
  for (double r : ratios) {
    if (r < 0.0) throw std::invalid_argument("split_dataset: negative ratio");
  }

  SplitIndices out;
  for (int fi = 0; fi < kFamilyCount; ++fi) {
    std::vector<std::size_t> stratum;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].family == static_cast<GraphFamily>(fi)) stratum.push_back(i);
    }
    if (stratum.empty()) continue;
    // Stream ids offset far above any record id so split shuffles never
    // reuse a record stream.
    Rng rng = Rng::for_stream(seed, (1ULL << 40) + static_cast<std::uint64_t>(fi));
    rng.shuffle(stratum);

    const auto n = static_cast<long long>(stratum.size());
    std::array<long long, 3> sizes{};
    std::array<double, 3> rem{};
    long long assigned = 0;
    for (int k = 0; k < 3; ++k) {
      const double exact = static_cast<double>(n) * ratios[static_cast<std::size_t>(k)];
      sizes[static_cast<std::size_t>(k)] = static_cast<long long>(std::floor(exact));
      rem[static_cast<std::size_t>(k)] = exact - std::floor(exact);
      assigned += sizes[static_cast<std::size_t>(k)];
    }
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (rem[static_cast<std::size_t>(a)] != rem[static_cast<std::size_t>(b)]) {
        return rem[static_cast<std::size_t>(a)] > rem[static_cast<std::size_t>(b)];
      }
      return a < b;
    });
    for (int k = 0; assigned < n; ++k) {
      ++sizes[static_cast<std::size_t>(order[static_cast<std::size_t>(k % 3)])];
      ++assigned;
    }

    std::size_t cursor = 0;
    for (long long c = 0; c < sizes[0]; ++c) out.train.push_back(stratum[cursor++]);
    for (long long c = 0; c < sizes[1]; ++c) out.val.push_back(stratum[cursor++]);
    for (long long c = 0; c < sizes[2]; ++c) out.test.push_back(stratum[cursor++]);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

SplitIndices ood_split(const std::vector<DatasetRecord>& records) {
  SplitIndices out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const int n = records[i].graph.n;
    if (n >= 41 && n <= 60) {
      out.test.push_back(i);
    } else {
      out.train.push_back(i);
    }
  }
  return out;
}

NormalizationStats normalization_stats(const std::vector<DatasetRecord>& records,
                                       const std::vector<std::size_t>& indices) {
  NormalizationStats stats;
  stats.mean.assign(kPropertyCount, 0.0);
  stats.stddev.assign(kPropertyCount, 1.0);
  stats.constant.assign(kPropertyCount, false);
  if (indices.empty()) {
    stats.constant.assign(kPropertyCount, true);
    return stats;
  }

  const double n = static_cast<double>(indices.size());
  for (std::size_t i : indices) {
    for (int p = 0; p < kPropertyCount; ++p) {
      stats.mean[static_cast<std::size_t>(p)] += records[i].properties[static_cast<std::size_t>(p)];
    }
  }
  for (int p = 0; p < kPropertyCount; ++p) stats.mean[static_cast<std::size_t>(p)] /= n;

  for (int p = 0; p < kPropertyCount; ++p) {
    double ss = 0.0;
    for (std::size_t i : indices) {
      const double d = records[i].properties[static_cast<std::size_t>(p)] - stats.mean[static_cast<std::size_t>(p)];
      ss += d * d;
    }
    const double var = ss / n;  // population convention
    if (var > 0.0) {
      stats.stddev[static_cast<std::size_t>(p)] = std::sqrt(var);
    } else {
      stats.stddev[static_cast<std::size_t>(p)] = 1.0;
      stats.constant[static_cast<std::size_t>(p)] = true;
    }
  }
  return stats;
}

void write_record_jsonl(std::ostream& os, const DatasetRecord& rec) {
  nlohmann::json j;
  std::vector<int> flat;
  flat.reserve(rec.graph.edges.size() * 2);
  for (const auto& [u, v] : rec.graph.edges) {
    flat.push_back(u);
    flat.push_back(v);
  }
  j["edges"] = flat;
  j["family"] = family_name(rec.family);
  j["id"] = rec.id;
  j["n"] = rec.graph.n;
  j["properties"] = std::vector<double>(rec.properties.begin(), rec.properties.end());
  os << j.dump() << "\n";
}

DatasetRecord parse_record_jsonl(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  DatasetRecord rec;
  rec.id = j.at("id").get<long long>();
  rec.family = family_from_name(j.at("family").get<std::string>());
  const auto flat = j.at("edges").get<std::vector<int>>();
  if (flat.size() % 2 != 0) throw std::invalid_argument("parse_record_jsonl: odd edge array");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(flat.size() / 2);
  for (std::size_t i = 0; i + 1 < flat.size(); i += 2) edges.emplace_back(flat[i], flat[i + 1]);
  rec.graph = from_edge_list(edges, j.at("n").get<int>());
  const auto props = j.at("properties").get<std::vector<double>>();
  if (props.size() != kPropertyCount) throw std::invalid_argument("parse_record_jsonl: bad property count");
  std::copy(props.begin(), props.end(), rec.properties.begin());
  return rec;
}

std::vector<DatasetRecord> read_records_jsonl(std::istream& is) {
  std::vector<DatasetRecord> records;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    records.push_back(parse_record_jsonl(line));
  }
  return records;
}

void save_manifest(std::ostream& os, const DatasetManifest& manifest) {
  nlohmann::json j;
  j["seed"] = manifest.seed;
  j["n_max"] = manifest.n_max;
  j["n_min"] = manifest.n_min;
  j["total"] = manifest.total;
  nlohmann::json counts;
  nlohmann::json props;
  for (int i = 0; i < kFamilyCount; ++i) {
    counts[family_name(static_cast<GraphFamily>(i))] = manifest.counts[static_cast<std::size_t>(i)];
    props[family_name(static_cast<GraphFamily>(i))] = manifest.proportions[static_cast<std::size_t>(i)];
  }
  j["counts"] = counts;
  j["proportions"] = props;
  j["split_ratios"] = manifest.split_ratios;
  if (!manifest.normalization.mean.empty()) {
    j["normalization"] = {
        {"mean", manifest.normalization.mean},
        {"stddev", manifest.normalization.stddev},
        {"constant", manifest.normalization.constant},
    };
  }
  j["param_ranges"] = manifest.param_ranges;
  if (!manifest.config_hash.empty()) j["config_hash"] = manifest.config_hash;
  os << j.dump(2) << "\n";
}

DatasetManifest load_manifest(std::istream& is) {
  nlohmann::json j;
  is >> j;
  DatasetManifest manifest;
  manifest.seed = j.at("seed").get<std::uint64_t>();
  manifest.n_max = j.at("n_max").get<int>();
  manifest.n_min = j.at("n_min").get<int>();
  manifest.total = j.at("total").get<long long>();
  for (int i = 0; i < kFamilyCount; ++i) {
    const auto& name = family_name(static_cast<GraphFamily>(i));
    manifest.counts[static_cast<std::size_t>(i)] = j.at("counts").at(name).get<long long>();
    manifest.proportions[static_cast<std::size_t>(i)] = j.at("proportions").at(name).get<double>();
  }
  const auto ratios = j.at("split_ratios").get<std::vector<double>>();
  if (ratios.size() != 3) throw std::invalid_argument("load_manifest: bad split_ratios");
  std::copy(ratios.begin(), ratios.end(), manifest.split_ratios.begin());
  if (j.contains("normalization")) {
    manifest.normalization.mean = j["normalization"].at("mean").get<std::vector<double>>();
    manifest.normalization.stddev = j["normalization"].at("stddev").get<std::vector<double>>();
    manifest.normalization.constant = j["normalization"].at("constant").get<std::vector<bool>>();
  }
  manifest.param_ranges = j.value("param_ranges", "");
  manifest.config_hash = j.value("config_hash", "");
  return manifest;
}

}  // namespace graphgen
