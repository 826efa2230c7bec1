#include "graphgen/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "graphgen/linalg.hpp"

namespace graphgen {

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  for (const auto& [u, v] : edges) {
    ++deg[static_cast<std::size_t>(u)];
    ++deg[static_cast<std::size_t>(v)];
  }
  return deg;
}

std::vector<std::vector<int>> Graph::adjacency_lists() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& [u, v] : edges) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  return adj;
}

bool Graph::has_isolated_nodes() const {
  auto deg = degrees();
  return std::any_of(deg.begin(), deg.end(), [](int d) { return d == 0; });
}

Graph from_edge_list(const std::vector<std::pair<int, int>>& edges, int n) {
  if (n < 0) throw std::invalid_argument("from_edge_list: negative node count");
  Graph g;
  g.n = n;
  g.edges.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n) {
      throw std::invalid_argument("from_edge_list: endpoint out of range");
    }
    if (a == b) throw std::invalid_argument("from_edge_list: self-loop");
    g.edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

Graph relabel(const Graph& g, const NodeOrdering& perm) {
  if (static_cast<int>(perm.size()) != g.n) {
    throw std::invalid_argument("relabel: permutation size mismatch");
  }
  std::vector<std::pair<int, int>> mapped;
  mapped.reserve(g.edges.size());
  for (const auto& [u, v] : g.edges) {
    mapped.emplace_back(perm[static_cast<std::size_t>(u)], perm[static_cast<std::size_t>(v)]);
  }
  return from_edge_list(mapped, g.n);
}

NodeOrdering order_bfs_degree(const Graph& g) {
  const auto deg = g.degrees();
  const auto adj = g.adjacency_lists();
  // Higher degree first, then smaller index.
  auto better = [&](int a, int b) {
    if (deg[static_cast<std::size_t>(a)] != deg[static_cast<std::size_t>(b)]) {
      return deg[static_cast<std::size_t>(a)] > deg[static_cast<std::size_t>(b)];
    }
    return a < b;
  };

  std::vector<char> visited(static_cast<std::size_t>(g.n), 0);
  NodeOrdering order;
  order.reserve(static_cast<std::size_t>(g.n));

  std::vector<int> roots(static_cast<std::size_t>(g.n));
  std::iota(roots.begin(), roots.end(), 0);
  std::sort(roots.begin(), roots.end(), better);

  for (int root : roots) {
    if (visited[static_cast<std::size_t>(root)]) continue;
    std::queue<int> frontier;
    frontier.push(root);
    visited[static_cast<std::size_t>(root)] = 1;
    while (!frontier.empty()) {
      int v = frontier.front();
      frontier.pop();
      order.push_back(v);
      auto nbrs = adj[static_cast<std::size_t>(v)];
      std::sort(nbrs.begin(), nbrs.end(), better);
      for (int u : nbrs) {
        if (!visited[static_cast<std::size_t>(u)]) {
          visited[static_cast<std::size_t>(u)] = 1;
          frontier.push(u);
        }
      }
    }
  }
  return order;
}

NodeOrdering order_degree(const Graph& g) {
  const auto deg = g.degrees();
  NodeOrdering order(static_cast<std::size_t>(g.n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (deg[static_cast<std::size_t>(a)] != deg[static_cast<std::size_t>(b)]) {
      return deg[static_cast<std::size_t>(a)] > deg[static_cast<std::size_t>(b)];
    }
    return a < b;
  });
  return order;
}

std::vector<double> pagerank_scores(const Graph& g) {
  const int n = g.n;
  if (n == 0) return {};
  const auto deg = g.degrees();
  const auto adj = g.adjacency_lists();
  const double damping = 0.85;
  const double base = (1.0 - damping) / n;

  std::vector<double> rank(static_cast<std::size_t>(n), 1.0 / n);
  std::vector<double> next(static_cast<std::size_t>(n));
  for (int iter = 0; iter < 200; ++iter) {
    double dangling = 0.0;
    for (int v = 0; v < n; ++v) {
      if (deg[static_cast<std::size_t>(v)] == 0) dangling += rank[static_cast<std::size_t>(v)];
    }
    const double spread = damping * dangling / n;
    for (int v = 0; v < n; ++v) {
      double in = 0.0;
      for (int u : adj[static_cast<std::size_t>(v)]) {
        in += rank[static_cast<std::size_t>(u)] / deg[static_cast<std::size_t>(u)];
      }
      next[static_cast<std::size_t>(v)] = base + damping * in + spread;
    }
    double delta = 0.0;
    for (int v = 0; v < n; ++v) {
      delta += std::abs(next[static_cast<std::size_t>(v)] - rank[static_cast<std::size_t>(v)]);
    }
    rank.swap(next);
    if (delta < 1e-9) break;
  }
  return rank;
}

NodeOrdering order_pagerank(const Graph& g) {
  const auto rank = pagerank_scores(g);
  NodeOrdering order(static_cast<std::size_t>(g.n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (rank[static_cast<std::size_t>(a)] != rank[static_cast<std::size_t>(b)]) {
      return rank[static_cast<std::size_t>(a)] > rank[static_cast<std::size_t>(b)];
    }
    return a < b;
  });
  return order;
}

NodeOrdering apply_ordering(const Graph& g, OrderingKind kind) {
  switch (kind) {
    case OrderingKind::BfsDegree:
      return order_bfs_degree(g);
    case OrderingKind::Degree:
      return order_degree(g);
    case OrderingKind::Pagerank:
      return order_pagerank(g);
  }
  throw std::logic_error("apply_ordering: unknown kind");
}

std::string ordering_name(OrderingKind kind) {
  switch (kind) {
    case OrderingKind::BfsDegree:
      return "bfs_degree";
    case OrderingKind::Degree:
      return "degree";
    case OrderingKind::Pagerank:
      return "pagerank";
  }
  throw std::logic_error("ordering_name: unknown kind");
}

OrderingKind ordering_from_name(const std::string& name) {
  if (name == "bfs_degree") return OrderingKind::BfsDegree;
  if (name == "degree") return OrderingKind::Degree;
  if (name == "pagerank") return OrderingKind::Pagerank;
  throw std::invalid_argument("ordering_from_name: unknown ordering '" + name + "'");
}

SpectralFeatures spectral_features(const Graph& g, int d) {
  const int n = g.n;
  SpectralFeatures feats;
  feats.matrix = Tensor::zeros({n, d});
  if (n == 0 || d == 0) return feats;

  const auto deg = g.degrees();
  std::vector<double> lap(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    if (deg[static_cast<std::size_t>(i)] > 0) {
      lap[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(i)] = 1.0;
    }
  }
  for (const auto& [u, v] : g.edges) {
    const double w = -1.0 / std::sqrt(static_cast<double>(deg[static_cast<std::size_t>(u)]) *
                                      static_cast<double>(deg[static_cast<std::size_t>(v)]));
    lap[static_cast<std::size_t>(u) * n + static_cast<std::size_t>(v)] = w;
    lap[static_cast<std::size_t>(v) * n + static_cast<std::size_t>(u)] = w;
  }

  const auto eig = jacobi_eigen(lap, n);
  const int take = std::min(d, n);
  for (int j = 0; j < take; ++j) {
    // Fix the sign so the first nonzero entry is positive.
    double sign = 1.0;
    for (int i = 0; i < n; ++i) {
      const double x = eig.vectors[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)];
      if (std::abs(x) > 1e-12) {
        sign = x > 0 ? 1.0 : -1.0;
        break;
      }
    }
    for (int i = 0; i < n; ++i) {
      feats.matrix.at(i, j) = sign * eig.vectors[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)];
    }
  }
  return feats;
}

AdjacencyMatrix to_padded_adjacency(const Graph& g, const NodeOrdering& ordering, int n_max) {
  if (g.n > n_max) throw std::invalid_argument("to_padded_adjacency: graph larger than n_max");
  if (static_cast<int>(ordering.size()) != g.n) {
    throw std::invalid_argument("to_padded_adjacency: ordering size mismatch");
  }
  std::vector<int> pos(static_cast<std::size_t>(g.n), -1);
  for (int p = 0; p < g.n; ++p) {
    const int v = ordering[static_cast<std::size_t>(p)];
    if (v < 0 || v >= g.n || pos[static_cast<std::size_t>(v)] != -1) {
      throw std::invalid_argument("to_padded_adjacency: ordering is not a permutation");
    }
    pos[static_cast<std::size_t>(v)] = p;
  }
  AdjacencyMatrix adj;
  adj.order = n_max;
  adj.entries.assign(static_cast<std::size_t>(n_max) * static_cast<std::size_t>(n_max), 0);
  for (const auto& [u, v] : g.edges) {
    const int pu = pos[static_cast<std::size_t>(u)];
    const int pv = pos[static_cast<std::size_t>(v)];
    adj.entries[static_cast<std::size_t>(pu) * n_max + static_cast<std::size_t>(pv)] = 1;
    adj.entries[static_cast<std::size_t>(pv) * n_max + static_cast<std::size_t>(pu)] = 1;
  }
  return adj;
}

std::vector<double> upper_triangle(const AdjacencyMatrix& adj) {
  const int n = adj.order;
  std::vector<double> tri;
  tri.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      tri.push_back(static_cast<double>(adj.at(i, j)));
    }
  }
  return tri;
}

AdjacencyMatrix adjacency_from_triangle(const std::vector<double>& triangle, int n_max, double threshold) {
  const std::size_t want = static_cast<std::size_t>(n_max) * (n_max - 1) / 2;
  if (triangle.size() != want) {
    throw std::invalid_argument("adjacency_from_triangle: slot count mismatch");
  }
  AdjacencyMatrix adj;
  adj.order = n_max;
  adj.entries.assign(static_cast<std::size_t>(n_max) * static_cast<std::size_t>(n_max), 0);
  std::size_t k = 0;
  for (int i = 0; i < n_max; ++i) {
    for (int j = i + 1; j < n_max; ++j, ++k) {
      if (triangle[k] > threshold) {
        adj.entries[static_cast<std::size_t>(i) * n_max + static_cast<std::size_t>(j)] = 1;
        adj.entries[static_cast<std::size_t>(j) * n_max + static_cast<std::size_t>(i)] = 1;
      }
    }
  }
  return adj;
}

std::optional<Graph> from_dense_adjacency(const std::vector<double>& probs, int n_max, double threshold) {
  if (probs.size() != static_cast<std::size_t>(n_max) * static_cast<std::size_t>(n_max)) {
    throw std::invalid_argument("from_dense_adjacency: matrix size mismatch");
  }
  std::vector<std::pair<int, int>> kept;
  for (int i = 0; i < n_max; ++i) {
    for (int j = i + 1; j < n_max; ++j) {
      const double p = 0.5 * (probs[static_cast<std::size_t>(i) * n_max + static_cast<std::size_t>(j)] +
                              probs[static_cast<std::size_t>(j) * n_max + static_cast<std::size_t>(i)]);
      if (p > threshold) kept.emplace_back(i, j);
    }
  }
  if (kept.empty()) return std::nullopt;

  // Compact away padding slots and any isolated positions.
  std::vector<int> newid(static_cast<std::size_t>(n_max), -1);
  int next = 0;
  for (const auto& [u, v] : kept) {
    if (newid[static_cast<std::size_t>(u)] == -1) newid[static_cast<std::size_t>(u)] = next++;
    if (newid[static_cast<std::size_t>(v)] == -1) newid[static_cast<std::size_t>(v)] = next++;
  }
  // Preserve position order, not first-touch order.
  next = 0;
  for (int i = 0; i < n_max; ++i) {
    if (newid[static_cast<std::size_t>(i)] != -1) newid[static_cast<std::size_t>(i)] = next++;
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(kept.size());
  for (const auto& [u, v] : kept) {
    edges.emplace_back(newid[static_cast<std::size_t>(u)], newid[static_cast<std::size_t>(v)]);
  }
  return from_edge_list(edges, next);
}

namespace {

std::vector<int> per_node_triangles(const Graph& g) {
  const auto adj = g.adjacency_lists();
  std::vector<int> tri(static_cast<std::size_t>(g.n), 0);
  for (const auto& [u, v] : g.edges) {
    const auto& a = adj[static_cast<std::size_t>(u)];
    const auto& b = adj[static_cast<std::size_t>(v)];
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] == b[j]) {
        ++tri[static_cast<std::size_t>(a[i])];
        ++i;
        ++j;
      } else if (a[i] < b[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }
  // Each triangle is found once per edge, so a corner is counted twice.
  for (auto& t : tri) t /= 2;
  return tri;
}

/// Joint 1-WL refinement: both graphs share the signature table so the
/// final color ids are comparable across them.
std::pair<std::vector<int>, std::vector<int>> refine_colors(const Graph& g1, const Graph& g2) {
  const auto adj1 = g1.adjacency_lists();
  const auto adj2 = g2.adjacency_lists();
  const auto d1 = g1.degrees();
  const auto d2 = g2.degrees();
  std::vector<int> c1(d1.begin(), d1.end());
  std::vector<int> c2(d2.begin(), d2.end());

  auto class_count = [](const std::vector<int>& v) {
    std::vector<int> s(v);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s.size();
  };

  for (int round = 0; round < std::max(g1.n, 1); ++round) {
    std::map<std::pair<int, std::vector<int>>, int> table;
    auto next_colors = [&](const std::vector<int>& colors,
                           const std::vector<std::vector<int>>& adj) {
      std::vector<int> out(colors.size());
      for (std::size_t v = 0; v < colors.size(); ++v) {
        std::vector<int> sig;
        sig.reserve(adj[v].size());
        for (int u : adj[v]) sig.push_back(colors[static_cast<std::size_t>(u)]);
        std::sort(sig.begin(), sig.end());
        auto key = std::make_pair(colors[v], std::move(sig));
        auto [it, inserted] = table.emplace(std::move(key), static_cast<int>(table.size()));
        out[v] = it->second;
      }
      return out;
    };
    auto n1 = next_colors(c1, adj1);
    auto n2 = next_colors(c2, adj2);
    // Stable once the joint partition stops splitting.
    const bool stable = class_count(n1) == class_count(c1) && class_count(n2) == class_count(c2);
    c1 = std::move(n1);
    c2 = std::move(n2);
    if (stable) break;
  }
  return {c1, c2};
}

bool extend_mapping(const Graph& g1, const Graph& g2,
                    const std::vector<std::vector<char>>& adj2_mat,
                    const std::vector<std::vector<int>>& adj1,
                    const std::vector<std::vector<int>>& candidates,
                    const std::vector<int>& order, std::size_t idx,
                    std::vector<int>& mapping, std::vector<char>& used) {
  if (idx == order.size()) return true;
  const int v = order[idx];
  for (int w : candidates[static_cast<std::size_t>(v)]) {
    if (used[static_cast<std::size_t>(w)]) continue;
    bool ok = true;
    for (int u : adj1[static_cast<std::size_t>(v)]) {
      const int mu = mapping[static_cast<std::size_t>(u)];
      if (mu != -1 && !adj2_mat[static_cast<std::size_t>(w)][static_cast<std::size_t>(mu)]) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    mapping[static_cast<std::size_t>(v)] = w;
    used[static_cast<std::size_t>(w)] = 1;
    if (extend_mapping(g1, g2, adj2_mat, adj1, candidates, order, idx + 1, mapping, used)) {
      return true;
    }
    mapping[static_cast<std::size_t>(v)] = -1;
    used[static_cast<std::size_t>(w)] = 0;
  }
  return false;
}

}  // namespace

bool are_isomorphic(const Graph& g1, const Graph& g2) {
  if (g1.n != g2.n) return false;
  if (g1.edge_count() != g2.edge_count()) return false;
  auto d1 = g1.degrees();
  auto d2 = g2.degrees();
  {
    auto s1 = d1, s2 = d2;
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
    if (s1 != s2) return false;
  }
  {
    auto t1 = per_node_triangles(g1);
    auto t2 = per_node_triangles(g2);
    std::sort(t1.begin(), t1.end());
    std::sort(t2.begin(), t2.end());
    if (t1 != t2) return false;
  }
  if (g1.n == 0) return true;

  const auto [c1, c2] = refine_colors(g1, g2);
  {
    auto h1 = c1, h2 = c2;
    std::sort(h1.begin(), h1.end());
    std::sort(h2.begin(), h2.end());
    if (h1 != h2) return false;
  }

  const auto adj1 = g1.adjacency_lists();
  std::vector<std::vector<char>> adj2_mat(
      static_cast<std::size_t>(g2.n), std::vector<char>(static_cast<std::size_t>(g2.n), 0));
  for (const auto& [u, v] : g2.edges) {
    adj2_mat[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = 1;
    adj2_mat[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = 1;
  }

  std::vector<std::vector<int>> candidates(static_cast<std::size_t>(g1.n));
  for (int v = 0; v < g1.n; ++v) {
    for (int w = 0; w < g2.n; ++w) {
      if (c1[static_cast<std::size_t>(v)] == c2[static_cast<std::size_t>(w)]) {
        candidates[static_cast<std::size_t>(v)].push_back(w);
      }
    }
    if (candidates[static_cast<std::size_t>(v)].empty()) return false;
  }

  // Most constrained nodes first keeps the search shallow.
  std::vector<int> order(static_cast<std::size_t>(g1.n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto ca = candidates[static_cast<std::size_t>(a)].size();
    const auto cb = candidates[static_cast<std::size_t>(b)].size();
    if (ca != cb) return ca < cb;
    return a < b;
  });

  std::vector<int> mapping(static_cast<std::size_t>(g1.n), -1);
  std::vector<char> used(static_cast<std::size_t>(g2.n), 0);
  return extend_mapping(g1, g2, adj2_mat, adj1, candidates, order, 0, mapping, used);
}

void write_edge_list(std::ostream& os, const Graph& g) {
  os << "# n " << g.n << "\n";
  for (const auto& [u, v] : g.edges) {
    os << u << " " << v << "\n";
  }
}

Graph read_edge_list(std::istream& is) {
  std::vector<std::pair<int, int>> edges;
  int n = 0;
  bool n_given = false;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      int value = 0;
      if (hs >> key >> value && key == "n") {
        n = value;
        n_given = true;
      }
      continue;
    }
    std::istringstream ls(line);
    int u = 0, v = 0;
    if (!(ls >> u >> v)) throw std::invalid_argument("read_edge_list: malformed line '" + line + "'");
    edges.emplace_back(u, v);
    n = std::max({n, u + 1, v + 1});
  }
  if (!n_given && edges.empty()) return Graph{};
  return from_edge_list(edges, n);
}

void write_dot(std::ostream& os, const Graph& g, const std::string& name) {
  os << "graph " << name << " {\n";
  for (int v = 0; v < g.n; ++v) {
    os << "  " << v << ";\n";
  }
  for (const auto& [u, v] : g.edges) {
    os << "  " << u << " -- " << v << ";\n";
  }
  os << "}\n";
}

}  // namespace graphgen
