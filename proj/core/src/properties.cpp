#include "graphgen/properties.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace graphgen {

const std::array<std::string, kPropertyCount>& property_names() {
  static const std::array<std::string, kPropertyCount> names = {
      "nodes",
      "edges",
      "density",
      "min_degree",
      "max_degree",
      "avg_degree",
      "assortativity",
      "triangles",
      "avg_triangles_per_edge",
      "max_triangles_per_edge",
      "avg_local_clustering",
      "global_clustering",
      "max_kcore",
      "communities",
      "diameter",
  };
  return names;
}

ConditionVector ConditionVector::all_known(const PropertyVector& v) {
  ConditionVector c;
  c.values = v;
  c.known.fill(true);
  return c;
}

int ConditionVector::known_count() const {
  return static_cast<int>(std::count(known.begin(), known.end(), true));
}

namespace {

struct TriangleCounts {
  std::vector<long long> per_edge;  // aligned with g.edges
  std::vector<long long> per_node;
};

TriangleCounts count_triangles(const Graph& g) {
  const auto adj = g.adjacency_lists();
  TriangleCounts tc;
  tc.per_edge.assign(g.edges.size(), 0);
  tc.per_node.assign(static_cast<std::size_t>(g.n), 0);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& [u, v] = g.edges[e];
    const auto& a = adj[static_cast<std::size_t>(u)];
    const auto& b = adj[static_cast<std::size_t>(v)];
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] == b[j]) {
        ++tc.per_edge[e];
        // Each triangle credits its third corner once per edge, which
        // over the three edges credits every corner exactly once.
        ++tc.per_node[static_cast<std::size_t>(a[i])];
        ++i;
        ++j;
      } else if (a[i] < b[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }
  return tc;
}

}  // namespace

double assortativity(const Graph& g) {
  const auto deg = g.degrees();
  const long long m = g.edge_count();
  if (m == 0) return 0.0;
  long long s_jk = 0, s_sum = 0, s_sq = 0;
  for (const auto& [u, v] : g.edges) {
    const long long j = deg[static_cast<std::size_t>(u)];
    const long long k = deg[static_cast<std::size_t>(v)];
    s_jk += j * k;
    s_sum += j + k;
    s_sq += j * j + k * k;
  }
  const double md = static_cast<double>(m);
  const double mean = static_cast<double>(s_sum) / (2.0 * md);
  const double num = static_cast<double>(s_jk) / md - mean * mean;
  const double den = static_cast<double>(s_sq) / (2.0 * md) - mean * mean;
  if (den == 0.0) return 0.0;
  return num / den;
}

TriangleStats triangle_stats(const Graph& g) {
  const auto tc = count_triangles(g);
  TriangleStats st;
  long long edge_sum = 0;
  for (long long t : tc.per_edge) {
    edge_sum += t;
    st.max_per_edge = std::max(st.max_per_edge, t);
  }
  st.total = edge_sum / 3;  // each triangle seen once per edge
  st.avg_per_edge = g.edges.empty() ? 0.0 : static_cast<double>(edge_sum) / static_cast<double>(g.edges.size());
  return st;
}

std::vector<double> local_clustering(const Graph& g) {
  const auto tc = count_triangles(g);
  const auto deg = g.degrees();
  std::vector<double> c(static_cast<std::size_t>(g.n), 0.0);
  for (int v = 0; v < g.n; ++v) {
    const long long d = deg[static_cast<std::size_t>(v)];
    if (d >= 2) {
      c[static_cast<std::size_t>(v)] =
          2.0 * static_cast<double>(tc.per_node[static_cast<std::size_t>(v)]) / static_cast<double>(d * (d - 1));
    }
  }
  return c;
}

double avg_local_clustering(const Graph& g) {
  if (g.n == 0) return 0.0;
  const auto c = local_clustering(g);
  return std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(g.n);
}

double global_clustering(const Graph& g) {
  const auto deg = g.degrees();
  long long wedges = 0;
  for (int d : deg) {
    wedges += static_cast<long long>(d) * (d - 1) / 2;
  }
  if (wedges == 0) return 0.0;
  const auto st = triangle_stats(g);
  return 3.0 * static_cast<double>(st.total) / static_cast<double>(wedges);
}

int max_kcore(const Graph& g) {
  if (g.n == 0) return 0;
  const auto adj = g.adjacency_lists();
  std::vector<int> deg = g.degrees();
  std::vector<char> removed(static_cast<std::size_t>(g.n), 0);
  int alive = g.n;
  int k = 0;
  while (alive > 0) {
    ++k;
    // Peel everything under degree k; what survives is the k-core.
    bool changed = true;
    while (changed) {
      changed = false;
      for (int v = 0; v < g.n; ++v) {
        if (!removed[static_cast<std::size_t>(v)] && deg[static_cast<std::size_t>(v)] < k) {
          removed[static_cast<std::size_t>(v)] = 1;
          --alive;
          changed = true;
          for (int u : adj[static_cast<std::size_t>(v)]) {
            if (!removed[static_cast<std::size_t>(u)]) --deg[static_cast<std::size_t>(u)];
          }
        }
      }
    }
  }
  return k - 1;
}

int count_communities(const Graph& g) {
  const long long m = g.edge_count();
  if (g.n == 0) return 0;
  if (m == 0) return g.n;

  const auto deg = g.degrees();
  // comm[v]: current community id = smallest member node index.
  std::vector<int> comm(static_cast<std::size_t>(g.n));
  std::iota(comm.begin(), comm.end(), 0);

  const double md = static_cast<double>(m);
  while (true) {
    std::map<std::pair<int, int>, long long> cross;
    for (const auto& [u, v] : g.edges) {
      int a = comm[static_cast<std::size_t>(u)];
      int b = comm[static_cast<std::size_t>(v)];
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      ++cross[{a, b}];
    }
    if (cross.empty()) break;

    std::vector<double> comm_deg(static_cast<std::size_t>(g.n), 0.0);
    for (int v = 0; v < g.n; ++v) {
      comm_deg[static_cast<std::size_t>(comm[static_cast<std::size_t>(v)])] += deg[static_cast<std::size_t>(v)];
    }

    double best_gain = 0.0;
    std::pair<int, int> best{-1, -1};
    for (const auto& [pair, count] : cross) {
      const double gain = static_cast<double>(count) / md -
                          comm_deg[static_cast<std::size_t>(pair.first)] *
                              comm_deg[static_cast<std::size_t>(pair.second)] / (2.0 * md * md);
      // Map iteration is already in ascending (a, b), so strict
      // comparison keeps the lexicographically smallest maximum.
      if (gain > best_gain) {
        best_gain = gain;
        best = pair;
      }
    }
    if (best.first < 0) break;
    for (int v = 0; v < g.n; ++v) {
      if (comm[static_cast<std::size_t>(v)] == best.second) comm[static_cast<std::size_t>(v)] = best.first;
    }
  }

  std::vector<int> ids(comm);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return static_cast<int>(ids.size());
}

int diameter(const Graph& g) {
  if (g.n == 0) return 0;
  const auto adj = g.adjacency_lists();

  // Largest component; scanning from node 0 upward makes the smallest
  // node index win size ties.
  std::vector<int> comp(static_cast<std::size_t>(g.n), -1);
  int best_comp = -1;
  int best_size = 0;
  int n_comps = 0;
  for (int s = 0; s < g.n; ++s) {
    if (comp[static_cast<std::size_t>(s)] != -1) continue;
    const int id = n_comps++;
    int size = 0;
    std::vector<int> stack{s};
    comp[static_cast<std::size_t>(s)] = id;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      ++size;
      for (int u : adj[static_cast<std::size_t>(v)]) {
        if (comp[static_cast<std::size_t>(u)] == -1) {
          comp[static_cast<std::size_t>(u)] = id;
          stack.push_back(u);
        }
      }
    }
    if (size > best_size) {
      best_size = size;
      best_comp = id;
    }
  }

  int diam = 0;
  std::vector<int> dist(static_cast<std::size_t>(g.n));
  for (int s = 0; s < g.n; ++s) {
    if (comp[static_cast<std::size_t>(s)] != best_comp) continue;
    std::fill(dist.begin(), dist.end(), -1);
    dist[static_cast<std::size_t>(s)] = 0;
    std::vector<int> frontier{s};
    std::size_t head = 0;
    while (head < frontier.size()) {
      const int v = frontier[head++];
      for (int u : adj[static_cast<std::size_t>(v)]) {
        if (dist[static_cast<std::size_t>(u)] == -1) {
          dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
          diam = std::max(diam, dist[static_cast<std::size_t>(u)]);
          frontier.push_back(u);
        }
      }
    }
  }
  return diam;
}

PropertyVector compute_properties(const Graph& g) {
  PropertyVector p{};
  const double n = static_cast<double>(g.n);
  const double m = static_cast<double>(g.edge_count());
  p[kNodes] = n;
  p[kEdges] = m;
  p[kDensity] = g.n > 1 ? 2.0 * m / (n * (n - 1.0)) : 0.0;

  const auto deg = g.degrees();
  if (g.n > 0) {
    p[kMinDegree] = static_cast<double>(*std::min_element(deg.begin(), deg.end()));
    p[kMaxDegree] = static_cast<double>(*std::max_element(deg.begin(), deg.end()));
    p[kAvgDegree] = 2.0 * m / n;
  }
  p[kAssortativity] = assortativity(g);

  const auto tri = triangle_stats(g);
  p[kTriangles] = static_cast<double>(tri.total);
  p[kAvgTrianglesPerEdge] = tri.avg_per_edge;
  p[kMaxTrianglesPerEdge] = static_cast<double>(tri.max_per_edge);
  p[kAvgLocalClustering] = avg_local_clustering(g);
  p[kGlobalClustering] = global_clustering(g);
  p[kMaxKCore] = static_cast<double>(max_kcore(g));
  p[kCommunities] = static_cast<double>(count_communities(g));
  p[kDiameter] = static_cast<double>(diameter(g));
  return p;
}

std::vector<double> normalize_condition(const ConditionVector& cond,
                                        const std::vector<double>& mean,
                                        const std::vector<double>& stddev) {
  if (mean.size() != kPropertyCount || stddev.size() != kPropertyCount) {
    throw std::invalid_argument("normalize_condition: stats must have 15 entries");
  }
  std::vector<double> out(kPropertyCount, kMaskSentinel);
  for (int i = 0; i < kPropertyCount; ++i) {
    if (!cond.known[static_cast<std::size_t>(i)]) continue;
    if (!(stddev[static_cast<std::size_t>(i)] > 0.0)) {
      throw std::invalid_argument("normalize_condition: nonpositive std for slot " +
                                  property_names()[static_cast<std::size_t>(i)]);
    }
    out[static_cast<std::size_t>(i)] =
        (cond.values[static_cast<std::size_t>(i)] - mean[static_cast<std::size_t>(i)]) /
        stddev[static_cast<std::size_t>(i)];
  }
  return out;
}

ConditionVector parse_condition(const std::string& text) {
  ConditionVector cond;
  std::vector<std::string> parts;
  std::string token;
  std::istringstream is(text);
  while (std::getline(is, token, ',')) parts.push_back(token);
  if (!text.empty() && text.back() == ',') parts.push_back("");
  if (parts.size() != kPropertyCount) {
    throw std::invalid_argument("parse_condition: expected 15 comma-separated slots, got " +
                                std::to_string(parts.size()));
  }
  for (int i = 0; i < kPropertyCount; ++i) {
    std::string s = parts[static_cast<std::size_t>(i)];
    s.erase(0, s.find_first_not_of(" \t"));
    const auto last = s.find_last_not_of(" \t");
    s.erase(last == std::string::npos ? 0 : last + 1);
    if (s == "_" || s.empty()) {
      cond.known[static_cast<std::size_t>(i)] = false;
      continue;
    }
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("parse_condition: bad number '" + s + "'");
    }
    if (used != s.size()) {
      throw std::invalid_argument("parse_condition: bad number '" + s + "'");
    }
    cond.values[static_cast<std::size_t>(i)] = v;
    cond.known[static_cast<std::size_t>(i)] = true;
  }
  return cond;
}

std::string format_condition(const ConditionVector& cond) {
  std::string out;
  char buf[64];
  for (int i = 0; i < kPropertyCount; ++i) {
    if (i > 0) out += ",";
    if (cond.known[static_cast<std::size_t>(i)]) {
      std::snprintf(buf, sizeof(buf), "%.6g", cond.values[static_cast<std::size_t>(i)]);
      out += buf;
    } else {
      out += "_";
    }
  }
  return out;
}

}  // namespace graphgen
