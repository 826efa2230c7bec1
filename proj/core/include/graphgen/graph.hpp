#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graphgen/tensor.hpp"

namespace graphgen {

/// Undirected simple graph. Edges are stored as (u, v) with u < v,
/// sorted and deduplicated; node indices live in [0, n).
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;

  int edge_count() const { return static_cast<int>(edges.size()); }
  std::vector<int> degrees() const;
  std::vector<std::vector<int>> adjacency_lists() const;
  bool has_isolated_nodes() const;
};

using NodeOrdering = std::vector<int>;

/// Binary adjacency padded to a fixed order (entries past the graph's
/// node count stay zero).
struct AdjacencyMatrix {
  int order = 0;
  std::vector<std::uint8_t> entries;  // order x order, row-major

  std::uint8_t at(int i, int j) const { return entries[static_cast<std::size_t>(i) * static_cast<std::size_t>(order) + static_cast<std::size_t>(j)]; }
};

/// Per-node features from eigenvectors of the normalized Laplacian;
/// row i belongs to node i, columns sorted by ascending eigenvalue.
struct SpectralFeatures {
  Tensor matrix;  // n x d
};

/// Validates, deduplicates and canonicalizes an edge list.
/// Throws std::invalid_argument on out-of-range endpoints or self-loops.
Graph from_edge_list(const std::vector<std::pair<int, int>>& edges, int n);

/// Applies a permutation: node v becomes perm[v].
Graph relabel(const Graph& g, const NodeOrdering& perm);

/// BFS order rooted at the highest-degree node; queued neighbors are
/// visited in descending degree (ties by smaller index); remaining
/// components are entered through their highest-degree node.
NodeOrdering order_bfs_degree(const Graph& g);

/// Descending degree, ties by node index.
NodeOrdering order_degree(const Graph& g);

/// Descending PageRank (damping 0.85, power iteration until the L1
/// change drops below 1e-9, capped at 200 iterations), ties by index.
NodeOrdering order_pagerank(const Graph& g);

/// The scores behind order_pagerank; sums to 1 over all nodes.
std::vector<double> pagerank_scores(const Graph& g);

enum class OrderingKind { BfsDegree, Degree, Pagerank };
NodeOrdering apply_ordering(const Graph& g, OrderingKind kind);
std::string ordering_name(OrderingKind kind);
OrderingKind ordering_from_name(const std::string& name);

/// Eigenvectors of L = I - D^{-1/2} A D^{-1/2} for the d smallest
/// eigenvalues, zero-padded when n < d. Each column has unit norm and
/// its first nonzero entry is made positive so targets are stable.
SpectralFeatures spectral_features(const Graph& g, int d);

/// Adjacency under `ordering`, zero-padded to n_max. Position p holds
/// the node ordering[p].
AdjacencyMatrix to_padded_adjacency(const Graph& g, const NodeOrdering& ordering, int n_max);

/// Upper-triangle slots of a padded adjacency, row-major, as 0/1 values.
std::vector<double> upper_triangle(const AdjacencyMatrix& adj);

/// Inverse of upper_triangle for an n_max x n_max matrix.
AdjacencyMatrix adjacency_from_triangle(const std::vector<double>& triangle, int n_max, double threshold);

/// Symmetrizes a dense probability matrix as (P + P^T)/2, keeps edges
/// strictly above `threshold`, drops isolated rows and compacts indices.
/// Returns nullopt when no edge survives (an empty generation).
std::optional<Graph> from_dense_adjacency(const std::vector<double>& probs, int n_max, double threshold);

/// Exact isomorphism test: early rejection on cheap invariants, color
/// refinement, then backtracking restricted to compatible color classes.
bool are_isomorphic(const Graph& g1, const Graph& g2);

/// Edge-list text: one "u v" pair per line, 0-based.
void write_edge_list(std::ostream& os, const Graph& g);
Graph read_edge_list(std::istream& is);
void write_dot(std::ostream& os, const Graph& g, const std::string& name = "g");

}  // namespace graphgen
