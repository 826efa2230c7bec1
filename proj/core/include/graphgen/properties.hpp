#pragma once

#include <array>
#include <string>
#include <vector>

#include "graphgen/graph.hpp"

namespace graphgen {

/// Slot layout of the 15-entry structural property vector.
enum PropertyIndex : int {
  kNodes = 0,
  kEdges = 1,
  kDensity = 2,
  kMinDegree = 3,
  kMaxDegree = 4,
  kAvgDegree = 5,
  kAssortativity = 6,
  kTriangles = 7,
  kAvgTrianglesPerEdge = 8,
  kMaxTrianglesPerEdge = 9,
  kAvgLocalClustering = 10,
  kGlobalClustering = 11,
  kMaxKCore = 12,
  kCommunities = 13,
  kDiameter = 14,
  kPropertyCount = 15,
};

using PropertyVector = std::array<double, kPropertyCount>;

const std::array<std::string, kPropertyCount>& property_names();

/// Sentinel written into a condition slot the model must ignore. It is
/// applied after normalization, so it sits far outside the z-score range.
inline constexpr double kMaskSentinel = -100.0;

/// A property vector plus per-slot visibility. Hidden slots carry no
/// usable value and serialize as the sentinel.
struct ConditionVector {
  PropertyVector values{};
  std::array<bool, kPropertyCount> known{};

  static ConditionVector all_known(const PropertyVector& v);
  int known_count() const;
};

/// All 15 properties of a graph. Degenerate cases: assortativity of a
/// degree-regular graph is 0, clustering of degree<2 nodes is 0, the
/// diameter is taken over the largest connected component.
PropertyVector compute_properties(const Graph& g);

struct TriangleStats {
  long long total = 0;
  double avg_per_edge = 0.0;
  long long max_per_edge = 0;
};

/// Pearson correlation of degrees across edge endpoints; 0 when the
/// variance vanishes (e.g. regular graphs).
double assortativity(const Graph& g);
TriangleStats triangle_stats(const Graph& g);
/// Per-node 2*T(v) / (d(v)*(d(v)-1)); 0 for degree < 2.
std::vector<double> local_clustering(const Graph& g);
double avg_local_clustering(const Graph& g);
/// 3 * triangles / wedges; 0 when the graph has no wedge.
double global_clustering(const Graph& g);
/// Largest k with a nonempty k-core (every node of the core has >= k
/// neighbors inside it).
int max_kcore(const Graph& g);
/// Communities left by greedy modularity maximization: merge the pair
/// with the best positive gain e_ab/m - d_a*d_b/(2 m^2), ties toward the
/// lexicographically smallest pair of community ids (a community's id is
/// the smallest node index it contains). Edgeless graphs keep n singletons.
int count_communities(const Graph& g);
/// Longest shortest path inside the largest component (most nodes, ties
/// toward the component containing the smallest node index).
int diameter(const Graph& g);

/// z-scores the known slots against mean/std and writes the sentinel
/// into hidden ones. mean/std must have 15 entries; std entries are > 0.
std::vector<double> normalize_condition(const ConditionVector& cond,
                                        const std::vector<double>& mean,
                                        const std::vector<double>& stddev);

/// Parses "15,34,0.32,_,...": 15 comma-separated slots, `_` hides one.
ConditionVector parse_condition(const std::string& text);
std::string format_condition(const ConditionVector& cond);

}  // namespace graphgen
