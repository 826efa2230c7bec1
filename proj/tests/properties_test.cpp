#include <algorithm>
#include <cmath>
#include <doctest.h>

#include "graphgen/properties.hpp"
#include "oracles.hpp"

using namespace graphgen;

namespace {

Graph complete(int n) {
  std::vector<std::pair<int, int>> e;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) e.emplace_back(u, v);
  }
  return from_edge_list(e, n);
}

}  // namespace

TEST_CASE("property vector basics on K4") {
  const auto p = compute_properties(complete(4));
  CHECK(p[kNodes] == 4);
  CHECK(p[kEdges] == 6);
  CHECK(p[kDensity] == doctest::Approx(1.0));
  CHECK(p[kMinDegree] == 3);
  CHECK(p[kMaxDegree] == 3);
  CHECK(p[kAvgDegree] == doctest::Approx(3.0));
  CHECK(p[kAssortativity] == doctest::Approx(0.0));  // regular graph
  CHECK(p[kTriangles] == 4);
  CHECK(p[kAvgTrianglesPerEdge] == doctest::Approx(2.0));
  CHECK(p[kMaxTrianglesPerEdge] == 2);
  CHECK(p[kAvgLocalClustering] == doctest::Approx(1.0));
  CHECK(p[kGlobalClustering] == doctest::Approx(1.0));
  CHECK(p[kMaxKCore] == 3);
  CHECK(p[kDiameter] == 1);
}

TEST_CASE("triangle stats on K5") {
  const auto t = triangle_stats(complete(5));
  CHECK(t.total == 10);
  CHECK(t.avg_per_edge == doctest::Approx(3.0));
  CHECK(t.max_per_edge == 3);
}

TEST_CASE("assortativity of hand-solved graphs") {
  // Star: hubs only meet leaves.
  const Graph star = from_edge_list({{0, 1}, {0, 2}, {0, 3}, {0, 4}}, 5);
  CHECK(assortativity(star) == doctest::Approx(-1.0));
  // Path on four nodes: mixed ends.
  const Graph p4 = from_edge_list({{0, 1}, {1, 2}, {2, 3}}, 4);
  CHECK(assortativity(p4) == doctest::Approx(-0.5));
  CHECK(assortativity(complete(4)) == doctest::Approx(0.0));
}

TEST_CASE("k-core peels the chorded cycle to 2") {
  const Graph g = from_edge_list({{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {0, 2}}, 5);
  CHECK(max_kcore(g) == 2);
}

TEST_CASE("diameter uses the largest component") {
  const Graph two_k3 =
      from_edge_list({{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}, 6);
  CHECK(diameter(two_k3) == 1);
  // Largest component is the path 3-4-5-6 (4 nodes vs triangle's 3).
  const Graph mixed =
      from_edge_list({{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {5, 6}}, 7);
  CHECK(diameter(mixed) == 3);
}

TEST_CASE("community count regression values") {
  CHECK(count_communities(from_edge_list({{0, 1}}, 2)) == 1);
  const Graph two_k4 = from_edge_list({{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3},
                                       {4, 5}, {4, 6}, {4, 7}, {5, 6}, {5, 7}, {6, 7}},
                                      8);
  CHECK(count_communities(two_k4) == 2);
  const Graph edgeless{3, {}};
  CHECK(count_communities(edgeless) == 3);
}

TEST_CASE("all oracle-checkable properties match brute force on random graphs") {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 10));
    const Graph g = oracle::random_graph(n, rng.uniform(0.05, 0.95), rng);
    const auto p = compute_properties(g);
    CAPTURE(trial);
    CAPTURE(n);

    CHECK(p[kNodes] == doctest::Approx(g.n));
    CHECK(p[kEdges] == doctest::Approx(static_cast<double>(g.edges.size())));
    const double dens =
        g.n < 2 ? 0.0
                : 2.0 * static_cast<double>(g.edges.size()) / (static_cast<double>(g.n) * (g.n - 1));
    CHECK(p[kDensity] == doctest::Approx(dens).epsilon(1e-9));

    const auto deg = g.degrees();
    CHECK(p[kMinDegree] == doctest::Approx(*std::min_element(deg.begin(), deg.end())));
    CHECK(p[kMaxDegree] == doctest::Approx(*std::max_element(deg.begin(), deg.end())));
    double dsum = 0.0;
    for (int d : deg) dsum += d;
    CHECK(p[kAvgDegree] == doctest::Approx(dsum / g.n).epsilon(1e-9));

    CHECK(p[kAssortativity] == doctest::Approx(oracle::assortativity(g)).epsilon(1e-9));
    CHECK(p[kTriangles] == doctest::Approx(static_cast<double>(oracle::triangle_count(g))));
    CHECK(p[kAvgTrianglesPerEdge] ==
          doctest::Approx(oracle::avg_triangles_per_edge(g)).epsilon(1e-9));
    CHECK(p[kMaxTrianglesPerEdge] ==
          doctest::Approx(static_cast<double>(oracle::max_triangles_per_edge(g))));
    CHECK(p[kAvgLocalClustering] ==
          doctest::Approx(oracle::avg_local_clustering(g)).epsilon(1e-9));
    CHECK(p[kGlobalClustering] == doctest::Approx(oracle::global_clustering(g)).epsilon(1e-9));
    CHECK(p[kMaxKCore] == doctest::Approx(oracle::max_kcore(g)));
    CHECK(p[kDiameter] == doctest::Approx(oracle::diameter(g)));
  }
}

TEST_CASE("integer-valued properties are exact integers") {
  Rng rng(31337);
  for (int trial = 0; trial < 100; ++trial) {
    const Graph g = oracle::random_graph(2 + static_cast<int>(rng.uniform_int(0, 10)),
                                         rng.uniform(0.1, 0.9), rng);
    const auto p = compute_properties(g);
    for (int idx : {kNodes, kEdges, kMinDegree, kMaxDegree, kTriangles, kMaxTrianglesPerEdge,
                    kMaxKCore, kCommunities, kDiameter}) {
      CHECK(p[static_cast<std::size_t>(idx)] ==
            std::floor(p[static_cast<std::size_t>(idx)]));
    }
  }
}

TEST_CASE("property names are snake_case and order-stable") {
  const auto& names = property_names();
  CHECK(names[kNodes] == "nodes");
  CHECK(names[kEdges] == "edges");
  CHECK(names[kDensity] == "density");
  CHECK(names[kMinDegree] == "min_degree");
  CHECK(names[kMaxDegree] == "max_degree");
  CHECK(names[kAvgDegree] == "avg_degree");
  CHECK(names[kAssortativity] == "assortativity");
  CHECK(names[kTriangles] == "triangles");
  CHECK(names[kAvgTrianglesPerEdge] == "avg_triangles_per_edge");
  CHECK(names[kMaxTrianglesPerEdge] == "max_triangles_per_edge");
  CHECK(names[kAvgLocalClustering] == "avg_local_clustering");
  CHECK(names[kGlobalClustering] == "global_clustering");
  CHECK(names[kMaxKCore] == "max_kcore");
  CHECK(names[kCommunities] == "communities");
  CHECK(names[kDiameter] == "diameter");
}

TEST_CASE("condition strings parse, mask and round-trip") {
  const ConditionVector c = parse_condition("15,34,0.32,2,8,4.5,-0.046,17,1.5,8,0.4,0.35,4,4,4");
  CHECK(c.known_count() == 15);
  CHECK(c.values[kNodes] == doctest::Approx(15));
  CHECK(c.values[kAssortativity] == doctest::Approx(-0.046));
  CHECK(c.values[kDiameter] == doctest::Approx(4));

  const ConditionVector masked = parse_condition("15,34,_,_,_,_,_,_,_,_,_,_,_,_,4");
  CHECK(masked.known_count() == 3);
  CHECK(masked.known[kNodes]);
  CHECK(!masked.known[kDensity]);
  CHECK(masked.known[kDiameter]);

  const ConditionVector back = parse_condition(format_condition(masked));
  CHECK(back.known == masked.known);
  for (int i = 0; i < kPropertyCount; ++i) {
    if (back.known[static_cast<std::size_t>(i)]) {
      CHECK(back.values[static_cast<std::size_t>(i)] ==
            doctest::Approx(masked.values[static_cast<std::size_t>(i)]));
    }
  }

  CHECK_THROWS_AS(parse_condition("1,2,3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_condition("1,2,3,4,5,6,7,8,9,10,11,12,13,14,nope"),
                  std::invalid_argument);
}

TEST_CASE("normalize_condition z-scores known slots and sentinels hidden ones") {
  ConditionVector c;
  for (int i = 0; i < kPropertyCount; ++i) {
    c.values[static_cast<std::size_t>(i)] = 10.0;
    c.known[static_cast<std::size_t>(i)] = true;
  }
  c.known[3] = false;
  c.values[3] = 0.0;
  std::vector<double> mean(kPropertyCount, 4.0);
  std::vector<double> stddev(kPropertyCount, 2.0);
  const auto z = normalize_condition(c, mean, stddev);
  REQUIRE(z.size() == kPropertyCount);
  for (int i = 0; i < kPropertyCount; ++i) {
    if (i == 3) {
      CHECK(z[static_cast<std::size_t>(i)] == kMaskSentinel);
    } else {
      CHECK(z[static_cast<std::size_t>(i)] == doctest::Approx(3.0));
    }
  }
}

TEST_CASE("all_known lifts a property vector") {
  PropertyVector v{};
  v[kNodes] = 12;
  const ConditionVector c = ConditionVector::all_known(v);
  CHECK(c.known_count() == kPropertyCount);
  CHECK(c.values[kNodes] == 12);
}
