#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <set>
#include <sstream>

#include "graphgen/dataset.hpp"

using namespace graphgen;

namespace {

std::vector<DatasetRecord> collect(const BuildSpec& spec, DatasetManifest* manifest = nullptr) {
  std::vector<DatasetRecord> records;
  DatasetManifest m = build_dataset(spec, [&](const DatasetRecord& r) { records.push_back(r); });
  if (manifest != nullptr) *manifest = m;
  return records;
}

DatasetRecord path_record(long long id, int n) {
  DatasetRecord rec;
  rec.id = id;
  rec.family = GraphFamily::Path;
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  rec.graph = from_edge_list(e, n);
  rec.properties = compute_properties(rec.graph);
  return rec;
}

}  // namespace

TEST_CASE("family names round-trip") {
  for (int fi = 0; fi < kFamilyCount; ++fi) {
    const auto f = static_cast<GraphFamily>(fi);
    CHECK(family_from_name(family_name(f)) == f);
  }
  CHECK_THROWS(family_from_name("no_such_family"));
}

TEST_CASE("paper proportions are a distribution") {
  const auto p = paper_proportions();
  double sum = 0.0;
  for (double x : p) {
    CHECK(x >= 0.0);
    sum += x;
  }
  CHECK(sum == doctest::Approx(1.0));
  const auto u = uniform_proportions();
  for (double x : u) CHECK(x == doctest::Approx(1.0 / kFamilyCount));
}

TEST_CASE("apportion_counts hits the total exactly") {
  const auto p = paper_proportions();
  for (long long total : {0LL, 1LL, 17LL, 100LL, 9999LL}) {
    const auto counts = apportion_counts(total, p);
    long long sum = 0;
    for (long long c : counts) {
      CHECK(c >= 0);
      sum += c;
    }
    CHECK(sum == total);
  }
}

TEST_CASE("every family produces structurally valid graphs") {
  Rng rng(5);
  for (int fi = 0; fi < kFamilyCount; ++fi) {
    const auto f = static_cast<GraphFamily>(fi);
    for (int trial = 0; trial < 25; ++trial) {
      const int n = std::max(family_min_nodes(f), 2 + static_cast<int>(rng.uniform_int(0, 28)));
      const Graph g = make_family_graph(f, n, rng);
      CAPTURE(family_name(f));
      CAPTURE(n);
      REQUIRE(g.n >= 2);
      CHECK(g.n <= n);
      CHECK(!g.has_isolated_nodes());
      std::set<std::pair<int, int>> uniq(g.edges.begin(), g.edges.end());
      CHECK(uniq.size() == g.edges.size());
      for (const auto& [u, v] : g.edges) {
        CHECK(u < v);  // canonical, no self-loops
        CHECK(v < g.n);
      }
    }
  }
}

TEST_CASE("erdos_renyi_graph with p = 1 is complete") {
  Rng rng(9);
  const Graph g = erdos_renyi_graph(6, 1.0, rng);
  CHECK(g.n == 6);
  CHECK(g.edges.size() == 15);
}

TEST_CASE("build_dataset is deterministic and labeled correctly") {
  BuildSpec spec;
  spec.total = 120;
  spec.seed = 77;
  spec.n_max = 24;
  spec.n_min = 10;

  DatasetManifest m1, m2;
  const auto a = collect(spec, &m1);
  const auto b = collect(spec, &m2);
  REQUIRE(a.size() == 120);
  REQUIRE(b.size() == 120);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == static_cast<long long>(i));
    CHECK(a[i].family == b[i].family);
    CHECK(a[i].graph.n == b[i].graph.n);
    CHECK(a[i].graph.edges == b[i].graph.edges);
    CHECK(a[i].properties == b[i].properties);
    // Labels are live, not stale copies.
    CHECK(a[i].properties == compute_properties(a[i].graph));
    CHECK(a[i].graph.n <= spec.n_max);
  }
  CHECK(m1.total == 120);
  long long csum = 0;
  for (long long c : m1.counts) csum += c;
  CHECK(csum == 120);
}

TEST_CASE("build_dataset with total 0 yields nothing but succeeds") {
  BuildSpec spec;
  spec.total = 0;
  const auto rec = collect(spec);
  CHECK(rec.empty());
}

TEST_CASE("build_dataset validates its spec") {
  BuildSpec bad;
  bad.total = -1;
  CHECK_THROWS_AS(build_dataset(bad, [](const DatasetRecord&) {}), std::invalid_argument);
  BuildSpec bad2;
  bad2.total = 1;
  bad2.n_min = 50;
  bad2.n_max = 20;
  CHECK_THROWS_AS(build_dataset(bad2, [](const DatasetRecord&) {}), std::invalid_argument);
}

TEST_CASE("split_dataset partitions the records deterministically") {
  BuildSpec spec;
  spec.total = 400;
  spec.seed = 3;
  const auto records = collect(spec);
  const std::array<double, 3> ratios{0.8, 0.1, 0.1};
  const SplitIndices s1 = split_dataset(records, ratios, 3);
  const SplitIndices s2 = split_dataset(records, ratios, 3);
  CHECK(s1.train == s2.train);
  CHECK(s1.val == s2.val);
  CHECK(s1.test == s2.test);

  std::set<std::size_t> all;
  all.insert(s1.train.begin(), s1.train.end());
  all.insert(s1.val.begin(), s1.val.end());
  all.insert(s1.test.begin(), s1.test.end());
  CHECK(all.size() == records.size());
  CHECK(s1.train.size() + s1.val.size() + s1.test.size() == records.size());
  // Roughly the requested shape.
  CHECK(s1.train.size() >= 300);
  CHECK(s1.val.size() >= 20);
  CHECK(s1.test.size() >= 20);

  const SplitIndices other = split_dataset(records, ratios, 4);
  CHECK(other.train != s1.train);
}

TEST_CASE("ood_split boundaries") {
  std::vector<DatasetRecord> records;
  for (int n : {10, 40, 41, 50, 59, 60, 61, 80}) records.push_back(path_record(0, n));
  const SplitIndices s = ood_split(records);
  auto in = [](const std::vector<std::size_t>& v, std::size_t i) {
    return std::find(v.begin(), v.end(), i) != v.end();
  };
  CHECK(in(s.train, 0));  // n=10
  CHECK(in(s.train, 1));  // n=40
  CHECK(in(s.test, 2));   // n=41
  CHECK(in(s.test, 3));   // n=50
  CHECK(in(s.test, 4));   // n=59
  CHECK(in(s.test, 5));   // n=60
  CHECK(in(s.train, 6));  // n=61
  CHECK(in(s.train, 7));  // n=80
  CHECK(s.val.empty());
}

TEST_CASE("normalization stats use the population convention") {
  std::vector<DatasetRecord> records{path_record(0, 4), path_record(1, 8)};
  const NormalizationStats st = normalization_stats(records, {0, 1});
  REQUIRE(st.mean.size() == static_cast<std::size_t>(kPropertyCount));
  CHECK(st.mean[kNodes] == doctest::Approx(6.0));
  // Population std of {4, 8} is 2.
  CHECK(st.stddev[kNodes] == doctest::Approx(2.0));
  CHECK(!st.constant[kNodes]);
  // Diameter n-1: {3, 7} varies; min degree is 1 for both paths -> constant.
  CHECK(st.constant[kMinDegree]);
  CHECK(st.stddev[kMinDegree] == doctest::Approx(1.0));
}

TEST_CASE("jsonl records round-trip exactly") {
  BuildSpec spec;
  spec.total = 40;
  spec.seed = 12;
  const auto records = collect(spec);
  std::stringstream ss;
  for (const auto& r : records) write_record_jsonl(ss, r);
  const auto back = read_records_jsonl(ss);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(back[i].id == records[i].id);
    CHECK(back[i].family == records[i].family);
    CHECK(back[i].graph.n == records[i].graph.n);
    CHECK(back[i].graph.edges == records[i].graph.edges);
    for (int p = 0; p < kPropertyCount; ++p) {
      CHECK(back[i].properties[static_cast<std::size_t>(p)] ==
            doctest::Approx(records[i].properties[static_cast<std::size_t>(p)]).epsilon(1e-12));
    }
  }
}

TEST_CASE("parse_record_jsonl rejects garbage") {
  CHECK_THROWS(parse_record_jsonl("not json"));
  CHECK_THROWS(parse_record_jsonl("{\"id\":0}"));
}

TEST_CASE("manifest round-trips including the config hash") {
  DatasetManifest m;
  m.seed = 99;
  m.n_max = 64;
  m.n_min = 12;
  m.total = 1234;
  m.counts[0] = 10;
  m.proportions = paper_proportions();
  m.param_ranges = "documented ranges";
  m.config_hash = "00ff00ff00ff00ff";
  m.normalization.mean.assign(kPropertyCount, 1.5);
  m.normalization.stddev.assign(kPropertyCount, 2.5);
  m.normalization.constant.assign(kPropertyCount, false);

  std::stringstream ss;
  save_manifest(ss, m);
  const DatasetManifest back = load_manifest(ss);
  CHECK(back.seed == 99);
  CHECK(back.n_max == 64);
  CHECK(back.n_min == 12);
  CHECK(back.total == 1234);
  CHECK(back.counts[0] == 10);
  CHECK(back.config_hash == "00ff00ff00ff00ff");
  CHECK(back.split_ratios[0] == doctest::Approx(0.8));
  REQUIRE(back.normalization.mean.size() == static_cast<std::size_t>(kPropertyCount));
  CHECK(back.normalization.mean[3] == doctest::Approx(1.5));
}

TEST_CASE("dataset records honor the n range") {
  BuildSpec spec;
  spec.total = 200;
  spec.seed = 21;
  spec.n_min = 12;
  spec.n_max = 20;
  const auto records = collect(spec);
  for (const auto& r : records) {
    CHECK(r.graph.n <= 20);
    // Families may shrink below n_min when isolated nodes are dropped or the
    // family minimum interferes, but never above n_max.
  }
}
