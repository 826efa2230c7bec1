#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "graphgen/graph.hpp"
#include "graphgen/properties.hpp"
#include "graphgen/rng.hpp"

namespace graphgen {

enum class GraphFamily : int {
  Path = 0,
  Cycle,
  Wheel,
  Star,
  Ladder,
  Lollipop,
  ErdosRenyi,
  NewmanWattsStrogatz,
  WattsStrogatz,
  RandomRegular,
  BarabasiAlbert,
  DualBarabasiAlbert,
  ExtendedBarabasiAlbert,
  HolmeKim,
  RandomLobster,
  StochasticBlockModel,
  RandomPartition,
};

inline constexpr int kFamilyCount = 17;

const std::string& family_name(GraphFamily f);
GraphFamily family_from_name(const std::string& name);

struct DatasetRecord {
  long long id = 0;
  GraphFamily family = GraphFamily::Path;
  Graph graph;
  PropertyVector properties{};
};

/// Per-property mean/std over a training split, population convention.
/// A constant column keeps std 1 and raises its flag.
struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<bool> constant;
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  int n_max = 0;
  int n_min = 0;
  long long total = 0;
  std::array<long long, kFamilyCount> counts{};
  std::array<double, kFamilyCount> proportions{};
  std::array<double, 3> split_ratios{0.8, 0.1, 0.1};
  NormalizationStats normalization;  // empty until a split is taken
  std::string param_ranges;          // human-readable, fixed at build time
  std::string config_hash;           // producing run's config hash, if any
};

/// Table-4 sample shares renormalized to sum to 1 (the printed counts
/// total 1,367,703, not the nominal million).
std::array<double, kFamilyCount> paper_proportions();
std::array<double, kFamilyCount> uniform_proportions();

/// A graph of the family on (about) n nodes with parameters drawn from
/// the documented ranges. Isolated-node outcomes are resampled up to 20
/// times, then isolated nodes are dropped; the result always has
/// 2 <= result.n <= n and no isolated nodes.
Graph make_family_graph(GraphFamily f, int n, Rng& rng);

/// G(n, p) with an explicit edge probability (p = 1 gives K_n).
Graph erdos_renyi_graph(int n, double p, Rng& rng);

/// Draws n uniformly from [n_lo, n_hi] (raised to the family's minimum)
/// and delegates to make_family_graph.
Graph sample_graph(GraphFamily f, Rng& rng, int n_lo, int n_hi);

int family_min_nodes(GraphFamily f);

struct BuildSpec {
  long long total = 0;
  std::array<double, kFamilyCount> proportions = paper_proportions();
  std::uint64_t seed = 0;
  int n_max = 100;
  int n_min = 10;
};

/// Generates `total` records and hands each to `sink` in id order.
/// Family counts come from the proportions by largest remainder; record
/// i uses the RNG stream derived from (seed, i), so regeneration is
/// exact and order-independent. Deterministic families cycle through
/// their n range instead of sampling it.
DatasetManifest build_dataset(const BuildSpec& spec,
                              const std::function<void(const DatasetRecord&)>& sink);

/// Largest-remainder apportionment of `total` over `weights`.
std::array<long long, kFamilyCount> apportion_counts(long long total,
                                                     const std::array<double, kFamilyCount>& weights);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Stratified by family: within each family the records are shuffled by
/// a (seed, family)-derived stream and cut by largest-remainder sizes.
SplitIndices split_dataset(const std::vector<DatasetRecord>& records,
                           const std::array<double, 3>& ratios, std::uint64_t seed);

/// Size-based generalization split: train keeps n <= 40 and n > 60,
/// test gets 41 <= n <= 60.
SplitIndices ood_split(const std::vector<DatasetRecord>& records);

NormalizationStats normalization_stats(const std::vector<DatasetRecord>& records,
                                       const std::vector<std::size_t>& indices);

/// One record per line: {"edges":[u0,v0,...],"family":...,"id":...,
/// "n":...,"properties":[15 raw values]}.
void write_record_jsonl(std::ostream& os, const DatasetRecord& rec);
DatasetRecord parse_record_jsonl(const std::string& line);
std::vector<DatasetRecord> read_records_jsonl(std::istream& is);

void save_manifest(std::ostream& os, const DatasetManifest& manifest);
DatasetManifest load_manifest(std::istream& is);

}  // namespace graphgen
