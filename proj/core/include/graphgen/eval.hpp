#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "graphgen/dataset.hpp"
#include "graphgen/graph.hpp"
#include "graphgen/properties.hpp"
#include "graphgen/rng.hpp"

namespace graphgen {

/// 100 * |a - b| / (|a| + |b|), 0 when both are 0. Range [0, 100].
double smape(double a, double b);

/// How conditions are presented to the generator. `Within` and `Ood`
/// both use fully observed conditions; the tag records which split the
/// records came from.
enum class EvalProtocol { Within, Ood, Masked, Triplet };
std::string protocol_name(EvalProtocol p);

/// Hides i ~ U[1, 8] distinct slots. Hidden values are zeroed so any
/// accidental read downstream shows up as a wrong answer.
ConditionVector mask_protocol(const ConditionVector& c, Rng& rng);

/// Keeps nodes, edges and `keep` observed, hides the other 12. keep in
/// {nodes, edges} degenerates to two observed slots (flagged by evaluate).
ConditionVector triplet_protocol(const ConditionVector& c, int keep);

struct MetricRow {
  std::string name;
  double mae = 0.0;
  double smape = 0.0;
  long long count = 0;  // scored entries behind the means
};

struct MetricReport {
  EvalProtocol protocol = EvalProtocol::Within;
  std::vector<MetricRow> rows;  // one per property, raw values
  MetricRow all;                // aggregate over z-scored values
  long long requested = 0;
  long long generated = 0;
  long long failures = 0;
  double failure_rate = 0.0;
  int triplet_target = -1;
  bool degenerate_triplet = false;
};

/// Produces a graph for a (possibly masked) condition; nullopt on failure.
using GraphGenerator = std::function<std::optional<Graph>(const ConditionVector&, Rng&)>;

struct EvalOptions {
  EvalProtocol protocol = EvalProtocol::Within;
  int triplet_target = -1;  // Triplet only
  std::size_t limit = 0;    // 0 = every index
  std::uint64_t seed = 0;
  int workers = 1;  // any value gives bit-identical reports
};

/// For each record: mask per protocol, generate, recompute properties,
/// score the observed slots only (raw per property, z-scored for "All").
/// Failed generations are counted and excluded from the means. Each
/// record gets its own derived rng stream, so order does not matter.
MetricReport evaluate(const GraphGenerator& generator, const std::vector<DatasetRecord>& records,
                      const std::vector<std::size_t>& idx, const NormalizationStats& stats,
                      const EvalOptions& options);

struct UniquenessReport {
  int codes = 0;
  int samples_per_code = 0;
  long long isomorphic_pairs = 0;
  long long compared_pairs = 0;  // pairs among graphs that actually generated
  long long total_pairs = 0;     // codes * C(samples, 2)
  long long failures = 0;

  double duplicate_fraction() const {
    return compared_pairs == 0 ? 0.0
                               : static_cast<double>(isomorphic_pairs) /
                                     static_cast<double>(compared_pairs);
  }
};

/// Per condition code, generates `samples_per_code` graphs and tests
/// every pair for isomorphism. Deterministic: one rng stream per code.
UniquenessReport uniqueness_check(const GraphGenerator& generator,
                                  const std::vector<ConditionVector>& codes,
                                  int samples_per_code, std::uint64_t seed);

std::string render_table(const MetricReport& report);
std::string render_kv(const MetricReport& report);
std::string render_table(const UniquenessReport& report);
std::string render_kv(const UniquenessReport& report);

}  // namespace graphgen
