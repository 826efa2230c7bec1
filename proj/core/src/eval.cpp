#include "graphgen/eval.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace graphgen {

double smape(double a, double b) {
  const double denom = std::abs(a) + std::abs(b);
  if (denom == 0.0) return 0.0;
  // Opposite signs make |a - b| equal the denominator; the rounded
  // multiply can then land one ulp above the nominal 100 ceiling.
  return std::min(100.0, 100.0 * std::abs(a - b) / denom);
}

std::string protocol_name(EvalProtocol p) {
  switch (p) {
    case EvalProtocol::Within: return "within";
    case EvalProtocol::Ood: return "ood";
    case EvalProtocol::Masked: return "masked";
    case EvalProtocol::Triplet: return "triplet";
  }
  return "unknown";
}

ConditionVector mask_protocol(const ConditionVector& c, Rng& rng) {
  ConditionVector out = c;
  const int hide = rng.uniform_int(1, 8);
  for (int slot : rng.sample_without_replacement(kPropertyCount, hide)) {
    out.known[static_cast<std::size_t>(slot)] = false;
    out.values[static_cast<std::size_t>(slot)] = 0.0;
  }
  return out;
}

ConditionVector triplet_protocol(const ConditionVector& c, int keep) {
  if (keep < 0 || keep >= kPropertyCount) {
    throw std::invalid_argument("triplet_protocol: property index out of range");
  }
  ConditionVector out = c;
  for (int p = 0; p < kPropertyCount; ++p) {
    const bool visible = p == kNodes || p == kEdges || p == keep;
    if (!visible) {
      out.known[static_cast<std::size_t>(p)] = false;
      out.values[static_cast<std::size_t>(p)] = 0.0;
    }
  }
  return out;
}

namespace {

// Stream ids far above dataset record ids and the training streams.
constexpr std::uint64_t kEvalStreamBase = 1ULL << 42;
constexpr std::uint64_t kUniqueStreamBase = 1ULL << 43;

struct Accumulator {
  double abs_err = 0.0;
  double smape_sum = 0.0;
  long long count = 0;

  void add(double truth, double got) {
    abs_err += std::abs(truth - got);
    smape_sum += smape(got, truth);
    ++count;
  }
};

}  // namespace

MetricReport evaluate(const GraphGenerator& generator, const std::vector<DatasetRecord>& records,
                      const std::vector<std::size_t>& idx, const NormalizationStats& stats,
                      const EvalOptions& options) {
  if (stats.mean.size() != static_cast<std::size_t>(kPropertyCount)) {
    throw std::invalid_argument("evaluate: normalization stats must cover all properties");
  }
  if (options.protocol == EvalProtocol::Triplet &&
      (options.triplet_target < 0 || options.triplet_target >= kPropertyCount)) {
    throw std::invalid_argument("evaluate: triplet protocol needs a property index");
  }

  MetricReport report;
  report.protocol = options.protocol;
  report.triplet_target = options.protocol == EvalProtocol::Triplet ? options.triplet_target : -1;
  report.degenerate_triplet = options.protocol == EvalProtocol::Triplet &&
                              (options.triplet_target == kNodes || options.triplet_target == kEdges);

  std::size_t n = idx.size();
  if (options.limit > 0) n = std::min(n, options.limit);

  // Per-record results land in fixed slots and are reduced in record
  // order afterwards, so the report is identical for any worker count.
  struct Sample {
    ConditionVector cond;
    PropertyVector got{};
    bool ok = false;
  };
  std::vector<Sample> samples(n);

  auto run_one = [&](std::size_t pos) {
    const DatasetRecord& rec = records[idx[pos]];
    Rng rng = Rng::for_stream(options.seed, kEvalStreamBase + pos);

    Sample& s = samples[pos];
    s.cond = ConditionVector::all_known(rec.properties);
    if (options.protocol == EvalProtocol::Masked) {
      s.cond = mask_protocol(s.cond, rng);
    } else if (options.protocol == EvalProtocol::Triplet) {
      s.cond = triplet_protocol(s.cond, options.triplet_target);
    }
    const std::optional<Graph> g = generator(s.cond, rng);
    if (g.has_value()) {
      s.got = compute_properties(*g);
      s.ok = true;
    }
  };

  const int workers = std::max(1, options.workers);
  if (workers == 1 || n < 2) {
    for (std::size_t pos = 0; pos < n; ++pos) run_one(pos);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> cursor{0};
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t pos = cursor.fetch_add(1); pos < n; pos = cursor.fetch_add(1)) {
          run_one(pos);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  std::array<Accumulator, kPropertyCount> per_prop{};
  Accumulator all;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const Sample& s = samples[pos];
    ++report.requested;
    if (!s.ok) {
      ++report.failures;
      continue;
    }
    ++report.generated;
    const DatasetRecord& rec = records[idx[pos]];
    for (int p = 0; p < kPropertyCount; ++p) {
      if (!s.cond.known[static_cast<std::size_t>(p)]) continue;  // hidden slots are never scored
      const double truth = rec.properties[static_cast<std::size_t>(p)];
      const double sampled = s.got[static_cast<std::size_t>(p)];
      per_prop[static_cast<std::size_t>(p)].add(truth, sampled);
      const double sd = stats.stddev[static_cast<std::size_t>(p)];
      const double mean = stats.mean[static_cast<std::size_t>(p)];
      all.add((truth - mean) / sd, (sampled - mean) / sd);
    }
  }

  const auto& names = property_names();
  for (int p = 0; p < kPropertyCount; ++p) {
    const Accumulator& acc = per_prop[static_cast<std::size_t>(p)];
    MetricRow row;
    row.name = names[static_cast<std::size_t>(p)];
    row.count = acc.count;
    if (acc.count > 0) {
      row.mae = acc.abs_err / static_cast<double>(acc.count);
      row.smape = acc.smape_sum / static_cast<double>(acc.count);
    }
    report.rows.push_back(row);
  }
  report.all.name = "All";
  report.all.count = all.count;
  if (all.count > 0) {
    report.all.mae = all.abs_err / static_cast<double>(all.count);
    report.all.smape = all.smape_sum / static_cast<double>(all.count);
  }
  report.failure_rate = report.requested == 0
                            ? 0.0
                            : static_cast<double>(report.failures) /
                                  static_cast<double>(report.requested);
  return report;
}

UniquenessReport uniqueness_check(const GraphGenerator& generator,
                                  const std::vector<ConditionVector>& codes,
                                  int samples_per_code, std::uint64_t seed) {
  if (samples_per_code < 2) throw std::invalid_argument("uniqueness_check: need >= 2 samples");
  UniquenessReport report;
  report.codes = static_cast<int>(codes.size());
  report.samples_per_code = samples_per_code;
  const long long pairs_per_code =
      static_cast<long long>(samples_per_code) * (samples_per_code - 1) / 2;
  report.total_pairs = pairs_per_code * static_cast<long long>(codes.size());

  for (std::size_t ci = 0; ci < codes.size(); ++ci) {
    Rng rng = Rng::for_stream(seed, kUniqueStreamBase + ci);
    std::vector<Graph> generated;
    for (int s = 0; s < samples_per_code; ++s) {
      std::optional<Graph> g = generator(codes[ci], rng);
      if (g.has_value()) {
        generated.push_back(std::move(*g));
      } else {
        ++report.failures;
      }
    }
    for (std::size_t i = 0; i < generated.size(); ++i) {
      for (std::size_t j = i + 1; j < generated.size(); ++j) {
        ++report.compared_pairs;
        if (are_isomorphic(generated[i], generated[j])) ++report.isomorphic_pairs;
      }
    }
  }
  return report;
}

namespace {

std::string fixed(double v, int width, int places) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%*.*f", width, places, v);
  return buf;
}

}  // namespace

std::string render_table(const MetricReport& report) {
  std::ostringstream out;
  out << "protocol: " << protocol_name(report.protocol);
  if (report.protocol == EvalProtocol::Triplet && report.triplet_target >= 0) {
    out << " (target "
        << property_names()[static_cast<std::size_t>(report.triplet_target)];
    if (report.degenerate_triplet) out << ", degenerate pair";
    out << ")";
  }
  out << "\n";
  out << "requested " << report.requested << "  generated " << report.generated << "  failures "
      << report.failures << " (" << fixed(100.0 * report.failure_rate, 0, 2) << "%)\n";
  out << "property                     MAE      SMAPE    count\n";
  auto line = [&](const MetricRow& row) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-24s%9.4f  %9.4f  %7lld\n", row.name.c_str(), row.mae,
                  row.smape, row.count);
    out << buf;
  };
  for (const MetricRow& row : report.rows) line(row);
  MetricRow all = report.all;
  all.name = "All (z-scored)";
  line(all);
  return out.str();
}

std::string render_kv(const MetricReport& report) {
  std::ostringstream out;
  out << "protocol " << protocol_name(report.protocol) << "\n";
  if (report.protocol == EvalProtocol::Triplet && report.triplet_target >= 0) {
    out << "triplet_target " << property_names()[static_cast<std::size_t>(report.triplet_target)]
        << "\n";
    out << "degenerate_triplet " << (report.degenerate_triplet ? 1 : 0) << "\n";
  }
  out << "requested " << report.requested << "\n";
  out << "generated " << report.generated << "\n";
  out << "failures " << report.failures << "\n";
  out << "failure_rate " << report.failure_rate << "\n";
  for (const MetricRow& row : report.rows) {
    out << "mae." << row.name << " " << row.mae << "\n";
    out << "smape." << row.name << " " << row.smape << "\n";
    out << "count." << row.name << " " << row.count << "\n";
  }
  out << "mae.all " << report.all.mae << "\n";
  out << "smape.all " << report.all.smape << "\n";
  out << "count.all " << report.all.count << "\n";
  return out.str();
}

std::string render_table(const UniquenessReport& report) {
  std::ostringstream out;
  out << "condition codes        " << report.codes << "\n";
  out << "samples per code       " << report.samples_per_code << "\n";
  out << "generation failures    " << report.failures << "\n";
  out << "compared pairs         " << report.compared_pairs << " of " << report.total_pairs
      << "\n";
  out << "isomorphic pairs       " << report.isomorphic_pairs << "\n";
  out << "duplicate fraction     " << fixed(report.duplicate_fraction(), 0, 6) << "\n";
  return out.str();
}

std::string render_kv(const UniquenessReport& report) {
  std::ostringstream out;
  out << "codes " << report.codes << "\n";
  out << "samples_per_code " << report.samples_per_code << "\n";
  out << "failures " << report.failures << "\n";
  out << "compared_pairs " << report.compared_pairs << "\n";
  out << "total_pairs " << report.total_pairs << "\n";
  out << "isomorphic_pairs " << report.isomorphic_pairs << "\n";
  out << "duplicate_fraction " << report.duplicate_fraction() << "\n";
  return out.str();
}

}  // namespace graphgen
