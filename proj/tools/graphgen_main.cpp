#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphgen/config.hpp"
#include "graphgen/dataset.hpp"
#include "graphgen/diffusion.hpp"
#include "graphgen/eval.hpp"
#include "graphgen/vae.hpp"

namespace fs = std::filesystem;

namespace {

using namespace graphgen;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kDiverged = 3;

// Sampling stream ids sit far above dataset record ids and the training
// and evaluation streams.
constexpr std::uint64_t kSampleStreamBase = 1ULL << 44;
constexpr std::uint64_t kCodePickStream = 1ULL << 45;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataBundle {
  std::vector<DatasetRecord> records;
  DatasetManifest manifest;
};

DataBundle load_data(const std::string& dir, const RunConfig& cfg) {
  const fs::path base(dir);
  std::ifstream mf(base / "manifest.json");
  if (!mf) throw DataError("cannot read " + (base / "manifest.json").string());
  DataBundle out;
  out.manifest = load_manifest(mf);
  std::ifstream df(base / "dataset.jsonl");
  if (!df) throw DataError("cannot read " + (base / "dataset.jsonl").string());
  out.records = read_records_jsonl(df);
  if (!out.manifest.config_hash.empty() && out.manifest.config_hash != config_hash_hex(cfg)) {
    std::cerr << "warning: dataset in " << dir << " was forged under config "
              << out.manifest.config_hash << ", current is " << config_hash_hex(cfg) << "\n";
  }
  return out;
}

void stamp_checkpoint(Checkpoint& ckpt, const RunConfig& cfg, const std::string& split) {
  auto j = nlohmann::json::parse(ckpt.manifest_json);
  j["config_hash"] = config_hash_hex(cfg);
  j["split"] = split;
  ckpt.manifest_json = j.dump();
}

std::string checkpoint_hash(const Checkpoint& ckpt) {
  return nlohmann::json::parse(ckpt.manifest_json).value("config_hash", "");
}

Checkpoint load_stamped(const std::string& path, const RunConfig& cfg, const char* what) {
  if (path.empty() || !fs::exists(path)) {
    throw DataError(std::string("missing ") + what + " checkpoint '" + path + "'");
  }
  Checkpoint ckpt = load_checkpoint_file(path);
  const std::string found = checkpoint_hash(ckpt);
  if (!found.empty() && found != config_hash_hex(cfg)) {
    std::cerr << "warning: " << path << " was trained under config " << found << ", current is "
              << config_hash_hex(cfg) << "\n";
  }
  return ckpt;
}

GraphVae load_vae(const std::string& path, const RunConfig& cfg) {
  return GraphVae::from_checkpoint(load_stamped(path, cfg, "encoder"));
}

DiffusionModel load_ldm(const std::string& path, const RunConfig& cfg) {
  return DiffusionModel::from_checkpoint(load_stamped(path, cfg, "diffusion"));
}

EvalProtocol parse_protocol(const std::string& name) {
  if (name == "within") return EvalProtocol::Within;
  if (name == "ood") return EvalProtocol::Ood;
  if (name == "masked") return EvalProtocol::Masked;
  if (name == "triplet") return EvalProtocol::Triplet;
  throw UsageError("unknown protocol '" + name + "' (within, ood, masked, triplet)");
}

int property_index(const std::string& name) {
  const auto& names = property_names();
  for (int p = 0; p < kPropertyCount; ++p) {
    if (names[static_cast<std::size_t>(p)] == name) return p;
  }
  throw UsageError("unknown property '" + name + "'");
}

std::array<double, kFamilyCount> proportions_by_name(const std::string& name) {
  if (name == "paper") return paper_proportions();
  if (name == "uniform") return uniform_proportions();
  throw UsageError("unknown proportions '" + name + "' (paper, uniform)");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

void ensure_parent(const std::string& file_path) {
  const fs::path parent = fs::path(file_path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

SplitIndices take_split(const DataBundle& data, const std::string& kind) {
  if (kind == "ood") return ood_split(data.records);
  if (kind == "within") {
    return split_dataset(data.records, data.manifest.split_ratios, data.manifest.seed);
  }
  throw UsageError("unknown split '" + kind + "' (within, ood)");
}

// ---------------------------------------------------------------- forge

int cmd_forge(const RunConfig& cfg, const std::string& out_dir) {
  BuildSpec spec;
  spec.total = cfg.total;
  spec.proportions = proportions_by_name(cfg.proportions);
  spec.seed = cfg.seed;
  spec.n_max = cfg.n_max;
  spec.n_min = cfg.n_min;

  fs::create_directories(out_dir);
  const fs::path base(out_dir);
  std::ofstream df(base / "dataset.jsonl");
  if (!df) throw DataError("cannot write " + (base / "dataset.jsonl").string());

  DatasetManifest manifest =
      build_dataset(spec, [&](const DatasetRecord& rec) { write_record_jsonl(df, rec); });
  manifest.config_hash = config_hash_hex(cfg);
  std::ofstream mf(base / "manifest.json");
  if (!mf) throw DataError("cannot write " + (base / "manifest.json").string());
  save_manifest(mf, manifest);

  std::cout << "forged " << manifest.total << " graphs into " << out_dir << "\n";
  for (int fi = 0; fi < kFamilyCount; ++fi) {
    const long long c = manifest.counts[static_cast<std::size_t>(fi)];
    const double share = manifest.total > 0 ? 100.0 * c / manifest.total : 0.0;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "  %-26s%10lld  %6.2f%%\n",
                  family_name(static_cast<GraphFamily>(fi)).c_str(), c, share);
    std::cout << buf;
  }
  return kOk;
}

// ---------------------------------------------------------------- train

int cmd_train_vae(const RunConfig& cfg, const std::string& data_dir, const std::string& out_path,
                  bool conditional, const std::string& split_kind) {
  const DataBundle data = load_data(data_dir, cfg);
  const SplitIndices split = take_split(data, split_kind);
  const NormalizationStats stats = normalization_stats(data.records, split.train);

  VaeTrainConfig tc;
  tc.model.gin_layers = cfg.gin_layers;
  tc.model.hidden = cfg.hidden;
  tc.model.latent = cfg.latent;
  tc.model.feature_dim = cfg.feature_dim;
  tc.model.decoder_layers = cfg.decoder_layers;
  tc.model.decoder_hidden = cfg.decoder_hidden;
  tc.model.n_max = data.manifest.n_max;  // decoder width is owned by the dataset
  tc.model.conditional = conditional;
  tc.model.beta = cfg.beta;
  tc.model.ordering = ordering_from_name(cfg.ordering);
  tc.epochs = cfg.vae_epochs;
  tc.batch_size = cfg.batch_size;
  tc.lr = cfg.lr;
  tc.seed = cfg.seed;
  tc.mask_fraction = conditional ? cfg.mask_fraction : 0.0;

  VaeTrainResult res = train_vae(data.records, split.train, split.val, tc, stats, &std::cout);
  stamp_checkpoint(res.checkpoint, cfg, split_kind);
  ensure_parent(out_path);
  save_checkpoint_file(out_path, res.checkpoint);
  std::cout << "wrote " << out_path << "\n";
  if (res.diverged) {
    std::cerr << "training diverged; the checkpoint holds the last good state\n";
    return kDiverged;
  }
  return kOk;
}

int cmd_train_ldm(const RunConfig& cfg, const std::string& data_dir, const std::string& out_path,
                  const std::string& vae_path, const std::string& split_kind) {
  if (vae_path.empty()) {
    throw DataError("missing encoder (train the graph VAE first and pass --vae)");
  }
  const DataBundle data = load_data(data_dir, cfg);
  const SplitIndices split = take_split(data, split_kind);
  const GraphVae vae = load_vae(vae_path, cfg);

  LdmTrainConfig tc;
  tc.model.T = cfg.T;
  tc.model.latent = vae.config().latent;
  tc.model.hidden = cfg.denoiser_hidden;
  tc.model.cond_embed = cfg.cond_embed;
  tc.epochs = cfg.ldm_epochs;
  tc.batch_size = cfg.batch_size;
  tc.lr = cfg.lr;
  tc.seed = cfg.seed;
  tc.mask_fraction = cfg.mask_fraction;

  LdmTrainResult res = train_diffusion(data.records, split.train, split.val, vae, tc, &std::cout);
  stamp_checkpoint(res.checkpoint, cfg, split_kind);
  ensure_parent(out_path);
  save_checkpoint_file(out_path, res.checkpoint);
  std::cout << "wrote " << out_path << "\n";
  if (res.diverged) {
    std::cerr << "training diverged; the checkpoint holds the last good state\n";
    return kDiverged;
  }
  return kOk;
}

// ---------------------------------------------------------------- sample

std::string comparison_table(const ConditionVector& cond, const PropertyVector& got) {
  std::ostringstream os;
  os << "property                  requested     realized      smape\n";
  const auto& names = property_names();
  for (int p = 0; p < kPropertyCount; ++p) {
    char buf[128];
    if (cond.known[static_cast<std::size_t>(p)]) {
      const double want = cond.values[static_cast<std::size_t>(p)];
      const double have = got[static_cast<std::size_t>(p)];
      std::snprintf(buf, sizeof(buf), "%-22s%11.4f  %11.4f  %9.4f\n",
                    names[static_cast<std::size_t>(p)].c_str(), want, have, smape(have, want));
    } else {
      std::snprintf(buf, sizeof(buf), "%-22s%11s  %11.4f  %9s\n",
                    names[static_cast<std::size_t>(p)].c_str(), "_",
                    got[static_cast<std::size_t>(p)], "-");
    }
    os << buf;
  }
  return os.str();
}

int cmd_sample(const RunConfig& cfg, const std::string& vae_path, const std::string& ldm_path,
               const std::string& cond_text, int count, const std::string& out_dir,
               double threshold, bool use_threshold, int attempts) {
  ConditionVector cond;
  try {
    cond = parse_condition(cond_text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const GraphVae vae = load_vae(vae_path, cfg);
  std::optional<DiffusionModel> ldm;
  if (!ldm_path.empty()) ldm.emplace(load_ldm(ldm_path, cfg));
  if (ldm.has_value() && vae.config().conditional) {
    throw DataError("the diffusion sampler needs the plain decoder, not the conditional one");
  }
  if (!ldm.has_value() && !vae.config().conditional) {
    throw DataError("a plain decoder cannot sample on its own; pass --ldm");
  }

  GenerateOptions gopts;
  gopts.gumbel = !use_threshold;
  gopts.threshold = threshold;
  gopts.max_attempts = attempts;

  fs::create_directories(out_dir);
  const fs::path base(out_dir);
  int produced = 0;
  for (int i = 0; i < count; ++i) {
    Rng rng = Rng::for_stream(cfg.seed, kSampleStreamBase + static_cast<std::uint64_t>(i));
    const GenerationResult res = ldm.has_value() ? generate_graph(cond, vae, *ldm, rng, gopts)
                                                 : generate_graph_cvae(cond, vae, rng, gopts);
    if (!res.graph.has_value()) {
      std::cout << "sample " << i << ": no graph after " << res.attempts << " attempts\n";
      continue;
    }
    ++produced;
    const std::string stem = "sample_" + std::to_string(i);
    {
      std::ofstream ef(base / (stem + ".edges"));
      write_edge_list(ef, *res.graph);
      std::ofstream df(base / (stem + ".dot"));
      write_dot(df, *res.graph, stem);
    }
    std::cout << "sample " << i << ": n=" << res.graph->n << " m=" << res.graph->edge_count()
              << " (attempt " << res.attempts << ")\n";
    std::cout << comparison_table(cond, compute_properties(*res.graph));
  }
  std::cout << produced << "/" << count << " samples written to " << out_dir << "\n";
  return kOk;
}

// ---------------------------------------------------------------- eval

GraphGenerator make_generator(const GraphVae& vae, const std::optional<DiffusionModel>& ldm,
                              const GenerateOptions& gopts) {
  if (ldm.has_value()) {
    if (vae.config().conditional) {
      throw DataError("the diffusion sampler needs the plain decoder, not the conditional one");
    }
    const DiffusionModel* model = &*ldm;
    return [&vae, model, gopts](const ConditionVector& c, Rng& rng) {
      return generate_graph(c, vae, *model, rng, gopts).graph;
    };
  }
  if (!vae.config().conditional) {
    throw DataError("a plain decoder cannot sample on its own; pass --ldm");
  }
  return [&vae, gopts](const ConditionVector& c, Rng& rng) {
    return generate_graph_cvae(c, vae, rng, gopts).graph;
  };
}

int cmd_eval(const RunConfig& cfg, const std::string& data_dir, const std::string& vae_path,
             const std::string& ldm_path, const std::string& triplet_target,
             const std::string& out_dir) {
  const EvalProtocol protocol = parse_protocol(cfg.protocol);
  const DataBundle data = load_data(data_dir, cfg);
  const SplitIndices split =
      take_split(data, protocol == EvalProtocol::Ood ? "ood" : "within");

  const GraphVae vae = load_vae(vae_path, cfg);
  if (vae.norm.mean.empty()) throw DataError("encoder checkpoint lacks normalization stats");
  std::optional<DiffusionModel> ldm;
  if (!ldm_path.empty()) ldm.emplace(load_ldm(ldm_path, cfg));
  const GraphGenerator generator = make_generator(vae, ldm, GenerateOptions{});

  EvalOptions opts;
  opts.protocol = protocol;
  if (protocol == EvalProtocol::Triplet) opts.triplet_target = property_index(triplet_target);
  opts.limit = cfg.eval_limit > 0 ? static_cast<std::size_t>(cfg.eval_limit) : 0;
  opts.seed = cfg.seed;
  opts.workers = cfg.workers;

  const MetricReport report = evaluate(generator, data.records, split.test, vae.norm, opts);
  const std::string table = render_table(report);
  std::cout << table;

  fs::create_directories(out_dir);
  const std::string stem = "report_" + protocol_name(protocol);
  write_text(fs::path(out_dir) / (stem + ".txt"), table);
  write_text(fs::path(out_dir) / (stem + ".kv"), render_kv(report));
  std::cout << "wrote " << (fs::path(out_dir) / (stem + ".txt")).string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- unique

int cmd_unique(const RunConfig& cfg, const std::string& data_dir, const std::string& vae_path,
               const std::string& ldm_path, int codes, int samples, const std::string& out_dir) {
  const DataBundle data = load_data(data_dir, cfg);
  const SplitIndices split = take_split(data, "within");
  if (split.test.empty()) throw DataError("empty test split");

  const GraphVae vae = load_vae(vae_path, cfg);
  std::optional<DiffusionModel> ldm;
  if (!ldm_path.empty()) ldm.emplace(load_ldm(ldm_path, cfg));
  const GraphGenerator generator = make_generator(vae, ldm, GenerateOptions{});

  Rng pick = Rng::for_stream(cfg.seed, kCodePickStream);
  const int want = std::min<int>(codes, static_cast<int>(split.test.size()));
  std::vector<ConditionVector> cs;
  for (int i : pick.sample_without_replacement(static_cast<int>(split.test.size()), want)) {
    cs.push_back(ConditionVector::all_known(
        data.records[split.test[static_cast<std::size_t>(i)]].properties));
  }

  const UniquenessReport report = uniqueness_check(generator, cs, samples, cfg.seed);
  const std::string table = render_table(report);
  std::cout << table;
  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "unique.txt", table);
  write_text(fs::path(out_dir) / "unique.kv", render_kv(report));
  return kOk;
}

// ---------------------------------------------------------------- ablate

int cmd_ablate_ordering(const RunConfig& cfg, const std::string& data_dir,
                        const std::string& out_dir) {
  const DataBundle data = load_data(data_dir, cfg);
  const SplitIndices split = take_split(data, "within");
  const NormalizationStats stats = normalization_stats(data.records, split.train);

  std::ostringstream table;
  table << "ordering        all-SMAPE   non-valid %\n";
  for (const OrderingKind kind :
       {OrderingKind::BfsDegree, OrderingKind::Degree, OrderingKind::Pagerank}) {
    VaeTrainConfig vc;
    vc.model.n_max = data.manifest.n_max;
    vc.model.ordering = kind;
    vc.model.beta = cfg.beta;
    vc.epochs = cfg.vae_epochs;
    vc.batch_size = cfg.batch_size;
    vc.lr = cfg.lr;
    vc.seed = cfg.seed;
    std::cout << "training graph VAE with " << ordering_name(kind) << " ordering\n";
    VaeTrainResult vres = train_vae(data.records, split.train, split.val, vc, stats, nullptr);
    if (vres.diverged) {
      std::cerr << "vae training diverged for " << ordering_name(kind) << "\n";
      return kDiverged;
    }
    const GraphVae vae = GraphVae::from_checkpoint(vres.checkpoint);

    LdmTrainConfig lc;
    lc.model.T = cfg.T;
    lc.model.latent = vae.config().latent;
    lc.model.hidden = cfg.denoiser_hidden;
    lc.model.cond_embed = cfg.cond_embed;
    lc.epochs = cfg.ldm_epochs;
    lc.batch_size = cfg.batch_size;
    lc.lr = cfg.lr;
    lc.seed = cfg.seed;
    lc.mask_fraction = cfg.mask_fraction;
    std::cout << "training diffusion for " << ordering_name(kind) << " ordering\n";
    LdmTrainResult lres = train_diffusion(data.records, split.train, split.val, vae, lc, nullptr);
    if (lres.diverged) {
      std::cerr << "diffusion training diverged for " << ordering_name(kind) << "\n";
      return kDiverged;
    }
    const DiffusionModel ldm = DiffusionModel::from_checkpoint(lres.checkpoint);

    EvalOptions opts;
    opts.limit = cfg.eval_limit > 0 ? static_cast<std::size_t>(cfg.eval_limit) : 0;
    opts.seed = cfg.seed;
    opts.workers = cfg.workers;
    const GenerateOptions gopts;
    const MetricReport report = evaluate(
        [&](const ConditionVector& c, Rng& rng) { return generate_graph(c, vae, ldm, rng, gopts).graph; },
        data.records, split.test, vae.norm, opts);

    char buf[96];
    std::snprintf(buf, sizeof(buf), "%-14s%11.4f  %11.4f%s\n", ordering_name(kind).c_str(),
                  report.all.smape, 100.0 * report.failure_rate,
                  kind == OrderingKind::BfsDegree ? "  (default)" : "");
    table << buf;
    std::cout << buf;
  }
  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "ablate_ordering.txt", table.str());
  return kOk;
}

int cmd_ablate_properties(const RunConfig& cfg, const std::string& data_dir,
                          const std::string& vae_path, const std::string& ldm_path,
                          const std::string& out_dir) {
  const DataBundle data = load_data(data_dir, cfg);
  const SplitIndices split = take_split(data, "within");
  const GraphVae vae = load_vae(vae_path, cfg);
  std::optional<DiffusionModel> ldm;
  if (!ldm_path.empty()) ldm.emplace(load_ldm(ldm_path, cfg));
  const GraphGenerator generator = make_generator(vae, ldm, GenerateOptions{});

  constexpr int kRepeats = 3;
  std::ostringstream table;
  table << "kept property                target-SMAPE    all-SMAPE\n";
  const auto& names = property_names();
  for (int p = 0; p < kPropertyCount; ++p) {
    if (p == kNodes || p == kEdges) continue;  // always part of the triplet
    double target_sum = 0.0, all_sum = 0.0;
    for (int r = 0; r < kRepeats; ++r) {
      EvalOptions opts;
      opts.protocol = EvalProtocol::Triplet;
      opts.triplet_target = p;
      opts.limit = cfg.eval_limit > 0 ? static_cast<std::size_t>(cfg.eval_limit) : 0;
      opts.seed = cfg.seed + static_cast<std::uint64_t>(r);
      opts.workers = cfg.workers;
      const MetricReport report = evaluate(generator, data.records, split.test, vae.norm, opts);
      target_sum += report.rows[static_cast<std::size_t>(p)].smape;
      all_sum += report.all.smape;
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%-26s%13.4f  %11.4f\n",
                  names[static_cast<std::size_t>(p)].c_str(), target_sum / kRepeats,
                  all_sum / kRepeats);
    table << buf;
    std::cout << buf;
  }
  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "ablate_properties.txt", table.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic graph corpus, property-conditioned generation and evaluation"};
  app.require_subcommand(1);

  std::string profile = "desk";
  std::string config_path;
  app.add_option("--profile", profile, "configuration profile (desk, paper)")
      ->capture_default_str();
  app.add_option("--config", config_path, "JSON file overriding the profile");

  // Values bound here overwrite the loaded config only when the flag was
  // actually given; flags win over the config file, which wins over the
  // profile.
  RunConfig fl;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", fl.seed, "run seed");
    sub->add_option("--workers", fl.workers, "worker threads for evaluation");
  };

  std::string forge_out = "data";
  CLI::App* forge = app.add_subcommand("forge", "generate a labeled graph corpus");
  add_common(forge);
  forge->add_option("--total", fl.total, "number of graphs");
  forge->add_option("--n-max", fl.n_max, "largest node count");
  forge->add_option("--n-min", fl.n_min, "smallest sampled node count");
  forge->add_option("--proportions", fl.proportions, "family mix (paper, uniform)");
  forge->add_option("--out", forge_out, "output directory")->capture_default_str();

  std::string train_stage;
  std::string train_data = "data";
  std::string train_out;
  std::string train_vae_path;
  std::string train_split = "within";
  bool train_conditional = false;
  CLI::App* train = app.add_subcommand("train", "train the VAE or the diffusion model");
  add_common(train);
  train->add_option("stage", train_stage, "vae or ldm")->required();
  train->add_option("--data", train_data, "dataset directory")->capture_default_str();
  train->add_option("--out", train_out, "checkpoint path");
  train->add_option("--vae", train_vae_path, "encoder checkpoint (ldm stage)");
  train->add_option("--split", train_split, "within or ood")->capture_default_str();
  train->add_flag("--conditional", train_conditional, "condition the decoder directly (baseline)");
  train->add_option("--epochs", fl.vae_epochs, "vae epochs");
  train->add_option("--ldm-epochs", fl.ldm_epochs, "ldm epochs");
  train->add_option("--batch", fl.batch_size, "batch size");
  train->add_option("--lr", fl.lr, "learning rate");
  train->add_option("--beta", fl.beta, "KL weight");
  train->add_option("--ordering", fl.ordering, "bfs_degree, degree or pagerank");
  train->add_option("--mask-fraction", fl.mask_fraction, "condition dropout fraction");
  train->add_option("--latent", fl.latent, "latent width");
  train->add_option("--T", fl.T, "diffusion steps");

  std::string sample_vae, sample_ldm, sample_cond;
  std::string sample_out = "samples";
  int sample_count = 1;
  int sample_attempts = 5;
  double sample_threshold = 0.5;
  bool sample_use_threshold = false;
  CLI::App* sample = app.add_subcommand("sample", "generate graphs for a condition");
  add_common(sample);
  sample->add_option("--vae", sample_vae, "encoder/decoder checkpoint")->required();
  sample->add_option("--ldm", sample_ldm, "diffusion checkpoint");
  sample->add_option("--c", sample_cond, "15 comma-separated values, _ masks a slot")->required();
  sample->add_option("--count", sample_count, "graphs to generate")->capture_default_str();
  sample->add_option("--out", sample_out, "output directory")->capture_default_str();
  sample->add_option("--attempts", sample_attempts, "resample budget per graph")
      ->capture_default_str();
  sample->add_option("--threshold", sample_threshold, "edge probability cutoff")
      ->capture_default_str();
  sample->add_flag("--deterministic-edges", sample_use_threshold,
                   "threshold probabilities instead of Gumbel sampling");

  std::string eval_data = "data", eval_vae, eval_ldm, eval_target = "density";
  std::string eval_out = "reports";
  CLI::App* eval = app.add_subcommand("eval", "score generated graphs against a test split");
  add_common(eval);
  eval->add_option("--data", eval_data, "dataset directory")->capture_default_str();
  eval->add_option("--vae", eval_vae, "encoder/decoder checkpoint")->required();
  eval->add_option("--ldm", eval_ldm, "diffusion checkpoint");
  eval->add_option("--protocol", fl.protocol, "within, ood, masked or triplet");
  eval->add_option("--triplet-target", eval_target, "kept property for the triplet protocol")
      ->capture_default_str();
  eval->add_option("--limit", fl.eval_limit, "evaluate at most this many records");
  eval->add_option("--out", eval_out, "report directory")->capture_default_str();

  std::string uq_data = "data", uq_vae, uq_ldm;
  std::string uq_out = "reports";
  int uq_codes = 50, uq_samples = 20;
  CLI::App* unique = app.add_subcommand("unique", "isomorphism check across repeated samples");
  add_common(unique);
  unique->add_option("--data", uq_data, "dataset directory")->capture_default_str();
  unique->add_option("--vae", uq_vae, "encoder/decoder checkpoint")->required();
  unique->add_option("--ldm", uq_ldm, "diffusion checkpoint");
  unique->add_option("--codes", uq_codes, "condition codes")->capture_default_str();
  unique->add_option("--samples", uq_samples, "samples per code")->capture_default_str();
  unique->add_option("--out", uq_out, "report directory")->capture_default_str();

  std::string ab_target = "ordering";
  std::string ab_data = "data", ab_vae, ab_ldm;
  std::string ab_out = "reports";
  CLI::App* ablate = app.add_subcommand("ablate", "ordering or property-importance sweeps");
  add_common(ablate);
  ablate->add_option("--target", ab_target, "ordering or properties")->capture_default_str();
  ablate->add_option("--data", ab_data, "dataset directory")->capture_default_str();
  ablate->add_option("--vae", ab_vae, "encoder/decoder checkpoint (properties target)");
  ablate->add_option("--ldm", ab_ldm, "diffusion checkpoint (properties target)");
  ablate->add_option("--limit", fl.eval_limit, "evaluate at most this many records");
  ablate->add_option("--epochs", fl.vae_epochs, "vae epochs (ordering target)");
  ablate->add_option("--ldm-epochs", fl.ldm_epochs, "ldm epochs (ordering target)");
  ablate->add_option("--out", ab_out, "report directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  RunConfig cfg;
  try {
    cfg = graphgen::load_config(profile, config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  auto take = [&](const char* flag, auto member) {
    if (sub->count(flag) > 0) cfg.*member = fl.*member;
  };
  take("--seed", &RunConfig::seed);
  take("--workers", &RunConfig::workers);
  if (sub == forge) {
    take("--total", &RunConfig::total);
    take("--n-max", &RunConfig::n_max);
    take("--n-min", &RunConfig::n_min);
    take("--proportions", &RunConfig::proportions);
  } else if (sub == train) {
    take("--epochs", &RunConfig::vae_epochs);
    take("--ldm-epochs", &RunConfig::ldm_epochs);
    take("--batch", &RunConfig::batch_size);
    take("--lr", &RunConfig::lr);
    take("--beta", &RunConfig::beta);
    take("--ordering", &RunConfig::ordering);
    take("--mask-fraction", &RunConfig::mask_fraction);
    take("--latent", &RunConfig::latent);
    take("--T", &RunConfig::T);
  } else if (sub == eval) {
    take("--protocol", &RunConfig::protocol);
    take("--limit", &RunConfig::eval_limit);
  } else if (sub == ablate) {
    take("--limit", &RunConfig::eval_limit);
    take("--epochs", &RunConfig::vae_epochs);
    take("--ldm-epochs", &RunConfig::ldm_epochs);
  }

  try {
    if (sub == forge) return cmd_forge(cfg, forge_out);
    if (sub == train) {
      if (train_stage == "vae") {
        const std::string out = train_out.empty() ? "models/vae.ckpt" : train_out;
        return cmd_train_vae(cfg, train_data, out, train_conditional, train_split);
      }
      if (train_stage == "ldm") {
        const std::string out = train_out.empty() ? "models/ldm.ckpt" : train_out;
        return cmd_train_ldm(cfg, train_data, out, train_vae_path, train_split);
      }
      throw UsageError("unknown stage '" + train_stage + "' (vae, ldm)");
    }
    if (sub == sample) {
      return cmd_sample(cfg, sample_vae, sample_ldm, sample_cond, sample_count, sample_out,
                        sample_threshold, sample_use_threshold, sample_attempts);
    }
    if (sub == eval) return cmd_eval(cfg, eval_data, eval_vae, eval_ldm, eval_target, eval_out);
    if (sub == unique) {
      return cmd_unique(cfg, uq_data, uq_vae, uq_ldm, uq_codes, uq_samples, uq_out);
    }
    if (sub == ablate) {
      if (ab_target == "ordering") return cmd_ablate_ordering(cfg, ab_data, ab_out);
      if (ab_target == "properties") {
        return cmd_ablate_properties(cfg, ab_data, ab_vae, ab_ldm, ab_out);
      }
      throw UsageError("unknown ablation target '" + ab_target + "' (ordering, properties)");
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
