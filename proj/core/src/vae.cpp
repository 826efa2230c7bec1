#include "graphgen/vae.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace graphgen {

GraphVae::GraphVae(const VaeConfig& cfg, Rng& rng) : cfg_(cfg) {
  if (cfg.gin_layers < 1 || cfg.hidden < 1 || cfg.latent < 1 || cfg.feature_dim < 1 ||
      cfg.decoder_layers < 1 || cfg.decoder_hidden < 1 || cfg.n_max < 2) {
    throw std::invalid_argument("GraphVae: invalid config");
  }
  for (int k = 0; k < cfg.gin_layers; ++k) {
    const int in = k == 0 ? cfg.feature_dim : cfg.hidden;
    gin_.emplace_back(in, cfg.hidden, cfg.hidden, rng);
  }
  // Small head gain keeps the initial posterior close to the prior; the sum
  // readout grows with node count, so full-scale init would blow the KL up.
  head_mu_ = Linear(cfg.hidden, cfg.latent, rng, 0.1);
  head_logvar_ = Linear(cfg.hidden, cfg.latent, rng, 0.1);

  std::vector<int> dims;
  dims.push_back(cfg.latent + (cfg.conditional ? kPropertyCount : 0));
  for (int i = 0; i + 1 < cfg.decoder_layers; ++i) dims.push_back(cfg.decoder_hidden);
  dims.push_back(2 * cfg.pair_count());
  decoder_ = Mlp(dims, rng);
}

Posterior GraphVae::encode(const Graph& g, const Tensor& features) const {
  if (features.rows() != g.n || features.cols() != cfg_.feature_dim) {
    throw std::invalid_argument("GraphVae::encode: feature shape mismatch");
  }
  const auto adj = g.adjacency_lists();
  Var h = Var::constant(features);
  // Per-node normalization after every block: sum aggregation otherwise
  // scales embeddings by the degree at each layer.
  for (const auto& layer : gin_) h = layer_norm_rows(layer(h, adj));
  const Var readout = readout_sum_sorted(h);
  // Soft clamp keeps exp(logvar) finite for any input graph.
  const Var logvar = scale(vtanh(scale(head_logvar_(readout), 0.1)), 10.0);
  return Posterior{head_mu_(readout), logvar};
}

Posterior GraphVae::encode(const Graph& g) const {
  return encode(g, spectral_features(g, cfg_.feature_dim).matrix);
}

Var GraphVae::reparameterize(const Posterior& post, Rng& rng) const {
  Tensor noise = Tensor::zeros(post.mu.value().shape);
  for (double& x : noise.data) x = rng.normal();
  return add(post.mu, mul(vexp(scale(post.logvar, 0.5)), Var::constant(std::move(noise))));
}

Var GraphVae::decode_logits(const Var& z) const {
  if (cfg_.conditional) {
    throw std::logic_error("GraphVae::decode_logits: conditional model needs a condition");
  }
  return decoder_(z);
}

Var GraphVae::decode_logits(const Var& z, const Var& cond) const {
  if (!cfg_.conditional) {
    throw std::logic_error("GraphVae::decode_logits: plain model takes no condition");
  }
  if (cond.value().cols() != kPropertyCount || cond.value().rows() != z.value().rows()) {
    throw std::invalid_argument("GraphVae::decode_logits: condition shape mismatch");
  }
  return decoder_(concat_cols(z, cond));
}

Var GraphVae::decode(const Var& z) const { return take_stride(pair_softmax(decode_logits(z)), 1, 2); }

Var GraphVae::decode(const Var& z, const Var& cond) const {
  return take_stride(pair_softmax(decode_logits(z, cond)), 1, 2);
}

std::vector<std::pair<std::string, Var>> GraphVae::named_params() const {
  std::vector<std::pair<std::string, Var>> out;
  for (std::size_t k = 0; k < gin_.size(); ++k) {
    const std::string base = "encoder/gin" + std::to_string(k + 1);
    for (std::size_t l = 0; l < gin_[k].mlp.layers.size(); ++l) {
      const std::string lin = base + "/lin" + std::to_string(l + 1);
      out.emplace_back(lin + "/weight", gin_[k].mlp.layers[l].weight);
      out.emplace_back(lin + "/bias", gin_[k].mlp.layers[l].bias);
    }
    out.emplace_back(base + "/eps", gin_[k].eps);
  }
  out.emplace_back("encoder/mu/weight", head_mu_.weight);
  out.emplace_back("encoder/mu/bias", head_mu_.bias);
  out.emplace_back("encoder/logvar/weight", head_logvar_.weight);
  out.emplace_back("encoder/logvar/bias", head_logvar_.bias);

  const std::string section = cfg_.conditional ? "conditional_decoder" : "decoder";
  for (std::size_t l = 0; l < decoder_.layers.size(); ++l) {
    const std::string lin = section + "/lin" + std::to_string(l + 1);
    out.emplace_back(lin + "/weight", decoder_.layers[l].weight);
    out.emplace_back(lin + "/bias", decoder_.layers[l].bias);
  }
  return out;
}

std::vector<Var> GraphVae::params() const {
  std::vector<Var> out;
  for (auto& [name, var] : named_params()) out.push_back(var);
  return out;
}

long long GraphVae::parameter_count() const { return param_count(params()); }

Checkpoint GraphVae::to_checkpoint() const {
  Checkpoint ckpt;
  nlohmann::json manifest;
  manifest["kind"] = "vae";
  manifest["gin_layers"] = cfg_.gin_layers;
  manifest["hidden"] = cfg_.hidden;
  manifest["latent"] = cfg_.latent;
  manifest["feature_dim"] = cfg_.feature_dim;
  manifest["decoder_layers"] = cfg_.decoder_layers;
  manifest["decoder_hidden"] = cfg_.decoder_hidden;
  manifest["n_max"] = cfg_.n_max;
  manifest["conditional"] = cfg_.conditional;
  manifest["beta"] = cfg_.beta;
  manifest["ordering"] = ordering_name(cfg_.ordering);
  if (!norm.mean.empty()) {
    manifest["normalization"] = {
        {"mean", norm.mean}, {"stddev", norm.stddev}, {"constant", norm.constant}};
  }
  ckpt.manifest_json = manifest.dump();
  for (const auto& [name, var] : named_params()) {
    ckpt.tensors.push_back(NamedTensor{name, var.value()});
  }
  return ckpt;
}

GraphVae GraphVae::from_checkpoint(const Checkpoint& ckpt) {
  const auto manifest = nlohmann::json::parse(ckpt.manifest_json);
  if (manifest.value("kind", "") != "vae") {
    throw std::runtime_error("GraphVae::from_checkpoint: not a vae checkpoint");
  }
  VaeConfig cfg;
  cfg.gin_layers = manifest.at("gin_layers").get<int>();
  cfg.hidden = manifest.at("hidden").get<int>();
  cfg.latent = manifest.at("latent").get<int>();
  cfg.feature_dim = manifest.at("feature_dim").get<int>();
  cfg.decoder_layers = manifest.at("decoder_layers").get<int>();
  cfg.decoder_hidden = manifest.at("decoder_hidden").get<int>();
  cfg.n_max = manifest.at("n_max").get<int>();
  cfg.conditional = manifest.at("conditional").get<bool>();
  cfg.beta = manifest.at("beta").get<double>();
  cfg.ordering = ordering_from_name(manifest.at("ordering").get<std::string>());

  Rng dummy(0);
  GraphVae vae(cfg, dummy);
  for (auto& [name, var] : vae.named_params()) {
    const Tensor* stored = ckpt.find(name);
    if (stored == nullptr) {
      throw std::runtime_error("GraphVae::from_checkpoint: missing tensor '" + name + "'");
    }
    if (!stored->same_shape(var.value())) {
      throw std::runtime_error("GraphVae::from_checkpoint: shape mismatch for '" + name + "'");
    }
    var.mutable_value() = *stored;
  }
  if (manifest.contains("normalization")) {
    vae.norm.mean = manifest["normalization"].at("mean").get<std::vector<double>>();
    vae.norm.stddev = manifest["normalization"].at("stddev").get<std::vector<double>>();
    vae.norm.constant = manifest["normalization"].at("constant").get<std::vector<bool>>();
  }
  return vae;
}

Var vae_loss(const Var& edge_probs, const Tensor& targets, const Posterior& post, double beta) {
  return add(bce_sum(edge_probs, targets), scale(kl_sum(post.mu, post.logvar), beta));
}

Tensor reconstruction_target(const Graph& g, OrderingKind ordering, int n_max) {
  const auto order = apply_ordering(g, ordering);
  const auto adj = to_padded_adjacency(g, order, n_max);
  const auto tri = upper_triangle(adj);
  Tensor out = Tensor::zeros({1, static_cast<int>(tri.size())});
  std::copy(tri.begin(), tri.end(), out.data.begin());
  return out;
}

namespace {

struct PreparedRecord {
  Tensor features;
  Tensor target;                 // [1 x pairs]
  std::vector<double> cond_norm; // normalized, all slots observed
};

PreparedRecord prepare_record(const DatasetRecord& rec, const VaeConfig& cfg,
                              const NormalizationStats& stats) {
  PreparedRecord out;
  out.features = spectral_features(rec.graph, cfg.feature_dim).matrix;
  out.target = reconstruction_target(rec.graph, cfg.ordering, cfg.n_max);
  if (cfg.conditional) {
    out.cond_norm = normalize_condition(ConditionVector::all_known(rec.properties), stats.mean,
                                        stats.stddev);
  }
  return out;
}

}  // namespace

VaeTrainResult train_vae(const std::vector<DatasetRecord>& records,
                         const std::vector<std::size_t>& train_idx,
                         const std::vector<std::size_t>& val_idx, const VaeTrainConfig& cfg,
                         const NormalizationStats& stats, std::ostream* log_stream) {
  if (train_idx.empty()) throw std::invalid_argument("train_vae: empty training set");
  if (cfg.model.conditional && stats.mean.empty()) {
    throw std::invalid_argument("train_vae: conditional model needs normalization stats");
  }

  Rng model_rng = Rng::for_stream(cfg.seed, 0);
  GraphVae vae(cfg.model, model_rng);
  vae.norm = stats;

  // Feature/target/condition caches, keyed by record index.
  std::vector<PreparedRecord> prepared(records.size());
  std::vector<char> have(records.size(), 0);
  auto prep = [&](std::size_t i) -> const PreparedRecord& {
    if (!have[i]) {
      prepared[i] = prepare_record(records[i], cfg.model, stats);
      have[i] = 1;
    }
    return prepared[i];
  };

  Rng train_rng = Rng::for_stream(cfg.seed, 1);
  Adam opt(vae.params(), cfg.lr);
  const int pairs = cfg.model.pair_count();
  const double beta = cfg.model.beta;

  auto run_batch = [&](const std::vector<std::size_t>& batch, bool training) -> double {
    const int b = static_cast<int>(batch.size());
    std::vector<Var> mu_rows, lv_rows, z_rows;
    mu_rows.reserve(batch.size());
    lv_rows.reserve(batch.size());
    z_rows.reserve(batch.size());
    Tensor targets = Tensor::zeros({b, pairs});
    Tensor conds = Tensor::zeros({b, kPropertyCount});

    for (int r = 0; r < b; ++r) {
      const std::size_t idx = batch[static_cast<std::size_t>(r)];
      const PreparedRecord& pr = prep(idx);
      const Posterior post = vae.encode(records[idx].graph, pr.features);
      mu_rows.push_back(post.mu);
      lv_rows.push_back(post.logvar);
      z_rows.push_back(training ? vae.reparameterize(post, train_rng) : post.mu);
      std::copy(pr.target.data.begin(), pr.target.data.end(),
                targets.data.begin() + static_cast<std::ptrdiff_t>(r) * pairs);
      if (cfg.model.conditional) {
        std::vector<double> cond = pr.cond_norm;
        if (training && cfg.mask_fraction > 0.0 && train_rng.uniform() < cfg.mask_fraction) {
          const int hide = train_rng.uniform_int(1, 8);
          for (int slot : train_rng.sample_without_replacement(kPropertyCount, hide)) {
            cond[static_cast<std::size_t>(slot)] = kMaskSentinel;
          }
        }
        std::copy(cond.begin(), cond.end(),
                  conds.data.begin() + static_cast<std::ptrdiff_t>(r) * kPropertyCount);
      }
    }

    const Posterior batch_post{stack_rows(mu_rows), stack_rows(lv_rows)};
    const Var z = stack_rows(z_rows);
    const Var probs = cfg.model.conditional ? vae.decode(z, Var::constant(std::move(conds)))
                                            : vae.decode(z);
    const Var loss = scale(vae_loss(probs, targets, batch_post, beta), 1.0 / b);
    const double loss_value = loss.value().data[0];
    if (training && std::isfinite(loss_value)) {
      backward(loss);
      opt.step();
      opt.zero_grad();
    }
    return loss_value;
  };

  auto eval_split = [&](const std::vector<std::size_t>& idx) -> double {
    if (idx.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    std::size_t done = 0;
    while (done < idx.size()) {
      const std::size_t take = std::min<std::size_t>(idx.size() - done,
                                                     static_cast<std::size_t>(cfg.batch_size));
      std::vector<std::size_t> chunk(idx.begin() + static_cast<std::ptrdiff_t>(done),
                                     idx.begin() + static_cast<std::ptrdiff_t>(done + take));
      total += run_batch(chunk, false) * static_cast<double>(take);
      done += take;
    }
    return total / static_cast<double>(idx.size());
  };

  VaeTrainResult result;
  Checkpoint last_good = vae.to_checkpoint();
  double best_val = std::numeric_limits<double>::infinity();
  result.checkpoint = last_good;

  std::vector<std::size_t> order(train_idx);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    train_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    bool bad = false;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t take = std::min<std::size_t>(order.size() - start,
                                                     static_cast<std::size_t>(cfg.batch_size));
      std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(start + take));
      double batch_loss;
      try {
        batch_loss = run_batch(batch, true);
      } catch (const std::runtime_error&) {
        bad = true;  // optimizer refused a non-finite update
        break;
      }
      if (!std::isfinite(batch_loss)) {
        bad = true;
        break;
      }
      epoch_loss += batch_loss * static_cast<double>(take);
      seen += take;
    }
    if (bad) {
      result.diverged = true;
      result.checkpoint = last_good;
      if (log_stream != nullptr) {
        (*log_stream) << "epoch " << epoch << " diverged; keeping last good checkpoint\n";
      }
      return result;
    }

    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.train_loss = epoch_loss / static_cast<double>(seen);
    entry.val_loss = eval_split(val_idx);
    result.log.push_back(entry);
    if (log_stream != nullptr) {
      (*log_stream) << "epoch " << epoch << " train " << entry.train_loss;
      if (!val_idx.empty()) (*log_stream) << " val " << entry.val_loss;
      (*log_stream) << "\n";
    }

    last_good = vae.to_checkpoint();
    if (val_idx.empty() || entry.val_loss < best_val) {
      best_val = val_idx.empty() ? best_val : entry.val_loss;
      result.checkpoint = last_good;
    }
  }
  return result;
}

double reconstruction_f1(const GraphVae& vae, const std::vector<DatasetRecord>& records,
                         const std::vector<std::size_t>& idx) {
  long long tp = 0, fp = 0, fn = 0;
  for (std::size_t i : idx) {
    const DatasetRecord& rec = records[i];
    const Posterior post = vae.encode(rec.graph);
    Var probs;
    if (vae.config().conditional) {
      const auto cond = normalize_condition(ConditionVector::all_known(rec.properties),
                                            vae.norm.mean, vae.norm.stddev);
      Tensor c = Tensor::zeros({1, kPropertyCount});
      std::copy(cond.begin(), cond.end(), c.data.begin());
      probs = vae.decode(post.mu, Var::constant(std::move(c)));
    } else {
      probs = vae.decode(post.mu);
    }
    const Tensor target = reconstruction_target(rec.graph, vae.config().ordering, vae.config().n_max);
    for (std::size_t k = 0; k < target.data.size(); ++k) {
      const bool pred = probs.value().data[k] > 0.5;
      const bool truth = target.data[k] > 0.5;
      if (pred && truth) ++tp;
      if (pred && !truth) ++fp;
      if (!pred && truth) ++fn;
    }
  }
  const double denom = static_cast<double>(2 * tp + fp + fn);
  return denom == 0.0 ? 1.0 : 2.0 * static_cast<double>(tp) / denom;
}

std::optional<Graph> graph_from_logits(const Var& logits, int n_max,
                                       const GenerateOptions& options, Rng& rng) {
  std::vector<double> tri;
  double threshold = options.threshold;
  if (options.gumbel) {
    const GumbelSample gs = gumbel_softmax_st(logits, options.tau, rng);
    tri = take_stride(gs.hard, 1, 2).value().data;
    threshold = 0.5;  // entries are exactly 0 or 1
  } else {
    tri = take_stride(pair_softmax(logits), 1, 2).value().data;
  }
  std::vector<double> dense(static_cast<std::size_t>(n_max) * static_cast<std::size_t>(n_max), 0.0);
  std::size_t k = 0;
  for (int i = 0; i < n_max; ++i) {
    for (int j = i + 1; j < n_max; ++j, ++k) {
      dense[static_cast<std::size_t>(i) * n_max + j] = tri[k];
      dense[static_cast<std::size_t>(j) * n_max + i] = tri[k];
    }
  }
  return from_dense_adjacency(dense, n_max, threshold);
}

GenerationResult generate_graph_cvae(const ConditionVector& cond, const GraphVae& vae, Rng& rng,
                                     const GenerateOptions& options) {
  if (!vae.config().conditional) {
    throw std::invalid_argument("generate_graph_cvae: needs a conditional decoder");
  }
  const auto row = normalize_condition(cond, vae.norm.mean, vae.norm.stddev);
  Tensor c = Tensor::zeros({1, kPropertyCount});
  std::copy(row.begin(), row.end(), c.data.begin());
  const Var cond_var = Var::constant(std::move(c));

  GenerationResult out;
  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    out.attempts = attempt;
    Tensor z = Tensor::zeros({1, vae.config().latent});
    for (double& x : z.data) x = rng.normal();
    const Var logits = vae.decode_logits(Var::constant(std::move(z)), cond_var);
    auto g = graph_from_logits(logits, vae.config().n_max, options, rng);
    if (g.has_value()) {
      out.graph = std::move(g);
      return out;
    }
  }
  return out;
}

}  // namespace graphgen
