#include "graphgen/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace graphgen {

NoiseSchedule cosine_schedule(int T) {
  if (T < 2) throw std::invalid_argument("cosine_schedule: T must be >= 2");
  const double s = 0.008;
  auto f = [&](int t) {
    const double x = ((static_cast<double>(t) / T + s) / (1.0 + s)) * (std::numbers::pi / 2.0);
    const double c = std::cos(x);
    return c * c;
  };
  NoiseSchedule out;
  out.T = T;
  out.betas.reserve(static_cast<std::size_t>(T));
  out.alphas.reserve(static_cast<std::size_t>(T));
  out.alpha_bars.reserve(static_cast<std::size_t>(T));
  double prev = f(0);
  double running = 1.0;
  for (int t = 1; t <= T; ++t) {
    const double ft = f(t);
    const double beta = std::min(1.0 - ft / prev, 0.999);
    if (!(beta > 0.0 && beta < 1.0)) {
      throw std::runtime_error("cosine_schedule: beta out of range at t=" + std::to_string(t));
    }
    prev = ft;
    const double alpha = 1.0 - beta;
    running *= alpha;
    out.betas.push_back(beta);
    out.alphas.push_back(alpha);
    out.alpha_bars.push_back(running);
  }
  return out;
}

Tensor q_sample(const Tensor& z, int t, const Tensor& noise, const NoiseSchedule& sched) {
  if (t < 1 || t > sched.T) throw std::invalid_argument("q_sample: t out of range");
  if (!z.same_shape(noise)) throw std::invalid_argument("q_sample: noise shape mismatch");
  const double abar = sched.alpha_bar(t);
  const double a = std::sqrt(abar);
  const double b = std::sqrt(1.0 - abar);
  Tensor out = z;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = a * z.data[i] + b * noise.data[i];
  }
  return out;
}

Denoiser::Denoiser(int latent, int cond_embed, int hidden, Rng& rng)
    : lin1(latent + cond_embed, hidden, rng),
      lin2(hidden, hidden, rng),
      lin3(hidden, latent, rng),
      hidden(hidden) {}

Var Denoiser::operator()(const Var& z_t, int t, const Var& y) const {
  const Var emb = Var::constant(time_embedding(t, hidden));
  Var h = relu(add_rowvec(lin1(concat_cols(z_t, y)), emb));
  h = relu(add_rowvec(lin2(h), emb));
  return lin3(h);
}

Var ldm_loss(const std::vector<Tensor>& latents, const std::vector<Var>& ys,
             const NoiseSchedule& sched, const DenoiserFn& fn, Rng& rng) {
  if (latents.empty()) throw std::invalid_argument("ldm_loss: empty batch");
  if (latents.size() != ys.size()) throw std::invalid_argument("ldm_loss: latent/condition count mismatch");
  Var total;
  for (std::size_t i = 0; i < latents.size(); ++i) {
    const int t = rng.uniform_int(1, sched.T);
    Tensor eps = Tensor::zeros(latents[i].shape);
    for (double& x : eps.data) x = rng.normal();
    const Var pred = fn(Var::constant(q_sample(latents[i], t, eps, sched)), t, ys[i]);
    const Var term = mse_mean(pred, eps);
    total = total.defined() ? add(total, term) : term;
  }
  return scale(total, 1.0 / static_cast<double>(latents.size()));
}

DiffusionModel::DiffusionModel(const DiffusionConfig& cfg, Rng& rng) : cfg_(cfg) {
  if (cfg.latent < 1 || cfg.cond_embed < 1) throw std::invalid_argument("DiffusionModel: invalid dims");
  if (cfg.hidden < 2 || cfg.hidden % 2 != 0) {
    throw std::invalid_argument("DiffusionModel: hidden width must be even (step embedding)");
  }
  sched_ = cosine_schedule(cfg.T);
  cond_encoder_ = Mlp({kPropertyCount, cfg.cond_embed, cfg.cond_embed}, rng);
  denoiser_ = Denoiser(cfg.latent, cfg.cond_embed, cfg.hidden, rng);
}

Var DiffusionModel::embed_condition(const Var& cond) const {
  if (cond.value().cols() != kPropertyCount) {
    throw std::invalid_argument("DiffusionModel: condition must have 15 slots");
  }
  return cond_encoder_(cond);
}

Var DiffusionModel::embed_condition(const ConditionVector& cond) const {
  const auto row = normalize_condition(cond, norm.mean, norm.stddev);
  Tensor c = Tensor::zeros({1, kPropertyCount});
  std::copy(row.begin(), row.end(), c.data.begin());
  return embed_condition(Var::constant(std::move(c)));
}

Var DiffusionModel::denoise(const Var& z_t, int t, const Var& y) const {
  if (z_t.value().cols() != cfg_.latent) {
    throw std::invalid_argument("DiffusionModel::denoise: latent width mismatch");
  }
  if (t < 1 || t > cfg_.T) throw std::invalid_argument("DiffusionModel::denoise: t out of range");
  return denoiser_(z_t, t, y);
}

Tensor DiffusionModel::sample(const ConditionVector& cond, Rng& rng) const {
  const Var y = embed_condition(cond);
  Tensor z = Tensor::zeros({1, cfg_.latent});
  for (double& x : z.data) x = rng.normal();
  for (int t = cfg_.T; t >= 1; --t) {
    const Var pred = denoiser_(Var::constant(z), t, y);
    const Tensor& eps_hat = pred.value();
    const double coef = sched_.beta(t) / std::sqrt(1.0 - sched_.alpha_bar(t));
    const double inv_sqrt_alpha = 1.0 / std::sqrt(sched_.alpha(t));
    for (std::size_t k = 0; k < z.data.size(); ++k) {
      z.data[k] = inv_sqrt_alpha * (z.data[k] - coef * eps_hat.data[k]);
    }
    if (t > 1) {
      const double sigma = std::sqrt(sched_.beta(t));
      for (double& x : z.data) x += sigma * rng.normal();
    }
  }
  return z;
}

std::vector<std::pair<std::string, Var>> DiffusionModel::named_params() const {
  std::vector<std::pair<std::string, Var>> out;
  const Linear* lins[] = {&denoiser_.lin1, &denoiser_.lin2, &denoiser_.lin3};
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string base = "denoiser/lin" + std::to_string(i + 1);
    out.emplace_back(base + "/weight", lins[i]->weight);
    out.emplace_back(base + "/bias", lins[i]->bias);
  }
  for (std::size_t l = 0; l < cond_encoder_.layers.size(); ++l) {
    const std::string base = "condition_encoder/lin" + std::to_string(l + 1);
    out.emplace_back(base + "/weight", cond_encoder_.layers[l].weight);
    out.emplace_back(base + "/bias", cond_encoder_.layers[l].bias);
  }
  return out;
}

std::vector<Var> DiffusionModel::params() const {
  std::vector<Var> out;
  for (auto& [name, var] : named_params()) out.push_back(var);
  return out;
}

long long DiffusionModel::parameter_count() const { return param_count(params()); }

Checkpoint DiffusionModel::to_checkpoint() const {
  Checkpoint ckpt;
  nlohmann::json manifest;
  manifest["kind"] = "ldm";
  manifest["T"] = cfg_.T;
  manifest["latent"] = cfg_.latent;
  manifest["hidden"] = cfg_.hidden;
  manifest["cond_embed"] = cfg_.cond_embed;
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

DiffusionModel DiffusionModel::from_checkpoint(const Checkpoint& ckpt) {
  const auto manifest = nlohmann::json::parse(ckpt.manifest_json);
  if (manifest.value("kind", "") != "ldm") {
    throw std::runtime_error("DiffusionModel::from_checkpoint: not an ldm checkpoint");
  }
  DiffusionConfig cfg;
  cfg.T = manifest.at("T").get<int>();
  cfg.latent = manifest.at("latent").get<int>();
  cfg.hidden = manifest.at("hidden").get<int>();
  cfg.cond_embed = manifest.at("cond_embed").get<int>();

  Rng dummy(0);
  DiffusionModel model(cfg, dummy);
  for (auto& [name, var] : model.named_params()) {
    const Tensor* stored = ckpt.find(name);
    if (stored == nullptr) {
      throw std::runtime_error("DiffusionModel::from_checkpoint: missing tensor '" + name + "'");
    }
    if (!stored->same_shape(var.value())) {
      throw std::runtime_error("DiffusionModel::from_checkpoint: shape mismatch for '" + name + "'");
    }
    var.mutable_value() = *stored;
  }
  if (manifest.contains("normalization")) {
    model.norm.mean = manifest["normalization"].at("mean").get<std::vector<double>>();
    model.norm.stddev = manifest["normalization"].at("stddev").get<std::vector<double>>();
    model.norm.constant = manifest["normalization"].at("constant").get<std::vector<bool>>();
  }
  return model;
}

LdmTrainResult train_diffusion(const std::vector<DatasetRecord>& records,
                               const std::vector<std::size_t>& train_idx,
                               const std::vector<std::size_t>& val_idx, const GraphVae& vae,
                               const LdmTrainConfig& cfg, std::ostream* log_stream) {
  if (train_idx.empty()) throw std::invalid_argument("train_diffusion: empty training set");
  if (vae.norm.mean.empty()) {
    throw std::invalid_argument("train_diffusion: the encoder carries no normalization stats");
  }
  if (cfg.model.latent != vae.config().latent) {
    throw std::invalid_argument("train_diffusion: latent width differs from the encoder's");
  }

  Rng model_rng = Rng::for_stream(cfg.seed, 2);
  DiffusionModel model(cfg.model, model_rng);
  model.norm = vae.norm;

  // Posterior means and normalized conditions, keyed by record index.
  std::vector<Tensor> latents(records.size());
  std::vector<std::vector<double>> conds(records.size());
  std::vector<char> have(records.size(), 0);
  auto prep = [&](std::size_t i) {
    if (!have[i]) {
      latents[i] = vae.encode(records[i].graph).mu.value();
      conds[i] = normalize_condition(ConditionVector::all_known(records[i].properties),
                                     vae.norm.mean, vae.norm.stddev);
      have[i] = 1;
    }
  };

  Rng train_rng = Rng::for_stream(cfg.seed, 3);
  Adam opt(model.params(), cfg.lr);

  auto run_batch = [&](const std::vector<std::size_t>& batch, bool training, Rng& rng) -> double {
    std::vector<Tensor> zs;
    std::vector<Var> ys;
    zs.reserve(batch.size());
    ys.reserve(batch.size());
    for (std::size_t idx : batch) {
      prep(idx);
      zs.push_back(latents[idx]);
      std::vector<double> cond = conds[idx];
      if (training && cfg.mask_fraction > 0.0 && rng.uniform() < cfg.mask_fraction) {
        const int hide = rng.uniform_int(1, 8);
        for (int slot : rng.sample_without_replacement(kPropertyCount, hide)) {
          cond[static_cast<std::size_t>(slot)] = kMaskSentinel;
        }
      }
      Tensor c = Tensor::zeros({1, kPropertyCount});
      std::copy(cond.begin(), cond.end(), c.data.begin());
      ys.push_back(model.embed_condition(Var::constant(std::move(c))));
    }
    const Var loss = ldm_loss(
        zs, ys, model.schedule(),
        [&](const Var& z_t, int t, const Var& y) { return model.denoise(z_t, t, y); }, rng);
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
    Rng val_rng = Rng::for_stream(cfg.seed, 4);  // same draws every epoch
    double total = 0.0;
    std::size_t done = 0;
    while (done < idx.size()) {
      const std::size_t take = std::min<std::size_t>(idx.size() - done,
                                                     static_cast<std::size_t>(cfg.batch_size));
      std::vector<std::size_t> chunk(idx.begin() + static_cast<std::ptrdiff_t>(done),
                                     idx.begin() + static_cast<std::ptrdiff_t>(done + take));
      total += run_batch(chunk, false, val_rng) * static_cast<double>(take);
      done += take;
    }
    return total / static_cast<double>(idx.size());
  };

  LdmTrainResult result;
  Checkpoint last_good = model.to_checkpoint();
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
        batch_loss = run_batch(batch, true, train_rng);
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

    last_good = model.to_checkpoint();
    if (val_idx.empty() || entry.val_loss < best_val) {
      best_val = val_idx.empty() ? best_val : entry.val_loss;
      result.checkpoint = last_good;
    }
  }
  return result;
}

GenerationResult generate_graph(const ConditionVector& cond, const GraphVae& vae,
                                const DiffusionModel& ldm, Rng& rng,
                                const GenerateOptions& options) {
  if (vae.config().conditional) {
    throw std::invalid_argument("generate_graph: the diffusion pipeline uses the plain decoder");
  }
  GenerationResult out;
  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    out.attempts = attempt;
    const Tensor z = ldm.sample(cond, rng);
    const Var logits = vae.decode_logits(Var::constant(z));
    auto g = graph_from_logits(logits, vae.config().n_max, options, rng);
    if (g.has_value()) {
      out.graph = std::move(g);
      return out;
    }
  }
  return out;
}

}  // namespace graphgen
