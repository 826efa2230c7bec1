#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graphgen/autograd.hpp"
#include "graphgen/checkpoint.hpp"
#include "graphgen/dataset.hpp"
#include "graphgen/graph.hpp"
#include "graphgen/nn.hpp"
#include "graphgen/properties.hpp"
#include "graphgen/rng.hpp"
#include "graphgen/vae.hpp"

namespace graphgen {

/// Cosine noise schedule, 1-indexed steps: beta(1)..beta(T). alpha_bar is
/// the running product of alpha, so the single-shot forward kernel and the
/// chained per-step kernels agree even where beta got clipped.
struct NoiseSchedule {
  int T = 0;
  std::vector<double> betas;       // betas[t-1] = beta_t
  std::vector<double> alphas;      // 1 - beta_t
  std::vector<double> alpha_bars;  // prod_{s<=t} alpha_s

  double beta(int t) const { return betas[static_cast<std::size_t>(t - 1)]; }
  double alpha(int t) const { return alphas[static_cast<std::size_t>(t - 1)]; }
  double alpha_bar(int t) const { return alpha_bars[static_cast<std::size_t>(t - 1)]; }
};

/// f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2) with s = 0.008;
/// beta_t = 1 - f(t)/f(t-1), clipped into (0, 0.999]. T must be >= 2.
NoiseSchedule cosine_schedule(int T);

/// sqrt(alpha_bar_t) z + sqrt(1 - alpha_bar_t) noise.
Tensor q_sample(const Tensor& z, int t, const Tensor& noise, const NoiseSchedule& sched);

/// Noise prediction net. Input is the noisy latent next to the condition
/// embedding; the step embedding is added to each hidden pre-activation.
struct Denoiser {
  Linear lin1, lin2, lin3;
  int hidden = 0;

  Denoiser() = default;
  Denoiser(int latent, int cond_embed, int hidden, Rng& rng);

  Var operator()(const Var& z_t, int t, const Var& y) const;
};

struct DiffusionConfig {
  int T = 500;
  int latent = 32;
  int hidden = 512;
  int cond_embed = 64;
};

using DenoiserFn = std::function<Var(const Var& z_t, int t, const Var& y)>;

/// Per sample: t ~ U[1, T], eps ~ N(0, I), then the per-element mean of
/// ||eps - fn(q_sample(z, t, eps), t, y)||^2; averaged over the batch.
/// Draw order per sample is t first, then the eps entries.
Var ldm_loss(const std::vector<Tensor>& latents, const std::vector<Var>& ys,
             const NoiseSchedule& sched, const DenoiserFn& fn, Rng& rng);

/// Property-conditioned latent diffusion over the VAE posterior means.
/// The condition encoder embeds a normalized 15-slot vector (hidden slots
/// carry the sentinel); the denoiser predicts the forward noise.
class DiffusionModel {
 public:
  DiffusionModel(const DiffusionConfig& cfg, Rng& rng);

  const DiffusionConfig& config() const { return cfg_; }
  const NoiseSchedule& schedule() const { return sched_; }

  /// Training-split z-score stats; persisted in the checkpoint.
  NormalizationStats norm;

  /// Embedding of an already normalized [B x 15] condition block.
  Var embed_condition(const Var& cond) const;
  /// Normalizes against `norm` (sentinel into hidden slots) and embeds.
  Var embed_condition(const ConditionVector& cond) const;

  Var denoise(const Var& z_t, int t, const Var& y) const;

  /// Ancestral sampling from z_T ~ N(0, I) down to z_0 ([1 x latent]).
  /// sigma_t = sqrt(beta_t); the final step adds no noise.
  Tensor sample(const ConditionVector& cond, Rng& rng) const;

  std::vector<std::pair<std::string, Var>> named_params() const;
  std::vector<Var> params() const;
  long long parameter_count() const;

  Checkpoint to_checkpoint() const;
  static DiffusionModel from_checkpoint(const Checkpoint& ckpt);

 private:
  DiffusionConfig cfg_;
  NoiseSchedule sched_;
  Mlp cond_encoder_;  // 15 -> cond_embed -> cond_embed
  Denoiser denoiser_;
};

struct LdmTrainConfig {
  DiffusionConfig model;
  int epochs = 200;
  int batch_size = 256;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  /// Fraction of training samples whose condition gets 1..8 random
  /// slots hidden, so the model learns to work from partial targets.
  double mask_fraction = 0.0;
};

struct LdmTrainResult {
  Checkpoint checkpoint;  // best validation loss (last epoch if no val set)
  std::vector<TrainLogEntry> log;
  bool diverged = false;  // non-finite loss hit; checkpoint is the last good state
};

/// Trains the diffusion model on the frozen VAE's posterior means.
/// Normalization stats are taken from the VAE and copied into the result.
LdmTrainResult train_diffusion(const std::vector<DatasetRecord>& records,
                               const std::vector<std::size_t>& train_idx,
                               const std::vector<std::size_t>& val_idx, const GraphVae& vae,
                               const LdmTrainConfig& cfg, std::ostream* log_stream = nullptr);

/// Samples a latent for the condition, decodes it with the plain VAE
/// decoder and extracts a graph; retries on empty generations.
GenerationResult generate_graph(const ConditionVector& cond, const GraphVae& vae,
                                const DiffusionModel& ldm, Rng& rng,
                                const GenerateOptions& options = {});

}  // namespace graphgen
