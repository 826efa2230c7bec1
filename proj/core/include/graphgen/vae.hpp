#pragma once

#include <cstdint>
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

namespace graphgen {

struct VaeConfig {
  int gin_layers = 2;
  int hidden = 64;
  int latent = 32;
  int feature_dim = 10;
  int decoder_layers = 3;
  int decoder_hidden = 256;
  int n_max = 100;
  bool conditional = false;  // decoder input latent + 15 condition slots
  double beta = 0.05;
  OrderingKind ordering = OrderingKind::BfsDegree;

  int pair_count() const { return n_max * (n_max - 1) / 2; }
};

struct Posterior {
  Var mu;      // [1 x latent] (or [B x latent] when stacked)
  Var logvar;  // same shape as mu
};

/// GIN encoder to a diagonal Gaussian latent plus an MLP decoder over
/// upper-triangle pair logits. `conditional` switches the decoder input
/// to the latent concatenated with a normalized 15-slot condition (the
/// conditional baseline); the plain decoder feeds the diffusion pipeline.
class GraphVae {
 public:
  GraphVae(const VaeConfig& cfg, Rng& rng);

  const VaeConfig& config() const { return cfg_; }

  /// Training-split z-score stats carried along for conditional decoding
  /// and for downstream conditioning; persisted in the checkpoint.
  NormalizationStats norm;

  Posterior encode(const Graph& g, const Tensor& features) const;
  Posterior encode(const Graph& g) const;  // spectral features computed here

  /// z = mu + exp(logvar / 2) * standard normal draw.
  Var reparameterize(const Posterior& post, Rng& rng) const;

  Var decode_logits(const Var& z) const;                    // [B x 2 pairs]
  Var decode_logits(const Var& z, const Var& cond) const;   // conditional
  Var decode(const Var& z) const;                           // [B x pairs] edge probs
  Var decode(const Var& z, const Var& cond) const;

  std::vector<std::pair<std::string, Var>> named_params() const;
  std::vector<Var> params() const;
  long long parameter_count() const;

  Checkpoint to_checkpoint() const;
  static GraphVae from_checkpoint(const Checkpoint& ckpt);

 private:
  VaeConfig cfg_;
  std::vector<GinLayer> gin_;
  Linear head_mu_;
  Linear head_logvar_;
  Mlp decoder_;
};

/// BCE over the pair slots (padding slots are hard zeros) plus
/// beta * KL against the standard normal, summed over the batch rows.
Var vae_loss(const Var& edge_probs, const Tensor& targets, const Posterior& post, double beta);

/// The 0/1 reconstruction target: the graph's adjacency under the
/// configured ordering, padded to n_max, upper triangle as one row.
Tensor reconstruction_target(const Graph& g, OrderingKind ordering, int n_max);

struct VaeTrainConfig {
  VaeConfig model;
  int epochs = 200;
  int batch_size = 256;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  /// Conditional models only: fraction of training samples whose
  /// condition gets 1..8 random slots hidden, mirroring masked eval.
  double mask_fraction = 0.0;
};

struct TrainLogEntry {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct VaeTrainResult {
  Checkpoint checkpoint;  // best validation loss (last epoch if no val set)
  std::vector<TrainLogEntry> log;
  bool diverged = false;  // NaN loss hit; checkpoint is the last good state
};

VaeTrainResult train_vae(const std::vector<DatasetRecord>& records,
                         const std::vector<std::size_t>& train_idx,
                         const std::vector<std::size_t>& val_idx, const VaeTrainConfig& cfg,
                         const NormalizationStats& stats, std::ostream* log_stream = nullptr);

/// Micro-averaged edge F1 of deterministic reconstructions (z = mu,
/// probability threshold 0.5) against the ordered targets.
double reconstruction_f1(const GraphVae& vae, const std::vector<DatasetRecord>& records,
                         const std::vector<std::size_t>& idx);

struct GenerateOptions {
  bool gumbel = true;      // straight-through Gumbel edges; false thresholds probs
  double tau = 1.0;
  double threshold = 0.5;  // used when gumbel is false
  int max_attempts = 5;    // resample budget before giving up
};

struct GenerationResult {
  std::optional<Graph> graph;
  int attempts = 0;
};

/// One decoder output row -> graph: straight-through Gumbel edges (or a
/// plain probability threshold), symmetrized, isolated positions dropped.
/// nullopt when nothing survives.
std::optional<Graph> graph_from_logits(const Var& logits, int n_max,
                                       const GenerateOptions& options, Rng& rng);

/// Baseline sampler: z ~ N(0, I) pushed through the conditional decoder
/// with the normalized condition; retries on empty generations.
GenerationResult generate_graph_cvae(const ConditionVector& cond, const GraphVae& vae, Rng& rng,
                                     const GenerateOptions& options = {});

}  // namespace graphgen
