#pragma once

#include <cstdint>
#include <string>

namespace graphgen {

/// Every knob of a run in one place. Profiles fill the defaults; a JSON
/// config file may override them; individual CLI flags win over both.
struct RunConfig {
  std::string profile = "desk";
  std::uint64_t seed = 42;

  // dataset
  long long total = 5000;
  int n_max = 32;
  int n_min = 10;
  std::string proportions = "paper";  // "paper" mix or "uniform"

  // graph VAE
  int vae_epochs = 60;
  int gin_layers = 2;
  int hidden = 64;
  int latent = 32;
  int feature_dim = 10;
  int decoder_layers = 3;
  int decoder_hidden = 256;
  double beta = 0.05;
  std::string ordering = "bfs_degree";

  // latent diffusion
  int ldm_epochs = 40;
  int T = 500;
  int denoiser_hidden = 512;
  int cond_embed = 64;
  double mask_fraction = 0.25;  // condition-slot dropout during ldm training

  // shared optimization
  int batch_size = 256;
  double lr = 1e-3;

  // evaluation
  std::string protocol = "within";
  long long eval_limit = 0;  // 0 = whole split
  int workers = 1;
};

/// "desk" (the default: 5k graphs, n_max 32, short trainings) or
/// "paper" (full-scale settings; days of CPU time).
RunConfig make_profile(const std::string& name);

/// Overwrites fields named by the JSON object's keys. Unknown keys or
/// wrong value types throw std::invalid_argument.
void apply_json(RunConfig& cfg, const std::string& json_text);

/// Profile defaults, then the JSON file at `config_path` (if nonempty),
/// then the file named by the GRAPHGEN_CONFIG environment variable (the
/// environment wins over the flag-provided path).
RunConfig load_config(const std::string& profile, const std::string& config_path);

/// Canonical "key value" rendering; the config hash is FNV-1a 64 of it.
std::string render_config(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);
std::string config_hash_hex(const RunConfig& cfg);

}  // namespace graphgen
