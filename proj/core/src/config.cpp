#include "graphgen/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace graphgen {

RunConfig make_profile(const std::string& name) {
  RunConfig cfg;  // defaults are the desk profile
  if (name == "desk") {
    return cfg;
  }
  if (name == "paper") {
    cfg.profile = "paper";
    cfg.total = 1367703;
    cfg.n_max = 100;
    cfg.vae_epochs = 200;
    cfg.ldm_epochs = 100;
    cfg.mask_fraction = 0.0;
    return cfg;
  }
  throw std::invalid_argument("unknown profile '" + name + "' (expected desk or paper)");
}

void apply_json(RunConfig& cfg, const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");

  auto set = [&](const std::string& key, const nlohmann::json& value) {
    try {
      if (key == "profile") cfg.profile = value.get<std::string>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "total") cfg.total = value.get<long long>();
      else if (key == "n_max") cfg.n_max = value.get<int>();
      else if (key == "n_min") cfg.n_min = value.get<int>();
      else if (key == "proportions") cfg.proportions = value.get<std::string>();
      else if (key == "vae_epochs") cfg.vae_epochs = value.get<int>();
      else if (key == "gin_layers") cfg.gin_layers = value.get<int>();
      else if (key == "hidden") cfg.hidden = value.get<int>();
      else if (key == "latent") cfg.latent = value.get<int>();
      else if (key == "feature_dim") cfg.feature_dim = value.get<int>();
      else if (key == "decoder_layers") cfg.decoder_layers = value.get<int>();
      else if (key == "decoder_hidden") cfg.decoder_hidden = value.get<int>();
      else if (key == "beta") cfg.beta = value.get<double>();
      else if (key == "ordering") cfg.ordering = value.get<std::string>();
      else if (key == "ldm_epochs") cfg.ldm_epochs = value.get<int>();
      else if (key == "T") cfg.T = value.get<int>();
      else if (key == "denoiser_hidden") cfg.denoiser_hidden = value.get<int>();
      else if (key == "cond_embed") cfg.cond_embed = value.get<int>();
      else if (key == "mask_fraction") cfg.mask_fraction = value.get<double>();
      else if (key == "batch_size") cfg.batch_size = value.get<int>();
      else if (key == "lr") cfg.lr = value.get<double>();
      else if (key == "protocol") cfg.protocol = value.get<std::string>();
      else if (key == "eval_limit") cfg.eval_limit = value.get<long long>();
      else if (key == "workers") cfg.workers = value.get<int>();
      else throw std::invalid_argument("config: unknown key '" + key + "'");
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument("config: wrong value type for '" + key + "'");
    }
  };
  for (const auto& [key, value] : j.items()) set(key, value);
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("config: cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

RunConfig load_config(const std::string& profile, const std::string& config_path) {
  RunConfig cfg = make_profile(profile);
  if (!config_path.empty()) apply_json(cfg, slurp(config_path));
  if (const char* env = std::getenv("GRAPHGEN_CONFIG"); env != nullptr && *env != '\0') {
    apply_json(cfg, slurp(env));
  }
  return cfg;
}

std::string render_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "profile " << cfg.profile << "\n";
  out << "seed " << cfg.seed << "\n";
  out << "total " << cfg.total << "\n";
  out << "n_max " << cfg.n_max << "\n";
  out << "n_min " << cfg.n_min << "\n";
  out << "proportions " << cfg.proportions << "\n";
  out << "vae_epochs " << cfg.vae_epochs << "\n";
  out << "gin_layers " << cfg.gin_layers << "\n";
  out << "hidden " << cfg.hidden << "\n";
  out << "latent " << cfg.latent << "\n";
  out << "feature_dim " << cfg.feature_dim << "\n";
  out << "decoder_layers " << cfg.decoder_layers << "\n";
  out << "decoder_hidden " << cfg.decoder_hidden << "\n";
  out << "beta " << cfg.beta << "\n";
  out << "ordering " << cfg.ordering << "\n";
  out << "ldm_epochs " << cfg.ldm_epochs << "\n";
  out << "T " << cfg.T << "\n";
  out << "denoiser_hidden " << cfg.denoiser_hidden << "\n";
  out << "cond_embed " << cfg.cond_embed << "\n";
  out << "mask_fraction " << cfg.mask_fraction << "\n";
  out << "batch_size " << cfg.batch_size << "\n";
  out << "lr " << cfg.lr << "\n";
  out << "protocol " << cfg.protocol << "\n";
  out << "eval_limit " << cfg.eval_limit << "\n";
  out << "workers " << cfg.workers << "\n";
  return out.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string text = render_config(cfg);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string config_hash_hex(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  return buf;
}

}  // namespace graphgen
