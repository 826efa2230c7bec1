// Microbenchmarks for the hot paths: property extraction over a whole
// record batch, the Laplacian eigensolve behind node features, one
// denoiser application, and a full ancestral sampling pass.
#include <benchmark/benchmark.h>

#include <vector>

#include "graphgen/dataset.hpp"
#include "graphgen/diffusion.hpp"
#include "graphgen/graph.hpp"
#include "graphgen/properties.hpp"
#include "graphgen/rng.hpp"
#include "graphgen/vae.hpp"

namespace {

graphgen::Graph dense_graph(int n, double p, std::uint64_t seed) {
  graphgen::Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) edges.push_back({i, j});
    }
  }
  if (edges.empty()) edges.push_back({0, 1});
  return graphgen::from_edge_list(edges, n);
}

void BM_Properties(benchmark::State& state) {
  const graphgen::Graph g = dense_graph(static_cast<int>(state.range(0)), 0.3, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(graphgen::compute_properties(g));
  }
}
BENCHMARK(BM_Properties)->Arg(16)->Arg(32)->Arg(64)->Arg(100);

void BM_SpectralFeatures(benchmark::State& state) {
  const graphgen::Graph g = dense_graph(static_cast<int>(state.range(0)), 0.3, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(graphgen::spectral_features(g, 10));
  }
}
BENCHMARK(BM_SpectralFeatures)->Arg(16)->Arg(32)->Arg(64)->Arg(100);

void BM_FamilySampling(benchmark::State& state) {
  graphgen::Rng rng(13);
  int family = 0;
  for (auto _ : state) {
    const auto f = static_cast<graphgen::GraphFamily>(family % graphgen::kFamilyCount);
    benchmark::DoNotOptimize(graphgen::sample_graph(f, rng, 10, 32));
    ++family;
  }
}
BENCHMARK(BM_FamilySampling);

void BM_EncoderForward(benchmark::State& state) {
  graphgen::Rng rng(17);
  graphgen::VaeConfig cfg;
  cfg.n_max = 32;
  const graphgen::GraphVae vae(cfg, rng);
  const graphgen::Graph g = dense_graph(24, 0.3, 19);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vae.encode(g));
  }
}
BENCHMARK(BM_EncoderForward);

void BM_DenoiserStep(benchmark::State& state) {
  graphgen::Rng rng(23);
  graphgen::DiffusionModel model(graphgen::DiffusionConfig{}, rng);
  model.norm.mean.assign(graphgen::kPropertyCount, 0.0);
  model.norm.stddev.assign(graphgen::kPropertyCount, 1.0);
  model.norm.constant.assign(graphgen::kPropertyCount, false);
  graphgen::Tensor z = graphgen::Tensor::zeros({1, 32});
  for (double& x : z.data) x = rng.normal();
  graphgen::ConditionVector cond;
  cond.values[graphgen::kNodes] = 20.0;
  cond.known[graphgen::kNodes] = true;
  const graphgen::Var y = model.embed_condition(cond);
  const graphgen::Var zv = graphgen::Var::constant(z);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.denoise(zv, 250, y));
  }
}
BENCHMARK(BM_DenoiserStep);

void BM_AncestralSample(benchmark::State& state) {
  graphgen::Rng init(29);
  graphgen::DiffusionConfig cfg;
  cfg.T = static_cast<int>(state.range(0));
  graphgen::DiffusionModel model(cfg, init);
  model.norm.mean.assign(graphgen::kPropertyCount, 0.0);
  model.norm.stddev.assign(graphgen::kPropertyCount, 1.0);
  model.norm.constant.assign(graphgen::kPropertyCount, false);
  graphgen::ConditionVector cond;
  cond.values[graphgen::kNodes] = 20.0;
  cond.known[graphgen::kNodes] = true;
  graphgen::Rng rng(31);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.sample(cond, rng));
  }
}
BENCHMARK(BM_AncestralSample)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
