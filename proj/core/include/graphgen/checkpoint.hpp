#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "graphgen/tensor.hpp"

namespace graphgen {

struct NamedTensor {
  std::string name;  // section-prefixed, e.g. "encoder/gin1/lin1/weight"
  Tensor tensor;
};

/// Versioned tensor container. On disk: "GGCK", u32 version, u64
/// manifest length + JSON, u64 tensor count, then per tensor u32 name
/// length + name, u32 ndim, u64 dims, and row-major f32 little-endian
/// values. Values are stored f32; in memory everything is double.
struct Checkpoint {
  std::uint32_t version = 1;
  std::string manifest_json;  // hyperparameters, sections, schedule, stats
  std::vector<NamedTensor> tensors;

  const Tensor* find(const std::string& name) const;
};

void save_checkpoint(std::ostream& os, const Checkpoint& ckpt);
Checkpoint load_checkpoint(std::istream& is);

void save_checkpoint_file(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint_file(const std::string& path);

}  // namespace graphgen
