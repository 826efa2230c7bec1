#include "graphgen/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace graphgen {

namespace {

constexpr char kMagic[4] = {'G', 'G', 'C', 'K'};

void put_u32(std::ostream& os, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, 8);
}

void put_f32(std::ostream& os, float v) { put_u32(os, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(std::istream& is) {
  char buf[4];
  if (!is.read(buf, 4)) throw std::runtime_error("checkpoint: truncated stream");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  char buf[8];
  if (!is.read(buf, 8)) throw std::runtime_error("checkpoint: truncated stream");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

float get_f32(std::istream& is) { return std::bit_cast<float>(get_u32(is)); }

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& nt : tensors) {
    if (nt.name == name) return &nt.tensor;
  }
  return nullptr;
}

void save_checkpoint(std::ostream& os, const Checkpoint& ckpt) {
  os.write(kMagic, 4);
  put_u32(os, ckpt.version);
  put_u64(os, ckpt.manifest_json.size());
  os.write(ckpt.manifest_json.data(), static_cast<std::streamsize>(ckpt.manifest_json.size()));
  put_u64(os, ckpt.tensors.size());
  for (const auto& nt : ckpt.tensors) {
    put_u32(os, static_cast<std::uint32_t>(nt.name.size()));
    os.write(nt.name.data(), static_cast<std::streamsize>(nt.name.size()));
    put_u32(os, static_cast<std::uint32_t>(nt.tensor.shape.size()));
    for (int d : nt.tensor.shape) put_u64(os, static_cast<std::uint64_t>(d));
    for (double x : nt.tensor.data) put_f32(os, static_cast<float>(x));
  }
  if (!os) throw std::runtime_error("checkpoint: write failed");
}

Checkpoint load_checkpoint(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || magic[0] != kMagic[0] || magic[1] != kMagic[1] ||
      magic[2] != kMagic[2] || magic[3] != kMagic[3]) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  Checkpoint ckpt;
  ckpt.version = get_u32(is);
  if (ckpt.version != 1) throw std::runtime_error("checkpoint: unsupported version");

  const auto manifest_len = get_u64(is);
  ckpt.manifest_json.resize(manifest_len);
  if (manifest_len > 0 &&
      !is.read(ckpt.manifest_json.data(), static_cast<std::streamsize>(manifest_len))) {
    throw std::runtime_error("checkpoint: truncated manifest");
  }

  const auto count = get_u64(is);
  ckpt.tensors.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedTensor nt;
    const auto name_len = get_u32(is);
    nt.name.resize(name_len);
    if (name_len > 0 && !is.read(nt.name.data(), name_len)) {
      throw std::runtime_error("checkpoint: truncated tensor name");
    }
    const auto ndim = get_u32(is);
    nt.tensor.shape.resize(ndim);
    std::size_t numel = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      const auto dim = get_u64(is);
      nt.tensor.shape[d] = static_cast<int>(dim);
      numel *= static_cast<std::size_t>(dim);
    }
    nt.tensor.data.resize(numel);
    for (std::size_t k = 0; k < numel; ++k) nt.tensor.data[k] = static_cast<double>(get_f32(is));
    ckpt.tensors.push_back(std::move(nt));
  }
  return ckpt;
}

void save_checkpoint_file(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
  save_checkpoint(os, ckpt);
}

Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  return load_checkpoint(is);
}

}  // namespace graphgen
