#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include <doctest.h>

#include "graphgen/checkpoint.hpp"

using namespace graphgen;

namespace {

Checkpoint make_sample() {
  Checkpoint ckpt;
  ckpt.manifest_json = R"({"kind":"test","latent":4})";
  ckpt.tensors.push_back({"enc/weight", Tensor({2, 3}, {1.5, -2.25, 0.125, 3.0, -0.5, 7.0})});
  ckpt.tensors.push_back({"enc/bias", Tensor({1, 3}, {0.0, 1.0, -1.0})});
  ckpt.tensors.push_back({"dec/weight", Tensor({3, 1}, {0.25, 0.5, 0.75})});
  return ckpt;
}

void check_equal(const Checkpoint& a, const Checkpoint& b) {
  CHECK(b.version == a.version);
  CHECK(b.manifest_json == a.manifest_json);
  REQUIRE(b.tensors.size() == a.tensors.size());
  for (std::size_t i = 0; i < a.tensors.size(); ++i) {
    CHECK(b.tensors[i].name == a.tensors[i].name);
    CHECK(b.tensors[i].tensor.shape == a.tensors[i].tensor.shape);
    REQUIRE(b.tensors[i].tensor.data.size() == a.tensors[i].tensor.data.size());
    for (std::size_t j = 0; j < a.tensors[i].tensor.data.size(); ++j) {
      // Values travel as f32, so round-trips are exact only for values
      // representable in single precision; the fixture uses such values.
      CHECK(b.tensors[i].tensor.data[j] == a.tensors[i].tensor.data[j]);
    }
  }
}

}  // namespace

TEST_CASE("checkpoint stream round-trip") {
  const Checkpoint ckpt = make_sample();
  std::stringstream ss;
  save_checkpoint(ss, ckpt);
  check_equal(ckpt, load_checkpoint(ss));
}

TEST_CASE("checkpoint file round-trip") {
  const Checkpoint ckpt = make_sample();
  const std::string path =
      (std::filesystem::temp_directory_path() / "ggtest_ckpt_roundtrip.ckpt").string();
  save_checkpoint_file(path, ckpt);
  check_equal(ckpt, load_checkpoint_file(path));
  std::remove(path.c_str());
}

TEST_CASE("f32 storage narrows doubles") {
  Checkpoint ckpt;
  ckpt.tensors.push_back({"w", Tensor({1, 1}, {0.1})});
  std::stringstream ss;
  save_checkpoint(ss, ckpt);
  const Checkpoint back = load_checkpoint(ss);
  CHECK(back.tensors[0].tensor.data[0] ==
        doctest::Approx(0.1).epsilon(1e-7));
  CHECK(back.tensors[0].tensor.data[0] == static_cast<double>(static_cast<float>(0.1)));
}

TEST_CASE("find locates tensors by exact name") {
  const Checkpoint ckpt = make_sample();
  const Tensor* t = ckpt.find("enc/bias");
  REQUIRE(t != nullptr);
  CHECK(t->at(0, 1) == 1.0);
  CHECK(ckpt.find("enc/missing") == nullptr);
}

TEST_CASE("bad magic is rejected") {
  std::stringstream ss;
  ss << "NOPE garbage follows";
  CHECK_THROWS_AS(load_checkpoint(ss), std::runtime_error);
}

TEST_CASE("unsupported version is rejected") {
  const Checkpoint ckpt = make_sample();
  std::stringstream ss;
  save_checkpoint(ss, ckpt);
  std::string bytes = ss.str();
  bytes[4] = 9;  // version lives right after the magic
  std::stringstream corrupted(bytes);
  CHECK_THROWS_AS(load_checkpoint(corrupted), std::runtime_error);
}

TEST_CASE("truncated stream is rejected") {
  const Checkpoint ckpt = make_sample();
  std::stringstream ss;
  save_checkpoint(ss, ckpt);
  std::stringstream cut(ss.str().substr(0, ss.str().size() / 2));
  CHECK_THROWS_AS(load_checkpoint(cut), std::runtime_error);
}

TEST_CASE("missing file is rejected") {
  CHECK_THROWS_AS(load_checkpoint_file("/nonexistent/dir/x.ckpt"), std::runtime_error);
}
