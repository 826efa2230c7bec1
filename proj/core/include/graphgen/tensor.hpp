#pragma once

#include <cstddef>
#include <vector>

namespace graphgen {

/// Dense row-major tensor of doubles. Rank is the length of `shape`;
/// most of the code uses rank 1 or 2.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<int> shape_, std::vector<double> data_);

  static Tensor zeros(std::vector<int> shape);
  static Tensor full(std::vector<int> shape, double value);

  std::size_t numel() const { return data.size(); }
  int rows() const { return shape.empty() ? 0 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols()) + static_cast<std::size_t>(c)]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols()) + static_cast<std::size_t>(c)]; }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;
};

std::size_t shape_numel(const std::vector<int>& shape);

/// out += a * b, where a is [m x k] and b is [k x n].
void matmul_acc(const Tensor& a, const Tensor& b, Tensor& out);
/// out += a^T * b, where a is [k x m] and b is [k x n].
void matmul_at_b_acc(const Tensor& a, const Tensor& b, Tensor& out);
/// out += a * b^T, where a is [m x k] and b is [n x k].
void matmul_a_bt_acc(const Tensor& a, const Tensor& b, Tensor& out);

}  // namespace graphgen
