#include "graphgen/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace graphgen {

std::size_t shape_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("negative tensor dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor::Tensor(std::vector<int> shape_, std::vector<double> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
  if (shape_numel(shape) != data.size()) {
    throw std::invalid_argument("tensor data size does not match shape");
  }
}

Tensor Tensor::zeros(std::vector<int> shape) {
  const std::size_t n = shape_numel(shape);
  Tensor t;
  t.shape = std::move(shape);
  t.data.assign(n, 0.0);
  return t;
}

Tensor Tensor::full(std::vector<int> shape, double value) {
  const std::size_t n = shape_numel(shape);
  Tensor t;
  t.shape = std::move(shape);
  t.data.assign(n, value);
  return t;
}

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// i-k-j loop order keeps the inner loop contiguous in both b and out.
void matmul_acc(const Tensor& a, const Tensor& b, Tensor& out) {
  const int m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k || out.rows() != m || out.cols() != n) {
    throw std::invalid_argument("matmul_acc shape mismatch");
  }
  const double* ap = a.data.data();
  const double* bp = b.data.data();
  double* op = out.data.data();
  for (int i = 0; i < m; ++i) {
    for (int kk = 0; kk < k; ++kk) {
      const double av = ap[static_cast<std::size_t>(i) * k + kk];
      if (av == 0.0) continue;
      const double* brow = bp + static_cast<std::size_t>(kk) * n;
      double* orow = op + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

void matmul_at_b_acc(const Tensor& a, const Tensor& b, Tensor& out) {
  const int k = a.rows(), m = a.cols(), n = b.cols();
  if (b.rows() != k || out.rows() != m || out.cols() != n) {
    throw std::invalid_argument("matmul_at_b_acc shape mismatch");
  }
  const double* ap = a.data.data();
  const double* bp = b.data.data();
  double* op = out.data.data();
  for (int kk = 0; kk < k; ++kk) {
    const double* arow = ap + static_cast<std::size_t>(kk) * m;
    const double* brow = bp + static_cast<std::size_t>(kk) * n;
    for (int i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* orow = op + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

void matmul_a_bt_acc(const Tensor& a, const Tensor& b, Tensor& out) {
  const int m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k || out.rows() != m || out.cols() != n) {
    throw std::invalid_argument("matmul_a_bt_acc shape mismatch");
  }
  const double* ap = a.data.data();
  const double* bp = b.data.data();
  double* op = out.data.data();
  for (int i = 0; i < m; ++i) {
    const double* arow = ap + static_cast<std::size_t>(i) * k;
    double* orow = op + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* brow = bp + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
      orow[j] += acc;
    }
  }
}

}  // namespace graphgen
