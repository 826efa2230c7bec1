#pragma once

#include <vector>

namespace graphgen {

struct EigenDecomposition {
  std::vector<double> values;   // ascending
  std::vector<double> vectors;  // n x n row-major, column j is the eigenvector for values[j]
};

/// Eigendecomposition of a symmetric matrix (n x n, row-major) by cyclic
/// Jacobi rotations. Sweeps run until the off-diagonal Frobenius norm drops
/// below `tol`. Eigenvectors are orthonormal; eigenvalues sorted ascending
/// with a stable tie order.
EigenDecomposition jacobi_eigen(const std::vector<double>& matrix, int n, double tol = 1e-10);

}  // namespace graphgen
