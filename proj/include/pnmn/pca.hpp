#pragma once

#include <cstddef>

#include "pnmn/array.hpp"

namespace pnmn {

struct PcaResult {
  Array components;   // [count x dim], unit rows, largest-magnitude loading positive
  Array eigenvalues;  // [1 x count], sample covariance eigenvalues
  Array explained;    // [1 x count], eigenvalue / total variance
  Array coordinates;  // [n x count], centered data projected on the components
  Array mean;         // [1 x dim]
  double total_variance = 0.0;
};

/// Top principal components of the rows of `data` by power iteration on the
/// sample covariance with deflation.
PcaResult pca_top(const Array& data, std::size_t count, double tol = 1e-9, std::size_t max_iter = 1000);

inline PcaResult pca_top2(const Array& data) { return pca_top(data, 2); }

}  // namespace pnmn
