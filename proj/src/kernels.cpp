#include "pnmn/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <vector>

namespace pnmn::kernels {

namespace {

inline void row_nn(const double* a, const double* b, double* c, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const double av = a[p];
    const double* brow = b + p * n;
    for (std::size_t j = 0; j < n; ++j) c[j] += av * brow[j];
  }
}

constexpr std::size_t kMr = 4;  // block_nn below is written out for 4 rows
constexpr std::size_t kNr = 16;

// kMr rows of C += A B, with kMr x kNr tiles of C held in registers. Each
// element is still accumulated over p in increasing order, like row_nn.
inline void block_nn(const double* __restrict a, const double* __restrict b, double* __restrict c, std::size_t k,
                     std::size_t n) {
  std::size_t j0 = 0;
  for (; j0 + kNr <= n; j0 += kNr) {
    double* c0 = c + j0;
    double* c1 = c0 + n;
    double* c2 = c1 + n;
    double* c3 = c2 + n;
    double acc0[kNr], acc1[kNr], acc2[kNr], acc3[kNr];
#pragma omp simd
    for (std::size_t j = 0; j < kNr; ++j) {
      acc0[j] = c0[j];
      acc1[j] = c1[j];
      acc2[j] = c2[j];
      acc3[j] = c3[j];
    }
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * n + j0;
      const double a0 = a[p], a1 = a[k + p], a2 = a[2 * k + p], a3 = a[3 * k + p];
#pragma omp simd
      for (std::size_t j = 0; j < kNr; ++j) {
        acc0[j] += a0 * brow[j];
        acc1[j] += a1 * brow[j];
        acc2[j] += a2 * brow[j];
        acc3[j] += a3 * brow[j];
      }
    }
#pragma omp simd
    for (std::size_t j = 0; j < kNr; ++j) {
      c0[j] = acc0[j];
      c1[j] = acc1[j];
      c2[j] = acc2[j];
      c3[j] = acc3[j];
    }
  }
  if (j0 < n) {
    for (std::size_t r = 0; r < kMr; ++r) {
      for (std::size_t p = 0; p < k; ++p) {
        const double av = a[r * k + p];
        const double* brow = b + p * n;
        for (std::size_t j = j0; j < n; ++j) c[r * n + j] += av * brow[j];
      }
    }
  }
}

// Rows [i0, i1) of C += A B.
inline void rows_nn(const double* a, const double* b, double* c, std::size_t i0, std::size_t i1, std::size_t k,
                    std::size_t n) {
  std::size_t i = i0;
  for (; i + kMr <= i1; i += kMr) block_nn(a + i * k, b, c + i * n, k, n);
  for (; i < i1; ++i) row_nn(a + i * k, b, c + i * n, k, n);
}

// X[r x c] -> X^T[c x r] in a per-thread buffer, so the transposed products
// can run through rows_nn.
const double* transposed(const double* x, std::size_t rows, std::size_t cols) {
  thread_local std::vector<double> buf;
  buf.resize(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) buf[c * rows + r] = x[r * cols + c];
  }
  return buf.data();
}

bool go_parallel(std::size_t work) {
  return work >= kParallelThreshold && !omp_in_parallel() && omp_get_max_threads() > 1;
}

}  // namespace

namespace serial {

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n) {
  rows_nn(a.data(), b.data(), c.data(), 0, m, k, n);
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n) {
  const double* bt = transposed(b.data(), n, k);
  rows_nn(a.data(), bt, c.data(), 0, m, k, n);
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n) {
  const double* at = transposed(a.data(), k, m);
  rows_nn(at, b.data(), c.data(), 0, m, k, n);
}

}  // namespace serial

namespace parallel {

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n) {
  const double* ap = a.data();
  const double* bp = b.data();
  double* cp = c.data();
  const std::size_t blocks = (m + kMr - 1) / kMr;
#pragma omp parallel for schedule(static)
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    rows_nn(ap, bp, cp, blk * kMr, std::min(m, (blk + 1) * kMr), k, n);
  }
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n) {
  const double* ap = a.data();
  const double* bt = transposed(b.data(), n, k);
  double* cp = c.data();
  const std::size_t blocks = (m + kMr - 1) / kMr;
#pragma omp parallel for schedule(static)
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    rows_nn(ap, bt, cp, blk * kMr, std::min(m, (blk + 1) * kMr), k, n);
  }
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n) {
  const double* at = transposed(a.data(), k, m);
  const double* bp = b.data();
  double* cp = c.data();
  const std::size_t blocks = (m + kMr - 1) / kMr;
#pragma omp parallel for schedule(static)
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    rows_nn(at, bp, cp, blk * kMr, std::min(m, (blk + 1) * kMr), k, n);
  }
}

}  // namespace parallel

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n) {
  if (go_parallel(m * k * n)) {
    parallel::gemm_nn(a, b, c, m, k, n);
  } else {
    serial::gemm_nn(a, b, c, m, k, n);
  }
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n) {
  if (go_parallel(m * k * n)) {
    parallel::gemm_nt(a, b, c, m, k, n);
  } else {
    serial::gemm_nt(a, b, c, m, k, n);
  }
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n) {
  if (go_parallel(m * k * n)) {
    parallel::gemm_tn(a, b, c, m, k, n);
  } else {
    serial::gemm_tn(a, b, c, m, k, n);
  }
}

}  // namespace pnmn::kernels
