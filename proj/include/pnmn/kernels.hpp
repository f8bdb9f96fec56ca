#pragma once

#include <cstddef>
#include <span>

// Dense matrix kernels used by the autodiff graph. Every kernel accumulates
// into its output (C += ...). Matrices are row-major.
//
// The serial namespace is the reference implementation. The parallel namespace
// splits the output rows across OpenMP threads; each output element is reduced
// in the same order as the serial kernel, so results are bit-identical.

namespace pnmn::kernels {

namespace serial {
// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n);
// C[m x n] += A[m x k] * B[n x k]^T
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n);
// C[m x n] += A[k x m]^T * B[k x n]
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n);
}  // namespace serial

namespace parallel {
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n);
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n);
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n);
}  // namespace parallel

/// Multiply-accumulate count above which the dispatching kernels go parallel.
inline constexpr std::size_t kParallelThreshold = 1u << 16;

// Dispatch to parallel when the problem is large and more than one thread is
// available outside an enclosing parallel region; otherwise serial.
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n);
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n);
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n);

}  // namespace pnmn::kernels
