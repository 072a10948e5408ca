#pragma once

#include <cstddef>

#include "hnmvts/tensor.hpp"

// Dense inner loops behind the differentiable ops. Every kernel accumulates
// into its output (callers zero it first when they want assignment).
//
// hnmvts::kernels holds the OpenMP-parallel versions used by the library;
// hnmvts::kernels::reference holds plain serial loops kept as the oracle for
// tests and as the baseline in bench/bench_kernels.

namespace hnmvts::kernels {

/// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const Real* a, const Real* b, Real* c);
/// C[m x n] += A[m x k] * B[n x k]^T
void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const Real* a, const Real* b, Real* c);
/// C[m x n] += A[k x m]^T * B[k x n]
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const Real* a, const Real* b, Real* c);

/// Per-channel matrix-vector product y[b,n,:] += W[n] * h[b,n,:] with
/// h: [batch, channels, in], w: [w_channels, out, in], y: [batch, channels, out].
/// w_channels is either `channels` (one matrix per channel) or 1 (shared).
struct ChannelLinearDims {
    std::size_t batch;
    std::size_t channels;
    std::size_t out;
    std::size_t in;
    std::size_t w_channels;
};

void channel_linear(const ChannelLinearDims& d, const Real* h, const Real* w, Real* y);
/// dh[b,n,:] += W[n]^T * dy[b,n,:]
void channel_linear_grad_input(const ChannelLinearDims& d, const Real* dy, const Real* w, Real* dh);
/// dW[n] += sum_b dy[b,n,:] h[b,n,:]^T (summed over channels too when shared)
void channel_linear_grad_weight(const ChannelLinearDims& d, const Real* dy, const Real* h, Real* dw);

/// Centered moving average over each row of length `len`, replicate padding of
/// (kernel-1)/2 at both ends. kernel must be odd.
void moving_average(std::size_t rows, std::size_t len, std::size_t kernel, const Real* x, Real* y);
/// Adjoint of moving_average.
void moving_average_grad(std::size_t rows, std::size_t len, std::size_t kernel, const Real* dy, Real* dx);

namespace reference {

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const Real* a, const Real* b, Real* c);
void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const Real* a, const Real* b, Real* c);
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const Real* a, const Real* b, Real* c);
void channel_linear(const ChannelLinearDims& d, const Real* h, const Real* w, Real* y);
void channel_linear_grad_input(const ChannelLinearDims& d, const Real* dy, const Real* w, Real* dh);
void channel_linear_grad_weight(const ChannelLinearDims& d, const Real* dy, const Real* h, Real* dw);
void moving_average(std::size_t rows, std::size_t len, std::size_t kernel, const Real* x, Real* y);
void moving_average_grad(std::size_t rows, std::size_t len, std::size_t kernel, const Real* dy, Real* dx);

} // namespace reference

} // namespace hnmvts::kernels
