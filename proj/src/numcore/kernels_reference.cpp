#include "hnmvts/kernels.hpp"

#include <algorithm>

namespace hnmvts::kernels::reference {

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const Real* a, const Real* b, Real* c) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Real s = 0;
            for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
            c[i * n + j] += s;
        }
}

void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const Real* a, const Real* b, Real* c) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Real s = 0;
            for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
            c[i * n + j] += s;
        }
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const Real* a, const Real* b, Real* c) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Real s = 0;
            for (std::size_t p = 0; p < k; ++p) s += a[p * m + i] * b[p * n + j];
            c[i * n + j] += s;
        }
}

void channel_linear(const ChannelLinearDims& d, const Real* h, const Real* w, Real* y) {
    for (std::size_t b = 0; b < d.batch; ++b)
        for (std::size_t n = 0; n < d.channels; ++n) {
            const std::size_t wn = d.w_channels == 1 ? 0 : n;
            for (std::size_t i = 0; i < d.out; ++i) {
                Real s = 0;
                for (std::size_t j = 0; j < d.in; ++j)
                    s += w[(wn * d.out + i) * d.in + j] * h[(b * d.channels + n) * d.in + j];
                y[(b * d.channels + n) * d.out + i] += s;
            }
        }
}

void channel_linear_grad_input(const ChannelLinearDims& d, const Real* dy, const Real* w, Real* dh) {
    for (std::size_t b = 0; b < d.batch; ++b)
        for (std::size_t n = 0; n < d.channels; ++n) {
            const std::size_t wn = d.w_channels == 1 ? 0 : n;
            for (std::size_t j = 0; j < d.in; ++j) {
                Real s = 0;
                for (std::size_t i = 0; i < d.out; ++i)
                    s += w[(wn * d.out + i) * d.in + j] * dy[(b * d.channels + n) * d.out + i];
                dh[(b * d.channels + n) * d.in + j] += s;
            }
        }
}

void channel_linear_grad_weight(const ChannelLinearDims& d, const Real* dy, const Real* h, Real* dw) {
    for (std::size_t n = 0; n < d.channels; ++n) {
        const std::size_t wn = d.w_channels == 1 ? 0 : n;
        for (std::size_t i = 0; i < d.out; ++i)
            for (std::size_t j = 0; j < d.in; ++j) {
                Real s = 0;
                for (std::size_t b = 0; b < d.batch; ++b)
                    s += dy[(b * d.channels + n) * d.out + i] * h[(b * d.channels + n) * d.in + j];
                dw[(wn * d.out + i) * d.in + j] += s;
            }
    }
}

void moving_average(std::size_t rows, std::size_t len, std::size_t kernel, const Real* x, Real* y) {
    const auto pad = static_cast<long>((kernel - 1) / 2);
    const auto last = static_cast<long>(len) - 1;
    for (std::size_t r = 0; r < rows; ++r)
        for (long t = 0; t <= last; ++t) {
            Real s = 0;
            for (long o = -pad; o <= pad; ++o) s += x[r * len + std::clamp(t + o, 0L, last)];
            y[r * len + t] += s / static_cast<Real>(kernel);
        }
}

void moving_average_grad(std::size_t rows, std::size_t len, std::size_t kernel, const Real* dy, Real* dx) {
    const auto pad = static_cast<long>((kernel - 1) / 2);
    const auto last = static_cast<long>(len) - 1;
    for (std::size_t r = 0; r < rows; ++r)
        for (long t = 0; t <= last; ++t)
            for (long o = -pad; o <= pad; ++o)
                dx[r * len + std::clamp(t + o, 0L, last)] += dy[r * len + t] / static_cast<Real>(kernel);
}

} // namespace hnmvts::kernels::reference
