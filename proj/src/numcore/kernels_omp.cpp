#include "hnmvts/kernels.hpp"

#include <algorithm>
#include <vector>

namespace hnmvts::kernels {

namespace {
// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;
} // namespace

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const Real* a, const Real* b, Real* c) {
#pragma omp parallel for schedule(static) if (m * k * n > kParallelWork)
    for (std::size_t i = 0; i < m; ++i) {
        Real* ci = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const Real aip = a[i * k + p];
            const Real* bp = b + p * n;
#pragma omp simd
            for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const Real* a, const Real* b, Real* c) {
#pragma omp parallel for schedule(static) if (m * k * n > kParallelWork)
    for (std::size_t i = 0; i < m; ++i) {
        const Real* ai = a + i * k;
        for (std::size_t j = 0; j < n; ++j) {
            const Real* bj = b + j * k;
            Real s = 0;
#pragma omp simd reduction(+ : s)
            for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
            c[i * n + j] += s;
        }
    }
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const Real* a, const Real* b, Real* c) {
#pragma omp parallel for schedule(static) if (m * k * n > kParallelWork)
    for (std::size_t i = 0; i < m; ++i) {
        Real* ci = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const Real api = a[p * m + i];
            const Real* bp = b + p * n;
#pragma omp simd
            for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
        }
    }
}

void channel_linear(const ChannelLinearDims& d, const Real* h, const Real* w, Real* y) {
    const std::size_t rows = d.batch * d.channels;
#pragma omp parallel for schedule(static) if (rows * d.out * d.in > kParallelWork)
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t n = r % d.channels;
        const Real* wn = w + (d.w_channels == 1 ? 0 : n) * d.out * d.in;
        const Real* hr = h + r * d.in;
        Real* yr = y + r * d.out;
        for (std::size_t i = 0; i < d.out; ++i) {
            const Real* wi = wn + i * d.in;
            Real s = 0;
#pragma omp simd reduction(+ : s)
            for (std::size_t j = 0; j < d.in; ++j) s += wi[j] * hr[j];
            yr[i] += s;
        }
    }
}

void channel_linear_grad_input(const ChannelLinearDims& d, const Real* dy, const Real* w, Real* dh) {
    const std::size_t rows = d.batch * d.channels;
#pragma omp parallel for schedule(static) if (rows * d.out * d.in > kParallelWork)
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t n = r % d.channels;
        const Real* wn = w + (d.w_channels == 1 ? 0 : n) * d.out * d.in;
        const Real* dyr = dy + r * d.out;
        Real* dhr = dh + r * d.in;
        for (std::size_t i = 0; i < d.out; ++i) {
            const Real g = dyr[i];
            const Real* wi = wn + i * d.in;
#pragma omp simd
            for (std::size_t j = 0; j < d.in; ++j) dhr[j] += g * wi[j];
        }
    }
}

void channel_linear_grad_weight(const ChannelLinearDims& d, const Real* dy, const Real* h, Real* dw) {
    // Each (weight channel, output row) pair owns one row of dw, so threads never collide.
    const std::size_t wrows = d.w_channels * d.out;
#pragma omp parallel for schedule(static) if (d.batch * d.channels * d.out * d.in > kParallelWork)
    for (std::size_t wr = 0; wr < wrows; ++wr) {
        const std::size_t wn = wr / d.out;
        const std::size_t i = wr % d.out;
        Real* dwi = dw + wr * d.in;
        const std::size_t n_begin = d.w_channels == 1 ? 0 : wn;
        const std::size_t n_end = d.w_channels == 1 ? d.channels : wn + 1;
        for (std::size_t b = 0; b < d.batch; ++b)
            for (std::size_t n = n_begin; n < n_end; ++n) {
                const std::size_t r = b * d.channels + n;
                const Real g = dy[r * d.out + i];
                const Real* hr = h + r * d.in;
#pragma omp simd
                for (std::size_t j = 0; j < d.in; ++j) dwi[j] += g * hr[j];
            }
    }
}

void moving_average(std::size_t rows, std::size_t len, std::size_t kernel, const Real* x, Real* y) {
    const std::size_t pad = (kernel - 1) / 2;
    const Real inv = Real(1) / static_cast<Real>(kernel);
#pragma omp parallel for schedule(static) if (rows * len > kParallelWork)
    for (std::size_t r = 0; r < rows; ++r) {
        const Real* xr = x + r * len;
        // padded[q] = x[clamp(q - pad, 0, len - 1)]
        auto padded = [&](std::size_t q) {
            return xr[q < pad ? 0 : std::min(q - pad, len - 1)];
        };
        Real s = 0;
        for (std::size_t q = 0; q < kernel; ++q) s += padded(q);
        y[r * len] += s * inv;
        for (std::size_t t = 1; t < len; ++t) {
            s += padded(t + kernel - 1) - padded(t - 1);
            y[r * len + t] += s * inv;
        }
    }
}

void moving_average_grad(std::size_t rows, std::size_t len, std::size_t kernel, const Real* dy, Real* dx) {
    const std::size_t pad = (kernel - 1) / 2;
    const std::size_t plen = len + 2 * pad;
    const Real inv = Real(1) / static_cast<Real>(kernel);
#pragma omp parallel for schedule(static) if (rows * len > kParallelWork)
    for (std::size_t r = 0; r < rows; ++r) {
        const Real* g = dy + r * len;
        Real* out = dx + r * len;
        // Padded position q receives dy[t] for every output t whose window [t, t+kernel) covers q.
        Real s = 0;
        for (std::size_t q = 0; q < plen; ++q) {
            if (q < len) s += g[q];
            if (q >= kernel) s -= g[q - kernel];
            const std::size_t src = q < pad ? 0 : std::min(q - pad, len - 1);
            out[src] += s * inv;
        }
    }
}

} // namespace hnmvts::kernels
