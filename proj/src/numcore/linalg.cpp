#include "hnmvts/linalg.hpp"

#include "hnmvts/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <fmt/format.h>

namespace hnmvts {

SymmetricEigen symmetric_eigen(const Tensor& a, double tol, int max_sweeps) {
    if (a.rank() != 2 || a.dim(0) != a.dim(1)) {
        throw DimensionError(fmt::format("symmetric_eigen needs a square matrix, got {}", shape_str(a.shape())));
    }
    const std::size_t p = a.dim(0);
    std::vector<double> m(a.data().begin(), a.data().end());
    std::vector<double> v(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) v[i * p + i] = 1.0;

    auto at = [&](std::size_t i, std::size_t j) -> double& { return m[i * p + j]; };
    double scale = 0;
    for (double x : m) scale = std::max(scale, std::abs(x));

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j) off = std::max(off, std::abs(at(i, j)));
        if (off <= tol * std::max(scale, 1e-300)) break;

        for (std::size_t i = 0; i + 1 < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j) {
                const double aij = at(i, j);
                if (aij == 0.0) continue;
                const double theta = (at(j, j) - at(i, i)) / (2.0 * aij);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < p; ++k) {
                    const double mki = at(k, i), mkj = at(k, j);
                    at(k, i) = c * mki - s * mkj;
                    at(k, j) = s * mki + c * mkj;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    const double mik = at(i, k), mjk = at(j, k);
                    at(i, k) = c * mik - s * mjk;
                    at(j, k) = s * mik + c * mjk;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    const double vki = v[k * p + i], vkj = v[k * p + j];
                    v[k * p + i] = c * vki - s * vkj;
                    v[k * p + j] = s * vki + c * vkj;
                }
            }
    }

    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return at(x, x) > at(y, y); });

    SymmetricEigen out{Tensor({p}), Tensor({p, p})};
    for (std::size_t col = 0; col < p; ++col) {
        const std::size_t src = order[col];
        out.values[col] = static_cast<Real>(at(src, src));
        std::size_t arg = 0;
        for (std::size_t k = 1; k < p; ++k)
            if (std::abs(v[k * p + src]) > std::abs(v[arg * p + src])) arg = k;
        const double sign = v[arg * p + src] < 0 ? -1.0 : 1.0;
        for (std::size_t k = 0; k < p; ++k) out.vectors[k * p + col] = static_cast<Real>(sign * v[k * p + src]);
    }
    return out;
}

PcaResult pca(const Tensor& rows, std::size_t d) {
    if (rows.rank() != 2) throw DimensionError(fmt::format("pca needs a matrix, got {}", shape_str(rows.shape())));
    const std::size_t n = rows.dim(0), p = rows.dim(1);
    if (d < 1 || d > std::min(n, p)) {
        throw ContractError(fmt::format("pca: d = {} outside [1, {}]", d, std::min(n, p)));
    }

    Tensor mean({p});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) mean[j] += rows[i * p + j];
    for (auto& x : mean.data()) x /= static_cast<Real>(n);

    Tensor centered(rows.shape());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) centered[i * p + j] = rows[i * p + j] - mean[j];

    Tensor cov({p, p});
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a; b < p; ++b) {
            double s = 0;
            for (std::size_t i = 0; i < n; ++i) s += centered[i * p + a] * centered[i * p + b];
            cov[a * p + b] = cov[b * p + a] = static_cast<Real>(s / denom);
        }

    SymmetricEigen eig = symmetric_eigen(cov);

    PcaResult out{Tensor({n, d}), Tensor({p, d}), mean, eig.values};
    for (std::size_t k = 0; k < p; ++k)
        for (std::size_t c = 0; c < d; ++c) out.components[k * d + c] = eig.vectors[k * p + c];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) {
            double s = 0;
            for (std::size_t k = 0; k < p; ++k) s += centered[i * p + k] * out.components[k * d + c];
            out.projected[i * d + c] = static_cast<Real>(s);
        }
    return out;
}

} // namespace hnmvts
