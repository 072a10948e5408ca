#include "hnmvts/wilcoxon.hpp"

#include "hnmvts/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <fmt/format.h>

namespace hnmvts {

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, double alpha) {
    if (a.size() != b.size()) {
        throw DimensionError(fmt::format("wilcoxon: {} vs {} paired samples", a.size(), b.size()));
    }
    if (a.empty()) throw ContractError("wilcoxon: no samples");

    std::vector<double> diff;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d != 0.0) diff.push_back(d);
    }
    WilcoxonResult r;
    r.used = diff.size();
    if (diff.empty()) return r;

    const std::size_t k = diff.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return std::abs(diff[x]) < std::abs(diff[y]); });

    // Doubled average ranks stay integral: a tie block over positions [i, j) gets rank sum i + j + 1.
    std::vector<std::size_t> rank2(k);
    for (std::size_t i = 0; i < k;) {
        std::size_t j = i + 1;
        while (j < k && std::abs(diff[order[j]]) == std::abs(diff[order[i]])) ++j;
        for (std::size_t p = i; p < j; ++p) rank2[order[p]] = i + j + 1;
        i = j;
    }

    std::size_t w_plus2 = 0, total2 = 0;
    for (std::size_t i = 0; i < k; ++i) {
        total2 += rank2[i];
        if (diff[i] > 0) w_plus2 += rank2[i];
    }

    // ways[s] = number of sign assignments whose doubled W+ equals s.
    std::vector<double> ways(total2 + 1, 0.0);
    ways[0] = 1.0;
    std::size_t reach = 0;
    for (std::size_t i = 0; i < k; ++i) {
        reach += rank2[i];
        for (std::size_t s = reach; s >= rank2[i]; --s) {
            ways[s] += ways[s - rank2[i]];
            if (s == rank2[i]) break;
        }
    }
    const double all = std::ldexp(1.0, static_cast<int>(k));
    double low = 0, high = 0;
    for (std::size_t s = 0; s <= total2; ++s) {
        if (s <= w_plus2) low += ways[s];
        if (s >= w_plus2) high += ways[s];
    }

    r.w_plus = static_cast<double>(w_plus2) / 2.0;
    r.w_minus = static_cast<double>(total2 - w_plus2) / 2.0;
    r.statistic = std::min(r.w_plus, r.w_minus);
    r.p_value = std::min(1.0, 2.0 * std::min(low, high) / all);
    r.significant = r.p_value < alpha;
    return r;
}

} // namespace hnmvts
