#pragma once

#include <span>

namespace hnmvts {

struct WilcoxonResult {
    double statistic = 0; // min(W+, W-)
    double w_plus = 0;
    double w_minus = 0;
    double p_value = 1;   // two-sided, exact
    std::size_t used = 0; // pairs left after dropping zero differences
    bool significant = false;
};

/// Exact two-sided Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped and tied |differences| share their average
/// rank. The null distribution of W+ is the exact distribution over all 2^k
/// equally likely sign assignments of the observed ranks (computed by a
/// subset-sum count over doubled ranks). p = min(1, 2 * min(P(W+ <= w), P(W+ >= w))).
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, double alpha = 0.05);

} // namespace hnmvts
