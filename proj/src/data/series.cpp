#include "hnmvts/data.hpp"

#include "hnmvts/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace hnmvts {

SeriesTable SeriesTable::rows(std::size_t begin, std::size_t end) const {
    if (begin > end || end > length()) {
        throw ContractError(fmt::format("rows [{}, {}) out of range for length {}", begin, end, length()));
    }
    const std::size_t n = channels();
    const Real* base = values.ptr();
    std::vector<Real> slice(base + begin * n, base + end * n);
    return SeriesTable{Tensor({end - begin, n}, std::move(slice)), channel_names, granularity};
}

void validate(const SeriesTable& table) {
    if (table.values.rank() != 2 || table.values.dim(1) != table.channel_names.size()) {
        throw DimensionError(fmt::format("series values {} do not match {} channel names",
                                         shape_str(table.values.shape()), table.channel_names.size()));
    }
    std::set<std::string> seen;
    for (const auto& name : table.channel_names) {
        if (!seen.insert(name).second) throw ContractError(fmt::format("duplicate channel name '{}'", name));
    }
    if (!table.values.all_finite()) throw NumericError("series contains non-finite values");
}

Splits chrono_split(const SeriesTable& table, const SplitSpec& spec) {
    if (spec.train < 0 || spec.val < 0 || spec.test < 0 || std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9) {
        throw ContractError(fmt::format("split ratios ({}, {}, {}) must be nonnegative and sum to 1", spec.train,
                                        spec.val, spec.test));
    }
    std::size_t t = table.length();
    if (spec.truncate_to) t = std::min(t, *spec.truncate_to);
    // The epsilon keeps e.g. 0.7 * 100 from flooring to 69.
    auto boundary = [t](double fraction) {
        return std::min(t, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(t) + 1e-9)));
    };
    const std::size_t b1 = boundary(spec.train);
    const std::size_t b2 = std::max(b1, boundary(spec.train + spec.val));
    return Splits{table.rows(0, b1), table.rows(b1, b2), table.rows(b2, t)};
}

std::size_t window_count(std::size_t length, std::size_t lookback, std::size_t horizon) {
    if (lookback == 0 || horizon == 0) throw ContractError("lookback and horizon must be positive");
    if (length < lookback + horizon) {
        throw WindowError(fmt::format("series of length {} is shorter than lookback + horizon = {} + {} = {}", length,
                                      lookback, horizon, lookback + horizon));
    }
    return length - (lookback + horizon) + 1;
}

WindowSet::WindowSet(const SeriesTable& table, std::size_t lookback, std::size_t horizon)
    : table_(&table), lookback_(lookback), horizon_(horizon),
      count_(window_count(table.length(), lookback, horizon)) {}

void WindowSet::gather(std::span<const std::size_t> origins, Tensor& x, Tensor& y) const {
    const std::size_t batch = origins.size();
    const std::size_t n = channels();
    const Shape xs{batch, n, lookback_};
    const Shape ys{batch, n, horizon_};
    if (x.shape() != xs) x = Tensor(xs);
    if (y.shape() != ys) y = Tensor(ys);
    const Real* v = table_->values.ptr();
    for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t origin = origins[b];
        if (origin >= count_) throw ContractError(fmt::format("window origin {} >= count {}", origin, count_));
        for (std::size_t c = 0; c < n; ++c) {
            Real* xr = x.ptr() + (b * n + c) * lookback_;
            for (std::size_t s = 0; s < lookback_; ++s) xr[s] = v[(origin + s) * n + c];
            Real* yr = y.ptr() + (b * n + c) * horizon_;
            for (std::size_t s = 0; s < horizon_; ++s) yr[s] = v[(origin + lookback_ + s) * n + c];
        }
    }
}

WindowPair WindowSet::pair(std::size_t origin) const {
    Tensor x, y;
    const std::size_t origins[] = {origin};
    gather(origins, x, y);
    const std::size_t n = channels();
    return WindowPair{std::move(x).reshaped({n, lookback_}), std::move(y).reshaped({n, horizon_}), origin};
}

std::vector<WindowPair> make_windows(const SeriesTable& table, std::size_t lookback, std::size_t horizon) {
    WindowSet set(table, lookback, horizon);
    std::vector<WindowPair> out;
    out.reserve(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) out.push_back(set.pair(i));
    return out;
}

Tensor pearson_corr(const SeriesTable& table, std::vector<std::string>* zero_variance) {
    const std::size_t t = table.length();
    const std::size_t n = table.channels();
    if (t < 2) throw ContractError("pearson_corr needs at least two timesteps");
    std::vector<double> mean(n, 0.0);
    for (std::size_t s = 0; s < t; ++s)
        for (std::size_t c = 0; c < n; ++c) mean[c] += table.at(s, c);
    for (auto& m : mean) m /= static_cast<double>(t);

    std::vector<double> cov(n * n, 0.0);
    std::vector<double> dev(n);
    for (std::size_t s = 0; s < t; ++s) {
        for (std::size_t c = 0; c < n; ++c) dev[c] = table.at(s, c) - mean[c];
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a; b < n; ++b) cov[a * n + b] += dev[a] * dev[b];
    }

    std::vector<bool> flat(n);
    for (std::size_t c = 0; c < n; ++c) {
        const double sd = std::sqrt(cov[c * n + c] / static_cast<double>(t));
        flat[c] = sd <= 1e-12 * std::max(1.0, std::abs(mean[c]));
        if (flat[c] && zero_variance) zero_variance->push_back(table.channel_names[c]);
    }

    Tensor corr({n, n});
    for (std::size_t a = 0; a < n; ++a) {
        corr[a * n + a] = 1;
        for (std::size_t b = a + 1; b < n; ++b) {
            double r = 0;
            if (!flat[a] && !flat[b]) {
                r = cov[a * n + b] / std::sqrt(cov[a * n + a] * cov[b * n + b]);
                r = std::clamp(r, -1.0, 1.0);
            }
            corr[a * n + b] = corr[b * n + a] = static_cast<Real>(r);
        }
    }
    return corr;
}

Standardizer Standardizer::fit(const SeriesTable& table) {
    const std::size_t t = table.length();
    const std::size_t n = table.channels();
    if (t == 0) throw ContractError("cannot fit a standardizer on an empty table");
    Standardizer s{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (std::size_t r = 0; r < t; ++r)
        for (std::size_t c = 0; c < n; ++c) s.mean[c] += table.at(r, c);
    for (auto& m : s.mean) m /= static_cast<double>(t);
    for (std::size_t r = 0; r < t; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const double d = table.at(r, c) - s.mean[c];
            s.stddev[c] += d * d;
        }
    for (auto& v : s.stddev) {
        v = std::sqrt(v / static_cast<double>(t));
        if (v <= 0) v = 1.0;
    }
    return s;
}

SeriesTable Standardizer::apply(const SeriesTable& table) const {
    if (table.channels() != mean.size()) {
        throw DimensionError(fmt::format("standardizer fitted on {} channels applied to {}", mean.size(),
                                         table.channels()));
    }
    SeriesTable out = table;
    const std::size_t n = table.channels();
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const std::size_t c = i % n;
        out.values[i] = static_cast<Real>((out.values[i] - mean[c]) / stddev[c]);
    }
    return out;
}

} // namespace hnmvts
