#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hnmvts/tensor.hpp"

namespace hnmvts {

/// Multivariate series stored time-major: values is [t x N].
struct SeriesTable {
    Tensor values;
    std::vector<std::string> channel_names;
    std::optional<std::string> granularity;

    std::size_t length() const { return values.rank() == 2 ? values.dim(0) : 0; }
    std::size_t channels() const { return channel_names.size(); }
    Real at(std::size_t time, std::size_t channel) const { return values[time * channels() + channel]; }

    /// Rows [begin, end); may be empty.
    SeriesTable rows(std::size_t begin, std::size_t end) const;
};

/// Checks the table invariants (unique names, shape agreement, finite values).
void validate(const SeriesTable& table);

struct SplitSpec {
    double train = 0.7;
    double val = 0.2;
    double test = 0.1;
    std::optional<std::size_t> truncate_to;
};

struct Splits {
    SeriesTable train;
    SeriesTable val;
    SeriesTable test;
};

/// Contiguous chronological split with boundaries at floor(ratio * t) cumulative indices.
Splits chrono_split(const SeriesTable& table, const SplitSpec& spec);

/// One supervised example in channel-major layout.
struct WindowPair {
    Tensor x; // [N x T]
    Tensor y; // [N x H]
    std::size_t origin = 0;
};

/// Number of stride-1 windows, t - (T + H) + 1. Throws WindowError when t < T + H.
std::size_t window_count(std::size_t length, std::size_t lookback, std::size_t horizon);

/// All windows of the table in origin order.
std::vector<WindowPair> make_windows(const SeriesTable& table, std::size_t lookback, std::size_t horizon);

/// Lazy view of the windows of one table. Batches are gathered on demand so the
/// full window list never has to be materialized.
class WindowSet {
public:
    WindowSet(const SeriesTable& table, std::size_t lookback, std::size_t horizon);

    std::size_t size() const noexcept { return count_; }
    std::size_t lookback() const noexcept { return lookback_; }
    std::size_t horizon() const noexcept { return horizon_; }
    std::size_t channels() const noexcept { return table_->channels(); }

    /// x: [B x N x T], y: [B x N x H] for the given origins.
    void gather(std::span<const std::size_t> origins, Tensor& x, Tensor& y) const;
    WindowPair pair(std::size_t origin) const;

private:
    const SeriesTable* table_;
    std::size_t lookback_;
    std::size_t horizon_;
    std::size_t count_;
};

/// Pearson correlation across channels [N x N]. Zero-variance channels get
/// zero off-diagonal entries and a unit diagonal; their names are reported via `zero_variance`.
Tensor pearson_corr(const SeriesTable& table, std::vector<std::string>* zero_variance = nullptr);

/// Per-channel z-scoring fitted on one table and applied to others.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    static Standardizer fit(const SeriesTable& table);
    SeriesTable apply(const SeriesTable& table) const;
};

// CSV: header row, optional timestamp column, decimal-point floats.

/// Loads a CSV; `timestamp_column` names a column to validate (strictly
/// increasing) and drop. Throws LoadError with row/column on any problem.
SeriesTable load_csv(const std::filesystem::path& path, const std::optional<std::string>& timestamp_column = std::nullopt);

void write_csv(const std::filesystem::path& path, const SeriesTable& table);

struct SyntheticSpec {
    std::size_t channels = 8;
    std::size_t length = 4096;
    /// Group id per channel; empty means one group per channel.
    std::vector<std::size_t> groups;
    double rho = 0.9;
    double noise = 0.1;
    double ar_coef = 0.8;
};

/// Each group shares a latent AR(1) signal s_g; channel c in group g is
/// sqrt(rho) s_g + sqrt(1 - rho) u_c + noise e_c with u_c an independent AR(1)
/// and e_c white, so within-group correlation is rho / (1 + noise^2).
SeriesTable gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

} // namespace hnmvts
