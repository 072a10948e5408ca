#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hnmvts/data.hpp"
#include "hnmvts/model.hpp"
#include "hnmvts/trainer.hpp"
#include "hnmvts/wilcoxon.hpp"

namespace hnmvts {

/// Environment variable that overrides every output directory; nothing else is read from the environment.
inline constexpr const char* kOutputDirEnv = "HNMVTS_OUTPUT_DIR";

struct DataSource {
    std::string name = "dataset";
    std::optional<std::filesystem::path> csv;
    std::optional<std::string> timestamp_column;
    std::optional<SyntheticSpec> synthetic;
    std::uint64_t synthetic_seed = 0;
    /// z-score every split with statistics of the training split.
    bool standardize = true;
};

struct ExperimentSpec {
    DataSource data;
    SplitSpec split;
    ModelConfig model; // channels/horizon are filled per run
    TrainConfig train;
    std::vector<std::size_t> horizons{48, 96, 192, 336};
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::vector<Variant> variants{Variant::baseline, Variant::hn_mvts};
    Variant variant = Variant::hn_mvts; // single-run commands (train)
    std::filesystem::path output_dir = "results";
};

/// Flat-section INI text with every key and its default value.
std::string default_config_text();

/// Parses the INI config; missing keys keep their defaults. Relative data paths
/// resolve against `base_dir`.
ExperimentSpec parse_experiment_spec(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

/// Output directory after applying the environment override.
std::filesystem::path resolve_output_dir(const std::filesystem::path& configured);

struct PreparedData {
    Splits splits;
    std::optional<Standardizer> scaler;
    std::vector<std::string> channel_names;
};

/// Loads and splits the data; when standardizing, `fixed` replaces the scaler fitted on the train split.
PreparedData prepare_data(const DataSource& source, const SplitSpec& split, const Standardizer* fixed = nullptr);

/// ModelConfig for one (variant, horizon) cell of the experiment grid.
ModelConfig model_for(const ExperimentSpec& spec, std::size_t channels, std::size_t horizon, Variant variant);

struct ResultRecord {
    std::string dataset;
    std::string backbone;
    std::string variant;
    std::size_t horizon = 0;
    std::uint64_t seed = 0;
    std::string status = "ok";
    std::string reason;
    double test_mse = 0;
    double test_mae = 0;
    double epoch_seconds_mean = 0;
    double epoch_seconds_std = 0;
    std::size_t trainable_params = 0; // during training
    std::size_t inference_params = 0; // after bake
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
};

nlohmann::ordered_json to_json(const ResultRecord& r);
ResultRecord result_from_json(const nlohmann::json& j);

/// JSON-lines result file. Records are keyed by (dataset, backbone, variant,
/// horizon, seed); a write replaces a matching record or appends, and every
/// write rewrites the file through a temp file + rename. Calls are serialized.
class ResultWriter {
public:
    explicit ResultWriter(std::filesystem::path path);
    void write(const ResultRecord& record);
    const std::vector<ResultRecord>& records() const noexcept { return records_; }

private:
    std::filesystem::path path_;
    std::vector<ResultRecord> records_;
    std::mutex mutex_;
};

using Logger = std::function<void(const std::string&)>;

/// Trains baseline and/or HN-MVTS for every (horizon, seed) in the spec, bakes
/// HN-MVTS models, scores the test split and records metrics and timing.
/// A failed run becomes a record with status "failed"; the grid continues.
std::vector<ResultRecord> run_experiment(const ExperimentSpec& spec, ResultWriter* writer = nullptr,
                                         const Logger& log = {});

struct VariantStats {
    std::size_t n = 0;
    double mse_mean = 0, mse_std = 0;
    double mae_mean = 0, mae_std = 0;
    double seconds_mean = 0;
};

struct SummaryCell {
    std::string dataset;
    std::string backbone;
    std::size_t horizon = 0;
    bool complete = false;
    VariantStats baseline;
    VariantStats hn_mvts;
    WilcoxonResult test;          // on per-seed MSE pairs (hn_mvts vs baseline)
    double relative_change = 0;   // (hn - base) / base of mean MSE
    double time_ratio = 0;        // hn / base seconds per epoch
};

/// Groups successful records by (dataset, backbone, horizon); std is the sample (n-1) std.
std::vector<SummaryCell> summarize(const std::vector<ResultRecord>& records);
std::string format_summary(const std::vector<SummaryCell>& cells);
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryCell>& cells);

} // namespace hnmvts
