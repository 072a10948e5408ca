#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "hnmvts/data.hpp"
#include "hnmvts/model.hpp"

namespace hnmvts {

struct TrainConfig {
    std::size_t lookback = 336;
    std::size_t horizon = 96;
    std::size_t batch_size = 64;
    double lr = 1e-4;
    std::size_t max_epochs = 20;
    std::uint64_t seed = 0;
    bool shuffle = true;
    std::optional<std::size_t> early_stop_patience;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0; // mean minibatch loss (normalized space when RevIN is on)
    double val_mse = 0;    // data scale
    double seconds = 0;    // wall clock of the training pass
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0; // first argmin of val_mse
    double best_val_mse = 0;
};

struct TrainResult {
    ForecastModel model; // parameters from the best validation epoch
    TrainHistory history;
};

/// MSE against `target` [B x N x H]; in RevIN-normalized space when the model uses RevIN.
Var training_loss(const ModelConfig& cfg, const ForwardPass& pass, const Var& target);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Minibatch Adam on MSE. Each epoch visits every training window once in a
/// seeded shuffle (final short batch kept), then scores the full validation set.
/// Without validation windows the last epoch is returned.
TrainResult train(const ForecastModel& initial, const WindowSet& train_windows, const WindowSet* val_windows,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

struct Metrics {
    double mse = 0;
    double mae = 0;
};

/// Mean squared / absolute error over all windows, channels and horizon steps, data scale.
Metrics evaluate(const ForecastModel& model, const WindowSet& windows, std::size_t batch_size = 256);

/// Mean and population std of per-epoch wall-clock seconds.
std::pair<double, double> epoch_time_stats(const TrainHistory& history);

void write_history_csv(const std::filesystem::path& path, const TrainHistory& history);

} // namespace hnmvts
