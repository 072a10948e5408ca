#include "hnmvts/trainer.hpp"

#include "hnmvts/adam.hpp"
#include "hnmvts/error.hpp"
#include "hnmvts/revin.hpp"
#include "hnmvts/rng.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

namespace hnmvts {

namespace {

// Stream id for minibatch shuffling, disjoint from model-initialization streams.
constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;

std::string param_norms(const ForecastModel& model) {
    std::string out;
    for (const auto& p : model.parameters()) {
        double sq = 0;
        for (Real v : p.value.data()) sq += static_cast<double>(v) * v;
        out += fmt::format("{}{}={:.4g}", out.empty() ? "" : ", ", p.name, std::sqrt(sq));
    }
    return out;
}

} // namespace

Var training_loss(const ModelConfig& cfg, const ForwardPass& pass, const Var& target) {
    Var diff = cfg.revin ? sub(pass.normalized_prediction, revin_normalize_with(target, *pass.mean, *pass.scale))
                         : sub(pass.prediction, target);
    return mean(square(diff));
}

TrainResult train(const ForecastModel& initial, const WindowSet& train_windows, const WindowSet* val_windows,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
    if (train_windows.size() == 0) throw ContractError("train: empty training set");
    if (cfg.batch_size == 0 || cfg.max_epochs == 0) throw ContractError("train: batch_size and max_epochs must be positive");
    const BackboneConfig& bb = initial.config().backbone;
    if (train_windows.lookback() != bb.lookback || train_windows.horizon() != bb.horizon ||
        train_windows.channels() != bb.channels) {
        throw DimensionError(fmt::format("train: windows are N={}, T={}, H={} but the model expects N={}, T={}, H={}",
                                         train_windows.channels(), train_windows.lookback(), train_windows.horizon(),
                                         bb.channels, bb.lookback, bb.horizon));
    }

    ForecastModel model = initial;
    ForecastModel best = initial;
    TrainHistory history;

    std::vector<Parameter*> trainable;
    std::vector<std::size_t> trainable_index;
    for (std::size_t i = 0; i < model.parameters().size(); ++i) {
        if (model.parameters()[i].trainable) {
            trainable.push_back(&model.parameters()[i]);
            trainable_index.push_back(i);
        }
    }
    AdamState adam;
    adam.options.lr = cfg.lr;

    Rng shuffle_rng(cfg.seed, kShuffleStream);
    std::vector<std::size_t> order(train_windows.size());
    std::iota(order.begin(), order.end(), 0);
    Tensor x, y;
    std::vector<Tensor> grads(trainable.size());
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        if (cfg.shuffle) shuffle_rng.shuffle(std::span<std::size_t>(order));
        const auto start = std::chrono::steady_clock::now();
        double loss_sum = 0;
        std::size_t batches = 0;

        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
            train_windows.gather(std::span(order).subspan(begin, end - begin), x, y);

            Tape tape;
            std::vector<Var> bound;
            ForwardPass pass = model.forward(tape, x, &bound);
            Var target = tape.constant(y);
            Var loss = training_loss(model.config(), pass, target);
            const double loss_value = loss.value()[0];
            if (!std::isfinite(loss_value)) {
                throw NumericError(fmt::format("non-finite loss at epoch {}, batch {}; parameter norms: {}", epoch,
                                               batches, param_norms(model)));
            }
            tape.backward(loss);
            for (std::size_t k = 0; k < trainable.size(); ++k) grads[k] = tape.take_grad(bound[trainable_index[k]]);
            adam_step(trainable, grads, adam);

            loss_sum += loss_value;
            ++batches;
        }

        EpochRecord record;
        record.epoch = epoch;
        record.train_loss = loss_sum / static_cast<double>(batches);
        record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        record.val_mse = val_windows ? evaluate(model, *val_windows).mse : record.train_loss;
        history.epochs.push_back(record);
        if (on_epoch) on_epoch(record);

        const bool improved = epoch == 0 || record.val_mse < history.best_val_mse;
        if (improved || !val_windows) {
            history.best_epoch = epoch;
            history.best_val_mse = record.val_mse;
            best = model;
            since_best = 0;
        } else if (cfg.early_stop_patience && ++since_best >= *cfg.early_stop_patience) {
            break;
        }
    }
    return TrainResult{std::move(best), std::move(history)};
}

Metrics evaluate(const ForecastModel& model, const WindowSet& windows, std::size_t batch_size) {
    if (windows.size() == 0) throw ContractError("evaluate: empty window set");
    Tensor x, y;
    std::vector<std::size_t> origins;
    double sq = 0, ab = 0;
    std::size_t count = 0;
    for (std::size_t begin = 0; begin < windows.size(); begin += batch_size) {
        const std::size_t end = std::min(windows.size(), begin + batch_size);
        origins.resize(end - begin);
        std::iota(origins.begin(), origins.end(), begin);
        windows.gather(origins, x, y);
        Tensor pred = model.predict(x);
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double e = static_cast<double>(pred[i]) - y[i];
            sq += e * e;
            ab += std::abs(e);
        }
        count += pred.size();
    }
    return Metrics{sq / static_cast<double>(count), ab / static_cast<double>(count)};
}

std::pair<double, double> epoch_time_stats(const TrainHistory& history) {
    if (history.epochs.empty()) return {0.0, 0.0};
    double s = 0;
    for (const auto& e : history.epochs) s += e.seconds;
    const double m = s / static_cast<double>(history.epochs.size());
    double v = 0;
    for (const auto& e : history.epochs) v += (e.seconds - m) * (e.seconds - m);
    return {m, std::sqrt(v / static_cast<double>(history.epochs.size()))};
}

void write_history_csv(const std::filesystem::path& path, const TrainHistory& history) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("{}: cannot open for writing", path.string()));
    out << "epoch,train_loss,val_mse,seconds\n";
    for (const auto& e : history.epochs) {
        out << fmt::format("{},{:.17g},{:.17g},{:.6f}\n", e.epoch, e.train_loss, e.val_mse, e.seconds);
    }
}

} // namespace hnmvts
