#include "hnmvts/error.hpp"
#include "hnmvts/experiment.hpp"

#include <fstream>

#include <fmt/format.h>

namespace hnmvts {

nlohmann::ordered_json to_json(const ResultRecord& r) {
    nlohmann::ordered_json j;
    j["dataset"] = r.dataset;
    j["backbone"] = r.backbone;
    j["variant"] = r.variant;
    j["horizon"] = r.horizon;
    j["seed"] = r.seed;
    j["status"] = r.status;
    j["reason"] = r.reason;
    j["test_mse"] = r.test_mse;
    j["test_mae"] = r.test_mae;
    j["epoch_seconds_mean"] = r.epoch_seconds_mean;
    j["epoch_seconds_std"] = r.epoch_seconds_std;
    j["trainable_params"] = r.trainable_params;
    j["inference_params"] = r.inference_params;
    j["best_epoch"] = r.best_epoch;
    j["epochs_run"] = r.epochs_run;
    return j;
}

ResultRecord result_from_json(const nlohmann::json& j) {
    ResultRecord r;
    try {
        r.dataset = j.at("dataset").get<std::string>();
        r.backbone = j.at("backbone").get<std::string>();
        r.variant = j.at("variant").get<std::string>();
        r.horizon = j.at("horizon").get<std::size_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.status = j.at("status").get<std::string>();
        r.reason = j.value("reason", "");
        r.test_mse = j.value("test_mse", 0.0);
        r.test_mae = j.value("test_mae", 0.0);
        r.epoch_seconds_mean = j.value("epoch_seconds_mean", 0.0);
        r.epoch_seconds_std = j.value("epoch_seconds_std", 0.0);
        r.trainable_params = j.value("trainable_params", std::size_t{0});
        r.inference_params = j.value("inference_params", std::size_t{0});
        r.best_epoch = j.value("best_epoch", std::size_t{0});
        r.epochs_run = j.value("epochs_run", std::size_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(fmt::format("result record: {}", e.what()));
    }
    return r;
}

namespace {

bool same_key(const ResultRecord& a, const ResultRecord& b) {
    return a.dataset == b.dataset && a.backbone == b.backbone && a.variant == b.variant && a.horizon == b.horizon &&
           a.seed == b.seed;
}

} // namespace

ResultWriter::ResultWriter(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            records_.push_back(result_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(fmt::format("{}:{}: {}", path_.string(), lineno, e.what()));
        }
    }
}

void ResultWriter::write(const ResultRecord& record) {
    std::lock_guard lock(mutex_);
    bool replaced = false;
    for (auto& r : records_) {
        if (same_key(r, record)) {
            r = record;
            replaced = true;
            break;
        }
    }
    if (!replaced) records_.push_back(record);

    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    auto tmp = path_;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error(fmt::format("{}: cannot open for writing", tmp.string()));
        for (const auto& r : records_) out << to_json(r).dump() << '\n';
        if (!out.flush()) throw std::runtime_error(fmt::format("{}: write failed", tmp.string()));
    }
    std::filesystem::rename(tmp, path_);
}

std::vector<ResultRecord> run_experiment(const ExperimentSpec& spec, ResultWriter* writer, const Logger& log) {
    const auto say = [&](const std::string& msg) {
        if (log) log(msg);
    };
    const PreparedData data = prepare_data(spec.data, spec.split);
    const std::size_t channels = data.channel_names.size();
    const std::string backbone = to_string(spec.model.backbone.kind);
    std::vector<ResultRecord> out;

    for (std::size_t horizon : spec.horizons) {
        for (std::uint64_t seed : spec.seeds) {
            for (Variant variant : spec.variants) {
                ResultRecord rec;
                rec.dataset = spec.data.name;
                rec.backbone = backbone;
                rec.variant = to_string(variant);
                rec.horizon = horizon;
                rec.seed = seed;
                try {
                    const WindowSet train_w(data.splits.train, spec.train.lookback, horizon);
                    const WindowSet test_w(data.splits.test, spec.train.lookback, horizon);
                    std::optional<WindowSet> val_w;
                    if (data.splits.val.length() >= spec.train.lookback + horizon) {
                        val_w.emplace(data.splits.val, spec.train.lookback, horizon);
                    }

                    const ForecastModel init =
                        ForecastModel::create(model_for(spec, channels, horizon, variant), &data.splits.train, seed);
                    TrainConfig tc = spec.train;
                    tc.horizon = horizon;
                    tc.seed = seed;
                    TrainResult trained = train(init, train_w, val_w ? &*val_w : nullptr, tc);
                    const ForecastModel final_model = bake(trained.model);
                    const Metrics m = evaluate(final_model, test_w);
                    const auto [t_mean, t_std] = epoch_time_stats(trained.history);

                    rec.test_mse = m.mse;
                    rec.test_mae = m.mae;
                    rec.epoch_seconds_mean = t_mean;
                    rec.epoch_seconds_std = t_std;
                    rec.trainable_params = init.trainable_count();
                    rec.inference_params = final_model.trainable_count();
                    rec.best_epoch = trained.history.best_epoch;
                    rec.epochs_run = trained.history.epochs.size();
                    say(fmt::format("{} {} H={} seed={} {}: mse={:.6f} mae={:.6f} epoch={:.3f}s", rec.dataset, backbone,
                                    horizon, seed, rec.variant, m.mse, m.mae, t_mean));
                } catch (const std::exception& e) {
                    rec.status = "failed";
                    rec.reason = e.what();
                    say(fmt::format("{} {} H={} seed={} {}: failed: {}", rec.dataset, backbone, horizon, seed,
                                    rec.variant, e.what()));
                }
                if (writer) writer->write(rec);
                out.push_back(rec);
            }
        }
    }
    return out;
}

} // namespace hnmvts
