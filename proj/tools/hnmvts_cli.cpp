#include "hnmvts/error.hpp"
#include "hnmvts/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

using namespace hnmvts;
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

ordered_json data_source_json(const DataSource& d) {
    ordered_json j;
    j["name"] = d.name;
    j["csv"] = d.csv ? ordered_json(fs::absolute(*d.csv).string()) : ordered_json(nullptr);
    j["timestamp_column"] = d.timestamp_column ? ordered_json(*d.timestamp_column) : ordered_json(nullptr);
    if (d.synthetic) {
        const auto& s = *d.synthetic;
        j["synthetic"] = {{"channels", s.channels}, {"length", s.length}, {"groups", s.groups},
                          {"rho", s.rho},           {"noise", s.noise},   {"ar_coef", s.ar_coef}};
    } else {
        j["synthetic"] = nullptr;
    }
    j["synthetic_seed"] = d.synthetic_seed;
    j["standardize"] = d.standardize;
    return j;
}

DataSource data_source_from_json(const nlohmann::json& j) {
    DataSource d;
    d.name = j.at("name").get<std::string>();
    if (!j.at("csv").is_null()) d.csv = j.at("csv").get<std::string>();
    if (!j.at("timestamp_column").is_null()) d.timestamp_column = j.at("timestamp_column").get<std::string>();
    if (const auto& s = j.at("synthetic"); !s.is_null()) {
        SyntheticSpec syn;
        syn.channels = s.at("channels").get<std::size_t>();
        syn.length = s.at("length").get<std::size_t>();
        syn.groups = s.at("groups").get<std::vector<std::size_t>>();
        syn.rho = s.at("rho").get<double>();
        syn.noise = s.at("noise").get<double>();
        syn.ar_coef = s.at("ar_coef").get<double>();
        d.synthetic = syn;
    }
    d.synthetic_seed = j.at("synthetic_seed").get<std::uint64_t>();
    d.standardize = j.at("standardize").get<bool>();
    return d;
}

ordered_json split_json(const SplitSpec& s) {
    ordered_json j{{"train", s.train}, {"val", s.val}, {"test", s.test}};
    j["truncate_to"] = s.truncate_to ? ordered_json(*s.truncate_to) : ordered_json(nullptr);
    return j;
}

SplitSpec split_from_json(const nlohmann::json& j) {
    SplitSpec s;
    s.train = j.at("train").get<double>();
    s.val = j.at("val").get<double>();
    s.test = j.at("test").get<double>();
    if (!j.at("truncate_to").is_null()) s.truncate_to = j.at("truncate_to").get<std::size_t>();
    return s;
}

void print_metrics(const std::string& split, const Metrics& m, std::size_t windows) {
    ordered_json j{{"split", split}, {"windows", windows}, {"mse", m.mse}, {"mae", m.mae}};
    std::cout << j.dump() << '\n';
}

int cmd_train(const fs::path& config, std::optional<std::uint64_t> seed, std::optional<fs::path> out_dir) {
    ExperimentSpec spec = load_experiment_spec(config);
    if (seed) spec.train.seed = *seed;
    const std::size_t horizon = spec.train.horizon;
    const fs::path out = out_dir ? *out_dir
                                 : resolve_output_dir(spec.output_dir) /
                                       fmt::format("{}_{}_{}_H{}_s{}", spec.data.name, to_string(spec.model.backbone.kind),
                                                   to_string(spec.variant), horizon, spec.train.seed);
    fs::create_directories(out);

    const PreparedData data = prepare_data(spec.data, spec.split);
    const WindowSet train_w(data.splits.train, spec.train.lookback, horizon);
    std::optional<WindowSet> val_w;
    if (data.splits.val.length() >= spec.train.lookback + horizon) val_w.emplace(data.splits.val, spec.train.lookback, horizon);

    const ForecastModel init = ForecastModel::create(model_for(spec, data.channel_names.size(), horizon, spec.variant),
                                                     &data.splits.train, spec.train.seed);
    std::cerr << fmt::format("training {} ({} trainable parameters, {} windows)\n", to_string(spec.variant),
                             init.trainable_count(), train_w.size());
    TrainResult result = train(init, train_w, val_w ? &*val_w : nullptr, spec.train, [](const EpochRecord& e) {
        std::cerr << fmt::format("epoch {:>3}  train_loss {:.6f}  val_mse {:.6f}  {:.2f}s\n", e.epoch, e.train_loss,
                                 e.val_mse, e.seconds);
    });

    ordered_json meta;
    meta["data"] = data_source_json(spec.data);
    meta["split"] = split_json(spec.split);
    meta["channel_names"] = data.channel_names;
    meta["scaler"] = data.scaler ? ordered_json{{"mean", data.scaler->mean}, {"stddev", data.scaler->stddev}}
                                 : ordered_json(nullptr);
    meta["seed"] = spec.train.seed;
    meta["best_epoch"] = result.history.best_epoch;
    meta["best_val_mse"] = result.history.best_val_mse;
    save_checkpoint(out / "checkpoint.bin", result.model, meta);
    write_history_csv(out / "history.csv", result.history);
    std::cerr << fmt::format("wrote {}\n", (out / "checkpoint.bin").string());
    return 0;
}

int cmd_bake(const fs::path& in, const fs::path& out) {
    Checkpoint ck = load_checkpoint(in);
    const ForecastModel baked = bake(ck.model);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    save_checkpoint(out, baked, ck.meta);
    std::cerr << fmt::format("{} -> {} ({} -> {} parameters)\n", to_string(ck.model.form()), to_string(baked.form()),
                             ck.model.trainable_count(), baked.trainable_count());
    return 0;
}

int cmd_eval(const fs::path& checkpoint, std::optional<fs::path> csv, const std::string& split) {
    Checkpoint ck = load_checkpoint(checkpoint);
    DataSource source = data_source_from_json(ck.meta.at("data"));
    std::optional<Standardizer> stored;
    if (csv) {
        source.csv = *csv;
        source.synthetic.reset();
        if (const auto& sc = ck.meta.at("scaler"); !sc.is_null()) {
            stored = Standardizer{sc.at("mean").get<std::vector<double>>(), sc.at("stddev").get<std::vector<double>>()};
        }
    }
    const PreparedData data = prepare_data(source, split_from_json(ck.meta.at("split")), stored ? &*stored : nullptr);
    if (data.channel_names != ck.meta.at("channel_names").get<std::vector<std::string>>()) {
        throw DimensionError("eval: data channels differ from the checkpoint's training channels");
    }
    const auto& bb = ck.model.config().backbone;
    const auto run = [&](const std::string& name, const SeriesTable& table) {
        const WindowSet w(table, bb.lookback, bb.horizon);
        print_metrics(name, evaluate(ck.model, w), w.size());
    };
    if (split == "train" || split == "all") run("train", data.splits.train);
    if (split == "val" || split == "all") run("val", data.splits.val);
    if (split == "test" || split == "all") run("test", data.splits.test);
    return 0;
}

int cmd_bench(const fs::path& config, std::optional<fs::path> out_dir) {
    const ExperimentSpec spec = load_experiment_spec(config);
    const fs::path out = out_dir ? *out_dir : resolve_output_dir(spec.output_dir);
    fs::create_directories(out);
    ResultWriter writer(out / "results.jsonl");
    run_experiment(spec, &writer, [](const std::string& line) { std::cerr << line << '\n'; });
    const auto cells = summarize(writer.records());
    const std::string table = format_summary(cells);
    std::cout << table;
    std::ofstream(out / "summary.txt") << table;
    write_summary_csv(out / "summary.csv", cells);
    return 0;
}

int cmd_synth(const CLI::App& cmd, const std::optional<fs::path>& spec_path, SyntheticSpec spec, std::uint64_t seed,
              const fs::path& out) {
    if (spec_path) {
        const ExperimentSpec file = load_experiment_spec(*spec_path);
        if (!file.data.synthetic) throw FormatError(fmt::format("{}: [data] path is set; no synthetic source", spec_path->string()));
        const SyntheticSpec base = *file.data.synthetic;
        if (cmd.count("--channels") == 0) spec.channels = base.channels;
        if (cmd.count("--length") == 0) spec.length = base.length;
        if (cmd.count("--groups") == 0) spec.groups = base.groups;
        if (cmd.count("--rho") == 0) spec.rho = base.rho;
        if (cmd.count("--noise") == 0) spec.noise = base.noise;
        if (cmd.count("--ar-coef") == 0) spec.ar_coef = base.ar_coef;
        if (cmd.count("--seed") == 0) seed = file.data.synthetic_seed;
    }
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_csv(out, gen_synthetic(spec, seed));
    return 0;
}

int cmd_export_embeddings(const fs::path& checkpoint, const fs::path& out) {
    Checkpoint ck = load_checkpoint(checkpoint);
    const Tensor& z = ck.model.embeddings();
    const auto names = ck.meta.contains("channel_names") ? ck.meta.at("channel_names").get<std::vector<std::string>>()
                                                         : std::vector<std::string>{};
    std::ofstream f(out);
    if (!f) throw std::runtime_error(fmt::format("{}: cannot open for writing", out.string()));
    const std::size_t n = z.dim(0), d = z.dim(1);
    f << "channel";
    for (std::size_t k = 0; k < d; ++k) f << ",z" << k;
    f << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        f << (i < names.size() ? names[i] : fmt::format("ch{}", i));
        for (std::size_t k = 0; k < d; ++k) f << fmt::format(",{:.17g}", static_cast<double>(z[i * d + k]));
        f << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"HN-MVTS: hypernetwork-generated final layers for multivariate forecasting"};
    app.require_subcommand(0, 1);
    bool print_config = false;
    app.add_flag("--print-config", print_config, "Print the default config with every key and exit");

    fs::path config;
    std::optional<std::uint64_t> seed;
    std::optional<fs::path> out_dir;
    auto* train_cmd = app.add_subcommand("train", "Train one model from a config");
    train_cmd->add_option("-c,--config", config, "INI config")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--seed", seed, "Override [train] seed");
    train_cmd->add_option("-o,--out", out_dir, "Output directory (default: <output_dir>/<run name>)");

    fs::path ck_in, ck_out;
    auto* bake_cmd = app.add_subcommand("bake", "Freeze generated final weights into a plain layer");
    bake_cmd->add_option("--checkpoint", ck_in, "Input checkpoint")->required()->check(CLI::ExistingFile);
    bake_cmd->add_option("-o,--out", ck_out, "Output checkpoint")->required();

    std::optional<fs::path> eval_csv;
    std::string eval_split = "test";
    auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint; prints one JSON line per split");
    eval_cmd->add_option("--checkpoint", ck_in, "Checkpoint")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--data", eval_csv, "CSV to score instead of the training data source");
    eval_cmd->add_option("--split", eval_split, "train, val, test or all")
        ->check(CLI::IsMember({"train", "val", "test", "all"}));

    auto* bench_cmd = app.add_subcommand("bench", "Run the baseline vs HN-MVTS grid and summarize");
    bench_cmd->add_option("-s,--spec,-c,--config", config, "INI config")->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("-o,--out", out_dir, "Output directory (default: [bench] output_dir)");

    std::optional<fs::path> syn_spec;
    SyntheticSpec syn;
    std::uint64_t syn_seed = 0;
    fs::path syn_out;
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic grouped-AR dataset as CSV");
    synth_cmd->add_option("-s,--spec", syn_spec, "INI config; its [synthetic] section is the base for the options below")
        ->check(CLI::ExistingFile);
    synth_cmd->add_option("--channels", syn.channels)->capture_default_str();
    synth_cmd->add_option("--length", syn.length)->capture_default_str();
    synth_cmd->add_option("--groups", syn.groups, "Group id per channel")->delimiter(',');
    synth_cmd->add_option("--rho", syn.rho)->capture_default_str();
    synth_cmd->add_option("--noise", syn.noise)->capture_default_str();
    synth_cmd->add_option("--ar-coef", syn.ar_coef)->capture_default_str();
    synth_cmd->add_option("--seed", syn_seed)->capture_default_str();
    synth_cmd->add_option("-o,--out", syn_out)->required();

    auto* embed_cmd = app.add_subcommand("export-embeddings", "Write learned channel embeddings as CSV");
    embed_cmd->add_option("--checkpoint", ck_in, "Checkpoint")->required()->check(CLI::ExistingFile);
    embed_cmd->add_option("-o,--out", ck_out, "Output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (print_config) {
            std::cout << default_config_text();
            return 0;
        }
        if (*train_cmd) return cmd_train(config, seed, out_dir);
        if (*bake_cmd) return cmd_bake(ck_in, ck_out);
        if (*eval_cmd) return cmd_eval(ck_in, eval_csv, eval_split);
        if (*bench_cmd) return cmd_bench(config, out_dir);
        if (*synth_cmd) return cmd_synth(*synth_cmd, syn_spec, syn, syn_seed, syn_out);
        if (*embed_cmd) return cmd_export_embeddings(ck_in, ck_out);
        std::cout << app.help();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
