#include "hnmvts/error.hpp"
#include "hnmvts/experiment.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <type_traits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

namespace hnmvts {

namespace pt = boost::property_tree;

namespace {

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& key) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        item = item.substr(first, item.find_last_not_of(" \t") - first + 1);
        std::stringstream conv(item);
        T v{};
        if (!(conv >> v) || !conv.eof()) throw FormatError(fmt::format("config key '{}': bad list item '{}'", key, item));
        out.push_back(v);
    }
    return out;
}

template <typename T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
    const auto raw = tree.get_optional<std::string>(key);
    if (!raw) return fallback;
    if constexpr (std::is_same_v<T, std::string>) {
        return *raw;
    } else if constexpr (std::is_same_v<T, bool>) {
        if (*raw == "true" || *raw == "1" || *raw == "yes") return true;
        if (*raw == "false" || *raw == "0" || *raw == "no") return false;
        throw FormatError(fmt::format("config key '{}': expected true or false, got '{}'", key, *raw));
    } else {
        if (raw->empty()) return fallback;
        std::istringstream conv(*raw);
        T v{};
        if (!(conv >> v) || !(conv >> std::ws).eof() || (std::is_unsigned_v<T> && raw->find('-') != std::string::npos)) {
            throw FormatError(fmt::format("config key '{}': cannot parse '{}'", key, *raw));
        }
        return v;
    }
}

std::string list_text(const std::vector<std::size_t>& v) { return fmt::format("{}", fmt::join(v, ",")); }

} // namespace

std::string default_config_text() {
    const ExperimentSpec d;
    const SyntheticSpec syn;
    std::string out;
    out += "# hnmvts experiment config. Every key is optional; shown values are the defaults.\n\n";
    out += "[data]\n";
    out += "# CSV with a header row; leave empty to use [synthetic]\n";
    out += "path =\n";
    out += "# column validated as increasing and dropped (e.g. date for ETT files)\n";
    out += "timestamp_column =\n";
    out += fmt::format("name = {}\n", d.data.name);
    out += "# z-score all splits with training-split statistics\n";
    out += fmt::format("standardize = {}\n\n", d.data.standardize);
    out += "[synthetic]\n";
    out += fmt::format("channels = {}\nlength = {}\n", syn.channels, syn.length);
    out += "# comma-separated group id per channel; empty = one group per channel\n";
    out += "groups =\n";
    out += fmt::format("rho = {}\nnoise = {}\nar_coef = {}\nseed = 0\n\n", syn.rho, syn.noise, syn.ar_coef);
    out += "[split]\n";
    out += fmt::format("train = {}\nval = {}\ntest = {}\n", d.split.train, d.split.val, d.split.test);
    out += "# keep only the first N rows before splitting (ETT protocol: 14400 hourly, 57600 15-minute)\n";
    out += "truncate_to =\n\n";
    out += "[model]\n";
    out += "# dlinear | mlp\n";
    out += fmt::format("backbone = {}\n", to_string(d.model.backbone.kind));
    out += fmt::format("kernel = {}\n", d.model.backbone.kernel);
    out += fmt::format("mlp_hidden = {}\n", list_text(d.model.backbone.mlp_hidden));
    out += "# baseline final layer: individual | shared\n";
    out += fmt::format("final_mode = {}\n", to_string(d.model.backbone.final_mode));
    out += "# per_channel_linear | shared_mlp\n";
    out += fmt::format("generator = {}\n", to_string(d.model.hyper.mode));
    out += "# 0 = number of channels\n";
    out += fmt::format("embed_dim = {}\n", d.model.hyper.embed_dim);
    out += fmt::format("learnable_embeddings = {}\n", d.model.hyper.learnable_embeddings);
    out += fmt::format("generator_hidden = {}\n", list_text(d.model.hyper.mlp_hidden));
    out += fmt::format("revin = {}\n\n", d.model.revin);
    out += "[train]\n";
    out += fmt::format("lookback = {}\nhorizon = {}\nbatch_size = {}\nlr = {}\nmax_epochs = {}\n", d.train.lookback,
                       d.train.horizon, d.train.batch_size, d.train.lr, d.train.max_epochs);
    out += "# 0 disables early stopping\n";
    out += "patience = 0\n";
    out += fmt::format("seed = {}\nshuffle = {}\n", d.train.seed, d.train.shuffle);
    out += "# variant trained by the train command: baseline | hn_mvts\n";
    out += fmt::format("variant = {}\n\n", to_string(d.variant));
    out += "[bench]\n";
    out += fmt::format("horizons = {}\n", list_text(d.horizons));
    out += fmt::format("seeds = {}\n", fmt::join(d.seeds, ","));
    out += "variants = baseline,hn_mvts\n";
    out += fmt::format("output_dir = {}\n", d.output_dir.string());
    return out;
}

ExperimentSpec parse_experiment_spec(const std::string& text, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw FormatError(fmt::format("config: {}", e.what()));
    }

    ExperimentSpec spec;
    const std::string path = get<std::string>(tree, "data.path", "");
    if (!path.empty()) {
        std::filesystem::path p(path);
        spec.data.csv = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    const std::string ts = get<std::string>(tree, "data.timestamp_column", "");
    if (!ts.empty()) spec.data.timestamp_column = ts;
    spec.data.name = get<std::string>(tree, "data.name", spec.data.csv ? spec.data.csv->stem().string() : "synthetic");
    spec.data.standardize = get<bool>(tree, "data.standardize", spec.data.standardize);

    if (!spec.data.csv) {
        SyntheticSpec syn;
        syn.channels = get<std::size_t>(tree, "synthetic.channels", syn.channels);
        syn.length = get<std::size_t>(tree, "synthetic.length", syn.length);
        syn.groups = parse_list<std::size_t>(get<std::string>(tree, "synthetic.groups", ""), "synthetic.groups");
        syn.rho = get<double>(tree, "synthetic.rho", syn.rho);
        syn.noise = get<double>(tree, "synthetic.noise", syn.noise);
        syn.ar_coef = get<double>(tree, "synthetic.ar_coef", syn.ar_coef);
        spec.data.synthetic = syn;
        spec.data.synthetic_seed = get<std::uint64_t>(tree, "synthetic.seed", 0);
    }

    spec.split.train = get<double>(tree, "split.train", spec.split.train);
    spec.split.val = get<double>(tree, "split.val", spec.split.val);
    spec.split.test = get<double>(tree, "split.test", spec.split.test);
    const std::string trunc = get<std::string>(tree, "split.truncate_to", "");
    if (!trunc.empty()) spec.split.truncate_to = parse_list<std::size_t>(trunc, "split.truncate_to").at(0);

    auto& bb = spec.model.backbone;
    bb.kind = parse_backbone_kind(get<std::string>(tree, "model.backbone", to_string(bb.kind)));
    bb.kernel = get<std::size_t>(tree, "model.kernel", bb.kernel);
    bb.mlp_hidden = parse_list<std::size_t>(get<std::string>(tree, "model.mlp_hidden", list_text(bb.mlp_hidden)),
                                            "model.mlp_hidden");
    bb.final_mode = parse_final_mode(get<std::string>(tree, "model.final_mode", to_string(bb.final_mode)));
    auto& hy = spec.model.hyper;
    hy.mode = parse_generator_mode(get<std::string>(tree, "model.generator", to_string(hy.mode)));
    hy.embed_dim = get<std::size_t>(tree, "model.embed_dim", hy.embed_dim);
    hy.learnable_embeddings = get<bool>(tree, "model.learnable_embeddings", hy.learnable_embeddings);
    hy.mlp_hidden = parse_list<std::size_t>(get<std::string>(tree, "model.generator_hidden", list_text(hy.mlp_hidden)),
                                            "model.generator_hidden");
    spec.model.revin = get<bool>(tree, "model.revin", spec.model.revin);

    auto& tr = spec.train;
    tr.lookback = get<std::size_t>(tree, "train.lookback", tr.lookback);
    tr.horizon = get<std::size_t>(tree, "train.horizon", tr.horizon);
    tr.batch_size = get<std::size_t>(tree, "train.batch_size", tr.batch_size);
    tr.lr = get<double>(tree, "train.lr", tr.lr);
    tr.max_epochs = get<std::size_t>(tree, "train.max_epochs", tr.max_epochs);
    const auto patience = get<std::size_t>(tree, "train.patience", 0);
    if (patience > 0) tr.early_stop_patience = patience;
    tr.seed = get<std::uint64_t>(tree, "train.seed", tr.seed);
    tr.shuffle = get<bool>(tree, "train.shuffle", tr.shuffle);
    spec.variant = parse_variant(get<std::string>(tree, "train.variant", to_string(spec.variant)));

    spec.horizons = parse_list<std::size_t>(get<std::string>(tree, "bench.horizons", list_text(spec.horizons)),
                                            "bench.horizons");
    spec.seeds = parse_list<std::uint64_t>(get<std::string>(tree, "bench.seeds", "0,1,2,3,4"), "bench.seeds");
    spec.variants.clear();
    std::stringstream vs(get<std::string>(tree, "bench.variants", "baseline,hn_mvts"));
    for (std::string v; std::getline(vs, v, ',');) {
        v.erase(0, v.find_first_not_of(" \t"));
        v.erase(v.find_last_not_of(" \t") + 1);
        if (!v.empty()) spec.variants.push_back(parse_variant(v));
    }
    spec.output_dir = get<std::string>(tree, "bench.output_dir", spec.output_dir.string());

    if (spec.seeds.empty()) throw FormatError("config: bench.seeds must not be empty");
    if (spec.horizons.empty()) throw FormatError("config: bench.horizons must not be empty");
    if (spec.variants.empty()) throw FormatError("config: bench.variants must not be empty");
    return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(fmt::format("{}: cannot open config", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment_spec(buffer.str(), path.parent_path());
}

std::filesystem::path resolve_output_dir(const std::filesystem::path& configured) {
    if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
    return configured;
}

PreparedData prepare_data(const DataSource& source, const SplitSpec& split, const Standardizer* fixed) {
    SeriesTable table;
    if (source.csv) {
        table = load_csv(*source.csv, source.timestamp_column);
    } else if (source.synthetic) {
        table = gen_synthetic(*source.synthetic, source.synthetic_seed);
    } else {
        throw ContractError("data source has neither a CSV path nor a synthetic spec");
    }
    PreparedData out{chrono_split(table, split), std::nullopt, table.channel_names};
    if (source.standardize) {
        Standardizer scaler = fixed ? *fixed : Standardizer::fit(out.splits.train);
        if (scaler.mean.size() != table.channel_names.size() || scaler.stddev.size() != table.channel_names.size()) {
            throw DimensionError(fmt::format("scaler covers {} channels, data has {}", scaler.mean.size(),
                                             table.channel_names.size()));
        }
        out.splits.train = scaler.apply(out.splits.train);
        out.splits.val = scaler.apply(out.splits.val);
        out.splits.test = scaler.apply(out.splits.test);
        out.scaler = std::move(scaler);
    }
    return out;
}

ModelConfig model_for(const ExperimentSpec& spec, std::size_t channels, std::size_t horizon, Variant variant) {
    ModelConfig cfg = spec.model;
    cfg.backbone.channels = channels;
    cfg.backbone.lookback = spec.train.lookback;
    cfg.backbone.horizon = horizon;
    cfg.variant = variant;
    return cfg;
}

} // namespace hnmvts
