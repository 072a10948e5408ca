#include "hnmvts/hypernet.hpp"

#include "hnmvts/error.hpp"
#include "hnmvts/linalg.hpp"

#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

namespace hnmvts {

std::string to_string(GeneratorMode mode) {
    return mode == GeneratorMode::per_channel_linear ? "per_channel_linear" : "shared_mlp";
}

GeneratorMode parse_generator_mode(const std::string& s) {
    if (s == "per_channel_linear") return GeneratorMode::per_channel_linear;
    if (s == "shared_mlp") return GeneratorMode::shared_mlp;
    throw ContractError(fmt::format("unknown generator mode '{}' (expected per_channel_linear or shared_mlp)", s));
}

std::size_t embedding_dim(const HyperConfig& cfg, std::size_t channels) {
    return cfg.embed_dim == 0 ? channels : cfg.embed_dim;
}

Tensor init_embeddings(const SeriesTable& train, std::size_t d) {
    const std::size_t n = train.channels();
    if (d < 1 || d > n) throw ContractError(fmt::format("embedding dim {} outside [1, {}]", d, n));
    std::vector<std::string> flat;
    Tensor corr = pearson_corr(train, &flat);
    for (const auto& name : flat) {
        fmt::print(stderr, "warning: channel '{}' has zero variance on the training split\n", name);
    }
    return pca_project(corr, d);
}

namespace {

std::string phi_name(const std::string& slot) { return fmt::format("hyper.{}.phi", slot); }
std::string mlp_weight(const std::string& slot, std::size_t i) { return fmt::format("hyper.{}.mlp.{}.weight", slot, i); }
std::string mlp_bias(const std::string& slot, std::size_t i) { return fmt::format("hyper.{}.mlp.{}.bias", slot, i); }
std::string mlp_out(const std::string& slot) { return fmt::format("hyper.{}.mlp.out.weight", slot); }

Var shared_mlp_weights(const HyperConfig& cfg, const BackboneConfig& backbone, const std::string& slot,
                       const ParamLookup& params, const Var& z) {
    Var h = z;
    for (std::size_t i = 0; i < cfg.mlp_hidden.size(); ++i) {
        h = relu(linear(h, params(mlp_weight(slot, i)), params(mlp_bias(slot, i))));
    }
    Var flat = linear(h, params(mlp_out(slot)));
    return reshape(flat, {backbone.channels, backbone.horizon, hidden_dim(backbone)});
}

} // namespace

Var contract_embeddings(const Var& phi, const Var& z, std::size_t horizon, std::size_t hidden) {
    const Shape& ps = phi.shape();
    const Shape& zs = z.shape();
    if (ps.size() != 3 || zs.size() != 2 || ps[0] != zs[0] || ps[2] != zs[1] || ps[1] != horizon * hidden) {
        throw DimensionError(fmt::format("generator weights {} do not match embeddings {} for H={}, D={}",
                                         shape_str(ps), shape_str(zs), horizon, hidden));
    }
    Var out = channel_linear(reshape(z, {1, zs[0], zs[1]}), phi);
    return reshape(out, {zs[0], horizon, hidden});
}

Var generate_weights(const HyperConfig& cfg, const BackboneConfig& backbone, const std::string& slot,
                     const ParamLookup& params, const Var& embeddings) {
    const std::size_t n = backbone.channels;
    const std::size_t d = embedding_dim(cfg, n);
    if (embeddings.shape() != Shape{n, d}) {
        throw ContractError(fmt::format("embeddings are {}, expected [{}x{}]", shape_str(embeddings.shape()), n, d));
    }
    if (cfg.mode == GeneratorMode::per_channel_linear) {
        return contract_embeddings(params(phi_name(slot)), embeddings, backbone.horizon, hidden_dim(backbone));
    }
    return shared_mlp_weights(cfg, backbone, slot, params, embeddings);
}

std::vector<Parameter> init_generator(const HyperConfig& cfg, const BackboneConfig& backbone, const std::string& slot,
                                      const Tensor& embeddings, Rng& rng) {
    const std::size_t n = backbone.channels;
    const std::size_t h = backbone.horizon;
    const std::size_t hd = hidden_dim(backbone);
    const std::size_t d = embedding_dim(cfg, n);
    if (embeddings.shape() != Shape{n, d}) {
        throw ContractError(fmt::format("embeddings are {}, expected [{}x{}]", shape_str(embeddings.shape()), n, d));
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(hd));
    std::vector<Parameter> params;

    if (cfg.mode == GeneratorMode::per_channel_linear) {
        // Entries ~ U(+-1/sqrt(D)) / |z[n]|, so each generated weight has the variance of a
        // uniform fan-in initialization whatever the embedding's norm.
        Tensor phi({n, h * hd, d});
        for (std::size_t c = 0; c < n; ++c) {
            double norm = 0;
            for (std::size_t q = 0; q < d; ++q) norm += embeddings[c * d + q] * embeddings[c * d + q];
            norm = std::sqrt(norm);
            if (norm < 1e-8) norm = 1.0;
            Real* slice = phi.ptr() + c * h * hd * d;
            for (std::size_t i = 0; i < h * hd * d; ++i) slice[i] = static_cast<Real>(rng.uniform(-bound, bound) / norm);
        }
        params.push_back({phi_name(slot), std::move(phi)});
        return params;
    }

    std::size_t in = d;
    for (std::size_t i = 0; i < cfg.mlp_hidden.size(); ++i) {
        const std::size_t out = cfg.mlp_hidden[i];
        const double b = 1.0 / std::sqrt(static_cast<double>(in));
        params.push_back({mlp_weight(slot, i), rng.uniform_tensor({out, in}, -b, b)});
        params.push_back({mlp_bias(slot, i), rng.uniform_tensor({out}, -b, b)});
        in = out;
    }
    const double b = 1.0 / std::sqrt(static_cast<double>(in));
    params.push_back({mlp_out(slot), rng.uniform_tensor({h * hd, in}, -b, b)});

    // Rescale the output layer so generated weights match the RMS of U(+-1/sqrt(D)).
    Tape tape;
    std::unordered_map<std::string, Var> bound_params;
    for (const auto& p : params) bound_params.emplace(p.name, tape.constant(p.value));
    ParamLookup lookup = [&](const std::string& name) -> const Var& { return bound_params.at(name); };
    Tensor generated = shared_mlp_weights(cfg, backbone, slot, lookup, tape.constant(embeddings)).value();
    double sq = 0;
    for (Real v : generated.data()) sq += static_cast<double>(v) * v;
    const double rms = std::sqrt(sq / static_cast<double>(generated.size()));
    if (rms > 1e-12) {
        const double factor = (bound / std::sqrt(3.0)) / rms;
        for (auto& v : params.back().value.data()) v = static_cast<Real>(v * factor);
    }
    return params;
}

std::size_t param_count(std::size_t channels, std::size_t horizon, std::size_t hidden, std::size_t embed_dim,
                        bool learnable_embeddings, GeneratorMode mode, std::size_t heads,
                        const std::vector<std::size_t>& mlp_hidden) {
    std::size_t per_head = 0;
    if (mode == GeneratorMode::per_channel_linear) {
        per_head = channels * horizon * hidden * embed_dim;
    } else {
        std::size_t in = embed_dim;
        for (auto width : mlp_hidden) {
            per_head += in * width + width;
            in = width;
        }
        per_head += in * horizon * hidden;
    }
    return heads * per_head + (learnable_embeddings ? channels * embed_dim : 0);
}

} // namespace hnmvts
