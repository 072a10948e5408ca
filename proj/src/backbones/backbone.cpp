#include "hnmvts/backbone.hpp"

#include "hnmvts/error.hpp"

#include <cmath>

#include <fmt/format.h>

namespace hnmvts {

std::string to_string(BackboneKind kind) { return kind == BackboneKind::dlinear ? "dlinear" : "mlp"; }
std::string to_string(FinalMode mode) { return mode == FinalMode::individual ? "individual" : "shared"; }

BackboneKind parse_backbone_kind(const std::string& s) {
    if (s == "dlinear") return BackboneKind::dlinear;
    if (s == "mlp") return BackboneKind::mlp;
    throw ContractError(fmt::format("unknown backbone '{}' (expected dlinear or mlp)", s));
}

FinalMode parse_final_mode(const std::string& s) {
    if (s == "individual") return FinalMode::individual;
    if (s == "shared") return FinalMode::shared;
    throw ContractError(fmt::format("unknown final layer mode '{}' (expected individual or shared)", s));
}

std::size_t hidden_dim(const BackboneConfig& cfg) {
    if (cfg.kind == BackboneKind::dlinear) return cfg.lookback;
    if (cfg.mlp_hidden.empty()) throw ContractError("MLP backbone needs at least one trunk layer");
    return cfg.mlp_hidden.back();
}

std::vector<std::string> final_slots(BackboneKind kind) {
    if (kind == BackboneKind::dlinear) return {"trend", "seasonal"};
    return {"out"};
}

std::vector<Parameter> init_backbone(const BackboneConfig& cfg, Rng& rng) {
    std::vector<Parameter> params;
    if (cfg.kind == BackboneKind::dlinear) {
        if (cfg.kernel % 2 == 0 || cfg.kernel > cfg.lookback) {
            throw ContractError(fmt::format("DLinear kernel {} must be odd and <= lookback {}", cfg.kernel, cfg.lookback));
        }
        return params;
    }
    std::size_t in = cfg.lookback;
    for (std::size_t i = 0; i < cfg.mlp_hidden.size(); ++i) {
        const std::size_t out = cfg.mlp_hidden[i];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        params.push_back({fmt::format("backbone.mlp.{}.weight", i), rng.uniform_tensor({out, in}, -bound, bound)});
        params.push_back({fmt::format("backbone.mlp.{}.bias", i), rng.uniform_tensor({out}, -bound, bound)});
        in = out;
    }
    return params;
}

Tensor init_final_layer(const BackboneConfig& cfg, Rng& rng) {
    const std::size_t d = hidden_dim(cfg);
    const double bound = 1.0 / std::sqrt(static_cast<double>(d));
    const std::size_t n = cfg.final_mode == FinalMode::individual ? cfg.channels : 1;
    return rng.uniform_tensor({n, cfg.horizon, d}, -bound, bound);
}

DecompositionVars decompose(const Var& x, std::size_t kernel) {
    Var trend = moving_average(x, kernel);
    return DecompositionVars{trend, sub(x, trend)};
}

Decomposition decompose(const Tensor& x, std::size_t kernel) {
    Tape tape;
    auto parts = decompose(tape.constant(x), kernel);
    return Decomposition{parts.trend.value(), parts.seasonal.value()};
}

std::vector<Var> forward_hidden(const BackboneConfig& cfg, const ParamLookup& params, const Var& x) {
    const Shape& s = x.shape();
    if (s.size() != 3 || s[1] != cfg.channels || s[2] != cfg.lookback) {
        throw DimensionError(fmt::format("backbone expects [B x {} x {}], got {}", cfg.channels, cfg.lookback,
                                         shape_str(s)));
    }
    if (cfg.kind == BackboneKind::dlinear) {
        auto parts = decompose(x, cfg.kernel);
        return {parts.trend, parts.seasonal};
    }
    const std::size_t batch = s[0];
    Var h = reshape(x, {batch * cfg.channels, cfg.lookback});
    for (std::size_t i = 0; i < cfg.mlp_hidden.size(); ++i) {
        h = relu(linear(h, params(fmt::format("backbone.mlp.{}.weight", i)),
                        params(fmt::format("backbone.mlp.{}.bias", i))));
    }
    return {reshape(h, {batch, cfg.channels, cfg.mlp_hidden.back()})};
}

Var apply_final(const Var& weights, const Var& hidden) {
    if (hidden.shape().size() == 2) {
        const Shape& hs = hidden.shape();
        Var out = channel_linear(reshape(hidden, {1, hs[0], hs[1]}), weights);
        return reshape(out, {hs[0], weights.shape()[1]});
    }
    return channel_linear(hidden, weights);
}

Tensor apply_final(const Tensor& weights, const Tensor& hidden) {
    Tape tape;
    return apply_final(tape.constant(weights), tape.constant(hidden)).value();
}

} // namespace hnmvts
