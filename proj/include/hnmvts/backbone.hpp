#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hnmvts/autodiff.hpp"
#include "hnmvts/rng.hpp"
#include "hnmvts/tensor.hpp"

namespace hnmvts {

enum class BackboneKind { dlinear, mlp };

/// Whether the final layer holds one H x D matrix per channel or one shared matrix.
enum class FinalMode { individual, shared };

std::string to_string(BackboneKind kind);
std::string to_string(FinalMode mode);
BackboneKind parse_backbone_kind(const std::string& s);
FinalMode parse_final_mode(const std::string& s);

struct BackboneConfig {
    BackboneKind kind = BackboneKind::dlinear;
    std::size_t channels = 1;
    std::size_t lookback = 336;
    std::size_t horizon = 96;
    std::size_t kernel = 25;                   // DLinear moving-average window
    std::vector<std::size_t> mlp_hidden{128};  // MLP trunk widths after the input
    FinalMode final_mode = FinalMode::individual;
};

/// Width D of the hidden state fed to the final layer.
std::size_t hidden_dim(const BackboneConfig& cfg);

/// Final-layer slots: {"trend", "seasonal"} for DLinear, {"out"} for the MLP.
std::vector<std::string> final_slots(BackboneKind kind);

/// Name -> bound Var for the parameters of one forward pass.
using ParamLookup = std::function<const Var&(const std::string& name)>;

/// Trunk parameters (none for DLinear).
std::vector<Parameter> init_backbone(const BackboneConfig& cfg, Rng& rng);

/// Plain per-channel final-layer weights [N x H x D] (or [1 x H x D] when shared),
/// uniform in +-1/sqrt(D).
Tensor init_final_layer(const BackboneConfig& cfg, Rng& rng);

struct Decomposition {
    Tensor trend;
    Tensor seasonal;
};

struct DecompositionVars {
    Var trend;
    Var seasonal;
};

/// trend = centered moving average (replicate padding); seasonal = x - trend.
Decomposition decompose(const Tensor& x, std::size_t kernel);
DecompositionVars decompose(const Var& x, std::size_t kernel);

/// Hidden states, one per final slot, each [B x N x D]. x is [B x N x T].
std::vector<Var> forward_hidden(const BackboneConfig& cfg, const ParamLookup& params, const Var& x);

/// y[n] = W[n] h[n]; h is [N x D] or [B x N x D], W is [N x H x D] or [1 x H x D].
Tensor apply_final(const Tensor& weights, const Tensor& hidden);
Var apply_final(const Var& weights, const Var& hidden);

} // namespace hnmvts
