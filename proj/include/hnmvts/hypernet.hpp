#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hnmvts/autodiff.hpp"
#include "hnmvts/backbone.hpp"
#include "hnmvts/data.hpp"
#include "hnmvts/rng.hpp"

namespace hnmvts {

/// How channel embeddings become final-layer weights.
///  per_channel_linear: W_K[n] = W_phi[n] . z[n], one H x D x d tensor per channel.
///  shared_mlp:         W_K[n] = reshape(MLP(z[n]), H x D), one MLP for all channels.
enum class GeneratorMode { per_channel_linear, shared_mlp };

std::string to_string(GeneratorMode mode);
GeneratorMode parse_generator_mode(const std::string& s);

struct HyperConfig {
    GeneratorMode mode = GeneratorMode::per_channel_linear;
    std::size_t embed_dim = 0;          // d; 0 means "same as the channel count"
    bool learnable_embeddings = true;
    std::vector<std::size_t> mlp_hidden{32}; // shared_mlp only; biases on these layers
};

inline constexpr const char* kEmbeddingParam = "hyper.z";

/// Resolved embedding width (embed_dim, or N when it is 0).
std::size_t embedding_dim(const HyperConfig& cfg, std::size_t channels);

/// Z = pca_project(pearson_corr(train), d). Uses nothing but the given (training) split.
Tensor init_embeddings(const SeriesTable& train, std::size_t d);

/// Generator parameters feeding final-layer slot `slot`, initialized so the
/// generated weights start at the scale of a plain uniform fan-in layer.
std::vector<Parameter> init_generator(const HyperConfig& cfg, const BackboneConfig& backbone, const std::string& slot,
                                      const Tensor& embeddings, Rng& rng);

/// Differentiable W_K [N x H x D] for one slot from the bound embedding Var.
Var generate_weights(const HyperConfig& cfg, const BackboneConfig& backbone, const std::string& slot,
                     const ParamLookup& params, const Var& embeddings);

/// Raw per-channel contraction: W_K[n][i][j] = sum_q phi[n][i*D + j][q] z[n][q].
/// phi is [N x H*D x d], z is [N x d]; result [N x H x D].
Var contract_embeddings(const Var& phi, const Var& z, std::size_t horizon, std::size_t hidden);

/// Trainable hypernetwork parameters added on top of the backbone:
/// per_channel_linear: heads * N*H*D*d; shared_mlp: per-head MLP sizes. Plus N*d when Z is learnable.
std::size_t param_count(std::size_t channels, std::size_t horizon, std::size_t hidden, std::size_t embed_dim,
                        bool learnable_embeddings, GeneratorMode mode, std::size_t heads,
                        const std::vector<std::size_t>& mlp_hidden = {});

} // namespace hnmvts
