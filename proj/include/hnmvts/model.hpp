#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hnmvts/autodiff.hpp"
#include "hnmvts/backbone.hpp"
#include "hnmvts/data.hpp"
#include "hnmvts/hypernet.hpp"

namespace hnmvts {

enum class Variant { baseline, hn_mvts };

/// baseline: plain trainable final layer. hyper: final layer generated from Z.
/// baked: a hyper model whose generated weights were frozen into a plain final layer.
enum class ModelForm { baseline, hyper, baked };

std::string to_string(Variant v);
std::string to_string(ModelForm f);
Variant parse_variant(const std::string& s);
ModelForm parse_model_form(const std::string& s);

struct ModelConfig {
    BackboneConfig backbone;
    Variant variant = Variant::hn_mvts;
    HyperConfig hyper;
    bool revin = true;
};

nlohmann::ordered_json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

/// Tape values produced by one forward pass over a batch x [B x N x T].
struct ForwardPass {
    Var prediction;            // [B x N x H], data scale
    Var normalized_prediction; // [B x N x H], before RevIN reverse (== prediction without RevIN)
    std::optional<Var> mean;   // RevIN statistics, [B x N]
    std::optional<Var> scale;
};

class ForecastModel {
public:
    /// Builds a fresh model. HN-MVTS needs the training split to initialize Z.
    static ForecastModel create(const ModelConfig& cfg, const SeriesTable* train, std::uint64_t seed);

    ForecastModel(ModelConfig cfg, ModelForm form, std::vector<Parameter> params);

    const ModelConfig& config() const noexcept { return cfg_; }
    ModelForm form() const noexcept { return form_; }

    std::vector<Parameter>& parameters() noexcept { return params_; }
    const std::vector<Parameter>& parameters() const noexcept { return params_; }
    const Parameter* find(const std::string& name) const;
    Parameter* find(const std::string& name);

    /// Trainable scalars; `prefix` restricts the count to parameter names starting with it.
    std::size_t trainable_count(const std::string& prefix = "") const;

    /// Binds parameters to `tape` (trainable ones as gradient leaves) and runs the model.
    /// `bound` receives one Var per parameter, aligned with parameters(). With
    /// track_grad off everything is bound as a constant and no backward closures are kept.
    ForwardPass forward(Tape& tape, const Tensor& x, std::vector<Var>* bound = nullptr, bool track_grad = true) const;

    /// Runs the model on parameters supplied by `params` instead of its own values.
    ForwardPass forward_with(Tape& tape, const Tensor& x, const ParamLookup& params) const;

    /// Gradient-free prediction; x is [N x T] or [B x N x T].
    Tensor predict(const Tensor& x) const;

    /// Generated (hyper) or stored (baseline/baked) final weights for a slot.
    Tensor final_weights(const std::string& slot) const;

    /// Learned channel embeddings; only hyper-form models carry them.
    const Tensor& embeddings() const;

private:
    ModelConfig cfg_;
    ModelForm form_;
    std::vector<Parameter> params_;
};

/// Materializes W_K once per slot into a plain final layer and drops Z and the generator.
/// Baseline and already-baked models are returned unchanged.
ForecastModel bake(const ForecastModel& model);

/// Versioned binary checkpoint: magic, version, JSON header (config echo,
/// tensor table, user metadata), then raw little-endian float64 payload.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    ForecastModel model;
    nlohmann::ordered_json meta;
};

void save_checkpoint(const std::filesystem::path& path, const ForecastModel& model,
                     const nlohmann::ordered_json& meta = nlohmann::ordered_json::object());
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace hnmvts
