#include "hnmvts/model.hpp"

#include "hnmvts/error.hpp"
#include "hnmvts/revin.hpp"

#include <unordered_map>

#include <fmt/format.h>

namespace hnmvts {

std::string to_string(Variant v) { return v == Variant::baseline ? "baseline" : "hn_mvts"; }

std::string to_string(ModelForm f) {
    switch (f) {
    case ModelForm::baseline: return "baseline";
    case ModelForm::hyper: return "hyper";
    case ModelForm::baked: return "baked";
    }
    return "unknown";
}

Variant parse_variant(const std::string& s) {
    if (s == "baseline") return Variant::baseline;
    if (s == "hn_mvts") return Variant::hn_mvts;
    throw ContractError(fmt::format("unknown variant '{}' (expected baseline or hn_mvts)", s));
}

ModelForm parse_model_form(const std::string& s) {
    if (s == "baseline") return ModelForm::baseline;
    if (s == "hyper") return ModelForm::hyper;
    if (s == "baked") return ModelForm::baked;
    throw FormatError(fmt::format("unknown model form '{}'", s));
}

nlohmann::ordered_json to_json(const ModelConfig& cfg) {
    nlohmann::ordered_json j;
    j["backbone"] = to_string(cfg.backbone.kind);
    j["channels"] = cfg.backbone.channels;
    j["lookback"] = cfg.backbone.lookback;
    j["horizon"] = cfg.backbone.horizon;
    j["kernel"] = cfg.backbone.kernel;
    j["mlp_hidden"] = cfg.backbone.mlp_hidden;
    j["final_mode"] = to_string(cfg.backbone.final_mode);
    j["variant"] = to_string(cfg.variant);
    j["generator"] = to_string(cfg.hyper.mode);
    j["embed_dim"] = cfg.hyper.embed_dim;
    j["learnable_embeddings"] = cfg.hyper.learnable_embeddings;
    j["generator_hidden"] = cfg.hyper.mlp_hidden;
    j["revin"] = cfg.revin;
    return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
    try {
        ModelConfig cfg;
        cfg.backbone.kind = parse_backbone_kind(j.at("backbone").get<std::string>());
        cfg.backbone.channels = j.at("channels").get<std::size_t>();
        cfg.backbone.lookback = j.at("lookback").get<std::size_t>();
        cfg.backbone.horizon = j.at("horizon").get<std::size_t>();
        cfg.backbone.kernel = j.at("kernel").get<std::size_t>();
        cfg.backbone.mlp_hidden = j.at("mlp_hidden").get<std::vector<std::size_t>>();
        cfg.backbone.final_mode = parse_final_mode(j.at("final_mode").get<std::string>());
        cfg.variant = parse_variant(j.at("variant").get<std::string>());
        cfg.hyper.mode = parse_generator_mode(j.at("generator").get<std::string>());
        cfg.hyper.embed_dim = j.at("embed_dim").get<std::size_t>();
        cfg.hyper.learnable_embeddings = j.at("learnable_embeddings").get<bool>();
        cfg.hyper.mlp_hidden = j.at("generator_hidden").get<std::vector<std::size_t>>();
        cfg.revin = j.at("revin").get<bool>();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(fmt::format("bad model config: {}", e.what()));
    }
}

ForecastModel::ForecastModel(ModelConfig cfg, ModelForm form, std::vector<Parameter> params)
    : cfg_(std::move(cfg)), form_(form), params_(std::move(params)) {}

ForecastModel ForecastModel::create(const ModelConfig& cfg, const SeriesTable* train, std::uint64_t seed) {
    const BackboneConfig& bb = cfg.backbone;
    if (bb.channels == 0 || bb.lookback == 0 || bb.horizon == 0) {
        throw ContractError("channels, lookback and horizon must be positive");
    }
    Rng rng(seed);
    Rng backbone_rng = rng.fork(1);
    std::vector<Parameter> params = init_backbone(bb, backbone_rng);
    const auto slots = final_slots(bb.kind);

    if (cfg.variant == Variant::baseline) {
        for (std::size_t k = 0; k < slots.size(); ++k) {
            Rng head_rng = rng.fork(2 + k);
            params.push_back({fmt::format("final.{}", slots[k]), init_final_layer(bb, head_rng)});
        }
        return ForecastModel(cfg, ModelForm::baseline, std::move(params));
    }

    if (train == nullptr) throw ContractError("HN-MVTS needs the training split to initialize embeddings");
    if (train->channels() != bb.channels) {
        throw DimensionError(fmt::format("training split has {} channels, model expects {}", train->channels(),
                                         bb.channels));
    }
    const std::size_t d = embedding_dim(cfg.hyper, bb.channels);
    Tensor z = init_embeddings(*train, d);
    for (std::size_t k = 0; k < slots.size(); ++k) {
        Rng head_rng = rng.fork(2 + k);
        auto gen = init_generator(cfg.hyper, bb, slots[k], z, head_rng);
        params.insert(params.end(), std::make_move_iterator(gen.begin()), std::make_move_iterator(gen.end()));
    }
    params.push_back({kEmbeddingParam, std::move(z), cfg.hyper.learnable_embeddings});
    return ForecastModel(cfg, ModelForm::hyper, std::move(params));
}

const Parameter* ForecastModel::find(const std::string& name) const {
    for (const auto& p : params_)
        if (p.name == name) return &p;
    return nullptr;
}

Parameter* ForecastModel::find(const std::string& name) {
    for (auto& p : params_)
        if (p.name == name) return &p;
    return nullptr;
}

std::size_t ForecastModel::trainable_count(const std::string& prefix) const {
    std::size_t count = 0;
    for (const auto& p : params_)
        if (p.trainable && p.name.starts_with(prefix)) count += p.value.size();
    return count;
}

ForwardPass ForecastModel::forward(Tape& tape, const Tensor& x, std::vector<Var>* bound, bool track_grad) const {
    std::vector<Var> vars;
    vars.reserve(params_.size());
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        vars.push_back(tape.borrow(params_[i].value, track_grad && params_[i].trainable));
        index.emplace(params_[i].name, i);
    }
    ParamLookup lookup = [&](const std::string& name) -> const Var& {
        auto it = index.find(name);
        if (it == index.end()) throw ContractError(fmt::format("model has no parameter '{}'", name));
        return vars[it->second];
    };
    ForwardPass pass = forward_with(tape, x, lookup);
    if (bound) *bound = std::move(vars);
    return pass;
}

ForwardPass ForecastModel::forward_with(Tape& tape, const Tensor& x, const ParamLookup& lookup) const {
    const BackboneConfig& bb = cfg_.backbone;
    if (x.rank() != 3 || x.dim(1) != bb.channels || x.dim(2) != bb.lookback) {
        throw DimensionError(fmt::format("model expects input [B x {} x {}], got {}", bb.channels, bb.lookback,
                                         shape_str(x.shape())));
    }
    ForwardPass pass;
    Var input = tape.constant(x);
    if (cfg_.revin) {
        RevinVars r = revin_forward(input);
        input = r.normalized;
        pass.mean = r.mean;
        pass.scale = r.scale;
    }

    const auto slots = final_slots(bb.kind);
    std::vector<Var> hidden = forward_hidden(bb, lookup, input);
    std::optional<Var> out;
    for (std::size_t k = 0; k < slots.size(); ++k) {
        Var w = form_ == ModelForm::hyper
                    ? generate_weights(cfg_.hyper, bb, slots[k], lookup, lookup(kEmbeddingParam))
                    : lookup(fmt::format("final.{}", slots[k]));
        Var y = apply_final(w, hidden[k]);
        out = out ? add(*out, y) : y;
    }
    pass.normalized_prediction = *out;
    pass.prediction = cfg_.revin ? revin_reverse(*out, *pass.mean, *pass.scale) : *out;
    return pass;
}

Tensor ForecastModel::predict(const Tensor& x) const {
    Tape tape;
    if (x.rank() == 2) {
        Tensor batched = x.reshaped({1, x.dim(0), x.dim(1)});
        return forward(tape, batched, nullptr, false).prediction.value().reshaped({x.dim(0), cfg_.backbone.horizon});
    }
    return forward(tape, x, nullptr, false).prediction.value();
}

Tensor ForecastModel::final_weights(const std::string& slot) const {
    if (form_ != ModelForm::hyper) {
        const Parameter* p = find(fmt::format("final.{}", slot));
        if (!p) throw ContractError(fmt::format("no final layer slot '{}'", slot));
        return p->value;
    }
    Tape tape;
    std::unordered_map<std::string, Var> bound;
    for (const auto& p : params_) bound.emplace(p.name, tape.constant(p.value));
    ParamLookup lookup = [&](const std::string& name) -> const Var& {
        auto it = bound.find(name);
        if (it == bound.end()) throw ContractError(fmt::format("model has no parameter '{}'", name));
        return it->second;
    };
    return generate_weights(cfg_.hyper, cfg_.backbone, slot, lookup, lookup(kEmbeddingParam)).value();
}

const Tensor& ForecastModel::embeddings() const {
    const Parameter* z = find(kEmbeddingParam);
    if (!z) throw ContractError(fmt::format("a {} model has no channel embeddings", to_string(form_)));
    return z->value;
}

ForecastModel bake(const ForecastModel& model) {
    if (model.form() != ModelForm::hyper) return model;
    std::vector<Parameter> params;
    for (const auto& p : model.parameters())
        if (p.name.starts_with("backbone.")) params.push_back(p);
    for (const auto& slot : final_slots(model.config().backbone.kind)) {
        params.push_back({fmt::format("final.{}", slot), model.final_weights(slot)});
    }
    return ForecastModel(model.config(), ModelForm::baked, std::move(params));
}

} // namespace hnmvts
