#include "hnmvts/adam.hpp"

#include "hnmvts/error.hpp"

#include <cmath>

#include <fmt/format.h>

namespace hnmvts {

void adam_step(std::span<Parameter* const> params, std::span<const Tensor> grads, AdamState& state) {
    if (params.size() != grads.size()) {
        throw ContractError(fmt::format("adam_step: {} parameters but {} gradients", params.size(), grads.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i]->value.shape() != grads[i].shape()) {
            throw DimensionError(fmt::format("adam_step: parameter '{}' is {} but its gradient is {}",
                                             params[i]->name, shape_str(params[i]->value.shape()),
                                             shape_str(grads[i].shape())));
        }
        if (!grads[i].all_finite()) {
            throw NumericError(fmt::format("adam_step: non-finite gradient for parameter '{}'", params[i]->name));
        }
    }
    if (state.m.empty()) {
        for (const auto* p : params) {
            state.m.emplace_back(p->value.shape());
            state.v.emplace_back(p->value.shape());
        }
    } else if (state.m.size() != params.size()) {
        throw ContractError("adam_step: optimizer state was built for a different parameter list");
    }

    ++state.step;
    const auto& o = state.options;
    const double k = static_cast<double>(state.step);
    const double corr1 = 1.0 - std::pow(o.beta1, k);
    const double corr2 = 1.0 - std::pow(o.beta2, k);

    const double b1 = o.beta1, b2 = o.beta2;
    const double step_size = o.lr / corr1;
    const double inv_sqrt_corr2 = 1.0 / std::sqrt(corr2);
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i]->trainable) continue;
        Real* w = params[i]->value.ptr();
        const Real* g = grads[i].ptr();
        Real* m = state.m[i].ptr();
        Real* v = state.v[i].ptr();
        const std::size_t len = params[i]->value.size();
        for (std::size_t j = 0; j < len; ++j) {
            const double gj = g[j];
            const double mj = b1 * m[j] + (1.0 - b1) * gj;
            const double vj = b2 * v[j] + (1.0 - b2) * gj * gj;
            m[j] = static_cast<Real>(mj);
            v[j] = static_cast<Real>(vj);
            w[j] = static_cast<Real>(w[j] - step_size * mj / (std::sqrt(vj) * inv_sqrt_corr2 + o.eps));
        }
    }
}

} // namespace hnmvts
