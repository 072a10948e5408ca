#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hnmvts/autodiff.hpp"
#include "hnmvts/tensor.hpp"

namespace hnmvts {

struct AdamOptions {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Moments for one optimizer; slot i belongs to the i-th parameter passed to adam_step.
struct AdamState {
    AdamOptions options;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::uint64_t step = 0;
};

/// One bias-corrected Adam update over `params` in place. Frozen parameters
/// (trainable == false) are skipped but keep their moment slots.
/// Throws NumericError naming the parameter when a gradient is not finite.
void adam_step(std::span<Parameter* const> params, std::span<const Tensor> grads, AdamState& state);

} // namespace hnmvts
