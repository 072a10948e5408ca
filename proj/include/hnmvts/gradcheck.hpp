#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hnmvts/autodiff.hpp"

namespace hnmvts {

/// Builds a scalar on `tape` from one Var per input tensor.
using TapeFunction = std::function<Var(Tape& tape, std::span<const Var> inputs)>;

struct GradCheckResult {
    double max_relative_error = 0;
    std::size_t worst_input = 0;
    std::size_t worst_index = 0;
};

/// Compares reverse-mode gradients against central differences at `point`,
/// returning max over coordinates of |g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|).
GradCheckResult finite_diff_check(const TapeFunction& f, std::span<const Tensor> point, double step = 1e-5);

/// Reverse-mode gradients of f at `point`, one tensor per input.
std::vector<Tensor> gradients(const TapeFunction& f, std::span<const Tensor> point);

} // namespace hnmvts
