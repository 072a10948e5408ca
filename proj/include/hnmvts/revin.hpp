#pragma once

#include "hnmvts/autodiff.hpp"
#include "hnmvts/tensor.hpp"

namespace hnmvts {

inline constexpr Real kRevinEps = Real(1e-5);

/// Per-channel statistics of one lookback window, shaped like the window
/// without its time axis ([N] for one window, [B x N] for a batch).
struct InstanceStats {
    Tensor mean;
    Tensor std; // population std, >= 0
    Real eps = kRevinEps;
};

struct RevinOutput {
    Tensor normalized;
    InstanceStats stats;
};

/// x_norm = (x - mean) / (std + eps) over the last (time) axis.
RevinOutput revin_forward(const Tensor& x, Real eps = kRevinEps);
/// y = y_norm * (std + eps) + mean, broadcast over the last axis.
Tensor revin_reverse(const Tensor& y_norm, const InstanceStats& stats);

/// Differentiable form. Statistics stay on the tape, so gradients reach the
/// input through both the centering and the scale.
struct RevinVars {
    Var normalized;
    Var mean;
    Var std;
    Var scale; // std + eps
};

RevinVars revin_forward(const Var& x, Real eps = kRevinEps);
Var revin_reverse(const Var& y_norm, const Var& mean, const Var& scale);
/// Maps a target window into the normalized space of its lookback.
Var revin_normalize_with(const Var& y, const Var& mean, const Var& scale);

} // namespace hnmvts
