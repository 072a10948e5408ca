#include "hnmvts/revin.hpp"

#include "hnmvts/error.hpp"

namespace hnmvts {

RevinVars revin_forward(const Var& x, Real eps) {
    if (x.shape().empty() || x.shape().back() < 1) throw ContractError("revin_forward needs a time axis");
    Var mu = row_mean(x);
    Var centered = row_sub(x, mu);
    Var sd = sqrt(row_mean(square(centered)));
    Var scale = add_scalar(sd, eps);
    return RevinVars{row_div(centered, scale), mu, sd, scale};
}

Var revin_reverse(const Var& y_norm, const Var& mean, const Var& scale) {
    return row_add(row_mul(y_norm, scale), mean);
}

Var revin_normalize_with(const Var& y, const Var& mean, const Var& scale) {
    return row_div(row_sub(y, mean), scale);
}

RevinOutput revin_forward(const Tensor& x, Real eps) {
    Tape tape;
    Var xv = tape.constant(x);
    RevinVars r = revin_forward(xv, eps);
    return RevinOutput{r.normalized.value(), InstanceStats{r.mean.value(), r.std.value(), eps}};
}

Tensor revin_reverse(const Tensor& y_norm, const InstanceStats& stats) {
    Tape tape;
    Var mean = tape.constant(stats.mean);
    Var scale = add_scalar(tape.constant(stats.std), stats.eps);
    return revin_reverse(tape.constant(y_norm), mean, scale).value();
}

} // namespace hnmvts
