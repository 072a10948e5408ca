#include "hnmvts/data.hpp"

#include "hnmvts/error.hpp"
#include "hnmvts/rng.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace hnmvts {

namespace {

std::vector<double> ar1_path(Rng rng, std::size_t length, double coef) {
    std::vector<double> path(length);
    const double innovation = std::sqrt(1.0 - coef * coef);
    double s = rng.normal();
    for (auto& v : path) {
        v = s;
        s = coef * s + innovation * rng.normal();
    }
    return path;
}

} // namespace

SeriesTable gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    if (!(spec.rho >= 0.0 && spec.rho <= 1.0)) throw ContractError(fmt::format("rho = {} outside [0, 1]", spec.rho));
    if (!(spec.noise >= 0.0)) throw ContractError(fmt::format("noise = {} must be nonnegative", spec.noise));
    if (!(std::abs(spec.ar_coef) < 1.0)) throw ContractError(fmt::format("ar_coef = {} must be inside (-1, 1)", spec.ar_coef));
    if (spec.channels == 0 || spec.length < 2) throw ContractError("synthetic series needs channels >= 1 and length >= 2");

    std::vector<std::size_t> groups = spec.groups;
    if (groups.empty()) {
        groups.resize(spec.channels);
        for (std::size_t c = 0; c < spec.channels; ++c) groups[c] = c;
    }
    if (groups.size() != spec.channels) {
        throw ContractError(fmt::format("{} group ids for {} channels", groups.size(), spec.channels));
    }
    const std::size_t n_groups = *std::max_element(groups.begin(), groups.end()) + 1;

    // Stream layout: [0, n_groups) latent signals, then per-channel idiosyncratic and noise streams.
    Rng root(seed);
    std::vector<std::vector<double>> latent;
    for (std::size_t g = 0; g < n_groups; ++g) latent.push_back(ar1_path(root.fork(g), spec.length, spec.ar_coef));

    const double shared = std::sqrt(spec.rho);
    const double own = std::sqrt(1.0 - spec.rho);
    SeriesTable table;
    table.values = Tensor({spec.length, spec.channels});
    for (std::size_t c = 0; c < spec.channels; ++c) {
        table.channel_names.push_back(fmt::format("ch{}", c));
        const auto idio = ar1_path(root.fork(n_groups + 2 * c), spec.length, spec.ar_coef);
        Rng noise = root.fork(n_groups + 2 * c + 1);
        for (std::size_t t = 0; t < spec.length; ++t) {
            double v = shared * latent[groups[c]][t] + own * idio[t];
            if (spec.noise > 0) v += spec.noise * noise.normal();
            table.values[t * spec.channels + c] = static_cast<Real>(v);
        }
    }
    return table;
}

} // namespace hnmvts
