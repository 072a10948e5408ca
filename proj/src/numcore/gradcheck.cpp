#include "hnmvts/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace hnmvts {

namespace {

double evaluate(const TapeFunction& f, std::span<const Tensor> point) {
    Tape tape;
    std::vector<Var> inputs;
    for (const auto& t : point) inputs.push_back(tape.constant(t));
    return f(tape, inputs).value()[0];
}

} // namespace

std::vector<Tensor> gradients(const TapeFunction& f, std::span<const Tensor> point) {
    Tape tape;
    std::vector<Var> inputs;
    for (const auto& t : point) inputs.push_back(tape.variable(t));
    Var loss = f(tape, inputs);
    tape.backward(loss);
    std::vector<Tensor> out;
    for (const auto& v : inputs) out.push_back(tape.grad(v));
    return out;
}

GradCheckResult finite_diff_check(const TapeFunction& f, std::span<const Tensor> point, double step) {
    const std::vector<Tensor> analytic = gradients(f, point);
    std::vector<Tensor> probe(point.begin(), point.end());
    GradCheckResult result;
    for (std::size_t t = 0; t < probe.size(); ++t) {
        for (std::size_t i = 0; i < probe[t].size(); ++i) {
            const Real saved = probe[t][i];
            probe[t][i] = static_cast<Real>(saved + step);
            const double up = evaluate(f, probe);
            probe[t][i] = static_cast<Real>(saved - step);
            const double down = evaluate(f, probe);
            probe[t][i] = saved;

            const double fd = (up - down) / (2 * step);
            const double ad = analytic[t][i];
            const double err = std::abs(ad - fd) / std::max(1e-8, std::abs(ad) + std::abs(fd));
            if (err > result.max_relative_error) result = {err, t, i};
        }
    }
    return result;
}

} // namespace hnmvts
