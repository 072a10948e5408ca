#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hnmvts/tensor.hpp"

namespace hnmvts {

/// Counter-based generator: the i-th draw of stream (seed, stream_id) is
/// splitmix64(key + i * golden_gamma), where key mixes seed and stream id
/// through one splitmix64 finalizer. No hidden state beyond the counter, so
/// results are identical on every platform and a stream can be forked by id.
///
/// Uniforms use the top 53 bits; normals use Box-Muller on two uniforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t counter() const noexcept { return counter_; }

    std::uint64_t next_u64() noexcept;
    /// Uniform in [0, 1).
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    double normal() noexcept;
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept;

    /// Independent stream derived from this generator's seed.
    Rng fork(std::uint64_t stream) const { return Rng(seed_, stream); }

    Tensor uniform_tensor(Shape shape, double lo, double hi);
    Tensor normal_tensor(Shape shape, double stddev = 1.0);

    template <typename T>
    void shuffle(std::span<T> items) noexcept {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// The single entry point for run randomness; all stochastic choices derive from it.
inline Rng set_seed(std::uint64_t seed) { return Rng(seed); }

} // namespace hnmvts
