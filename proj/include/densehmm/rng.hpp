#pragma once

#include <cstdint>
#include <random>

namespace densehmm {

/// Deterministic random source. All distributions are implemented on top of
/// the raw mt19937_64 stream, so a given seed produces the same draws on
/// every platform and compiler (std:: distribution objects do not guarantee
/// that).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1), 53 bits of entropy.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), unbiased.
    std::uint64_t uniform_int(std::uint64_t n);

    /// Standard normal via Box-Muller; second value of each pair is cached.
    double normal();

    /// Gamma(alpha, 1) via Marsaglia-Tsang squeeze; alpha > 0.
    double gamma(double alpha);

    /// Stateless seed derivation (splitmix64 of base ^ index mix) so that
    /// replica k of a run is reproducible on its own.
    static std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

private:
    std::mt19937_64 gen_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace densehmm
