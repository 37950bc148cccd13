// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "pointmatch/linalg.hpp"

namespace pointmatch {

/// xoshiro256++ with splitmix64 seeding. Distributions are implemented here
/// rather than taken from <random> so that a (seed, stream) pair produces the
/// same draws on every standard library. Each chain owns one stream; derived
/// streams are independent for distinct ids.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Deterministic independent stream keyed on (base seed, id).
    Rng derive(std::uint64_t stream_id) const;

    std::uint64_t next_u64();

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform01();
    /// Uniform on [a, b).
    double uniform(double a, double b);
    /// Uniform integer in [0, n), n >= 1.
    std::uint64_t uniform_int(std::uint64_t n);
    bool bernoulli(double p);

    /// Standard normal via Box-Muller (no cached spare).
    double normal();
    double normal(double mean, double sd);
    Vec3 normal3(const Vec3& mean, double sd);

    /// Gamma(shape, rate), Marsaglia-Tsang.
    double gamma(double shape, double rate);

    std::uint64_t base_seed() const { return base_seed_; }

private:
    std::uint64_t s_[4];
    std::uint64_t base_seed_;
};

}  // namespace pointmatch
