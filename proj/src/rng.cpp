// SPDX-License-Identifier: Apache-2.0

#include "pointmatch/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace pointmatch {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) : base_seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
}

Rng Rng::derive(std::uint64_t stream_id) const {
    // mix the stream id through splitmix before combining so that nearby ids
    // land far apart in seed space
    std::uint64_t sm = stream_id ^ 0xa3c59ac2f1ef8bd1ULL;
    return Rng(base_seed_ ^ splitmix64(sm));
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double a, double b) { return a + (b - a) * uniform01(); }

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    // fixed-point multiply; bias is O(n / 2^64), irrelevant at our ranges
    return std::uint64_t((static_cast<__uint128_t>(next_u64()) * n) >> 64);
}

bool Rng::bernoulli(double p) { return uniform01() < p; }

double Rng::normal() {
    // u1 in (0, 1] so the log is finite
    const double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double Rng::normal(double mean, double sd) { return mean + sd * normal(); }

Vec3 Rng::normal3(const Vec3& mean, double sd) {
    return {mean.x + sd * normal(), mean.y + sd * normal(), mean.z + sd * normal()};
}

double Rng::gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw std::invalid_argument("Rng::gamma: shape and rate must be positive");
    if (shape < 1.0) {
        // boost: X ~ Gamma(shape+1) * U^{1/shape}
        const double u = uniform01();
        return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
}

}  // namespace pointmatch
