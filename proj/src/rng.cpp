#include "bgg/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace bgg {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
    SplitMix64 sm{seed};
    for (auto& s : s_) s = sm.next();
    // An all-zero state is a fixed point; SplitMix64 cannot emit four zeros
    // from one stream, so no extra guard is needed.
}

Xoshiro256pp Xoshiro256pp::for_episode(std::uint64_t base_seed, std::uint64_t episode_index) {
    SplitMix64 sm{base_seed};
    const std::uint64_t stream = sm.next() ^ (episode_index * 0xD1B54A32D192ED03ULL);
    return Xoshiro256pp(stream + episode_index);
}

std::uint64_t Xoshiro256pp::next_u64() {
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

double Xoshiro256pp::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double draw_exponential(Xoshiro256pp& rng, double mean) {
    if (!(mean > 0.0)) return 0.0;
    // next_unit() < 1 strictly, so the log argument stays positive.
    return -mean * std::log1p(-rng.next_unit());
}

namespace {

std::int64_t poisson_knuth(Xoshiro256pp& rng, double mean) {
    const double limit = std::exp(-mean);
    double prod = rng.next_unit();
    std::int64_t k = 0;
    while (prod > limit) {
        ++k;
        prod *= rng.next_unit();
    }
    return k;
}

// Hormann (1993) PTRS transformed rejection, exact for mean >= 10.
std::int64_t poisson_ptrs(Xoshiro256pp& rng, double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.next_unit() - 0.5;
        const double v = rng.next_unit();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            k * loglam - mean - std::lgamma(k + 1.0))
            return static_cast<std::int64_t>(k);
    }
}

}  // namespace

std::int64_t draw_poisson(Xoshiro256pp& rng, double mean) {
    if (!(mean > 0.0)) return 0;
    if (mean < 30.0) return poisson_knuth(rng, mean);
    return poisson_ptrs(rng, mean);
}

double draw_gamma(Xoshiro256pp& rng, double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
        throw std::invalid_argument("draw_gamma: shape and scale must be positive");
    if (shape < 1.0) {
        // Boost to shape+1 and scale back (Marsaglia-Tsang section 6).
        const double u = rng.next_unit();
        return draw_gamma(rng, shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        // Polar Box-Muller normal from two uniforms; rejection below.
        double x;
        {
            double u1 = rng.next_unit();
            while (u1 == 0.0) u1 = rng.next_unit();
            const double u2 = rng.next_unit();
            x = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
        }
        const double v_lin = 1.0 + c * x;
        if (v_lin <= 0.0) continue;
        const double v = v_lin * v_lin * v_lin;
        const double u = rng.next_unit();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
}

}  // namespace bgg
