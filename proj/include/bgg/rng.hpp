#pragma once
// Deterministic random number generation for the simulator.
//
// Generator: xoshiro256++ seeded through SplitMix64.  Per-episode substreams
// derive from (base_seed, episode_index), so batch estimates are identical
// for any worker count or scheduling order.  Variate algorithms are fixed:
// inversion exponentials, Knuth-product Poisson below mean 30 and Hormann
// PTRS above, Marsaglia-Tsang gamma.

#include <cstdint>

namespace bgg {

struct SplitMix64 {
    std::uint64_t state = 0;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

class Xoshiro256pp {
  public:
    explicit Xoshiro256pp(std::uint64_t seed);
    static Xoshiro256pp for_episode(std::uint64_t base_seed, std::uint64_t episode_index);

    std::uint64_t next_u64();
    double next_unit();  // uniform in [0, 1), 53-bit

  private:
    std::uint64_t s_[4];
};

double draw_exponential(Xoshiro256pp& rng, double mean);
std::int64_t draw_poisson(Xoshiro256pp& rng, double mean);
double draw_gamma(Xoshiro256pp& rng, double shape, double scale);

}  // namespace bgg
