#include "bgg/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace bgg;

TEST_CASE("episode substreams are reproducible and distinct") {
    auto a = Xoshiro256pp::for_episode(42, 7);
    auto b = Xoshiro256pp::for_episode(42, 7);
    auto c = Xoshiro256pp::for_episode(42, 8);
    bool all_equal = true, any_equal_c = false;
    for (int i = 0; i < 64; ++i) {
        const auto va = a.next_u64();
        all_equal = all_equal && va == b.next_u64();
        any_equal_c = any_equal_c || va == c.next_u64();
    }
    CHECK(all_equal);
    CHECK_FALSE(any_equal_c);
}

TEST_CASE("uniforms live in [0,1)") {
    Xoshiro256pp rng(1);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

namespace {

struct Moments {
    double mean = 0.0, var = 0.0;
};

template <typename F>
Moments sample_moments(F&& draw, int n) {
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = draw();
        s += x;
        s2 += x * x;
    }
    const double mean = s / n;
    return {mean, s2 / n - mean * mean};
}

}  // namespace

TEST_CASE("exponential moments") {
    Xoshiro256pp rng(11);
    const int n = 200000;
    const auto m = sample_moments([&] { return draw_exponential(rng, 2.5); }, n);
    CHECK(m.mean == doctest::Approx(2.5).epsilon(0.02));
    CHECK(m.var == doctest::Approx(6.25).epsilon(0.05));
}

TEST_CASE("poisson moments across the algorithm switch") {
    Xoshiro256pp rng(12);
    const int n = 200000;
    for (const double mean : {0.3, 5.0, 29.5, 42.0, 150.0}) {
        const auto m = sample_moments(
            [&] { return static_cast<double>(draw_poisson(rng, mean)); }, n);
        const double tol = 4.0 * std::sqrt(mean / n);
        CHECK(std::abs(m.mean - mean) < tol);
        CHECK(m.var == doctest::Approx(mean).epsilon(0.05));
    }
}

TEST_CASE("poisson of zero mean is zero") {
    Xoshiro256pp rng(13);
    CHECK(draw_poisson(rng, 0.0) == 0);
}

TEST_CASE("gamma moments") {
    Xoshiro256pp rng(14);
    const int n = 200000;
    for (const double shape : {0.5, 1.0, 2.0, 7.5}) {
        const double scale = 1.7;
        const auto m = sample_moments([&] { return draw_gamma(rng, shape, scale); }, n);
        CHECK(m.mean == doctest::Approx(shape * scale).epsilon(0.03));
        CHECK(m.var == doctest::Approx(shape * scale * scale).epsilon(0.08));
    }
}
