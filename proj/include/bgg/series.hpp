#pragma once
// Truncated nonnegative power series and the coefficient partial-sum
// functional used by the first-passage computations.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace bgg {

struct PowerSeries {
    std::vector<double> coefficients;  // index = degree
    // True when coefficients beyond size() are exactly zero (e.g. finite
    // polynomials); truncated PGF expansions leave this false so that sums
    // past the stored length fail loudly instead of silently dropping tail.
    bool tail_is_zero = false;

    std::size_t length() const { return coefficients.size(); }
};

// gamma(u) = beta / (1 - alpha_ * u); coefficient k equals beta * alpha_^k.
struct GeometricPGF {
    double beta = 1.0;    // in (0, 1]
    double alpha_ = 0.0;  // in [0, 1); beta + alpha_ == 1
};

GeometricPGF geometric_pgf(double beta, double alpha_);

// First `length` coefficients of gamma(u)^n: beta^n * C(n+k-1, k) * alpha_^k,
// via the forward recursion term_{k+1} = term_k * alpha_ * (n+k) / (k+1).
// For extreme n the leading beta^n can underflow; results then flush to zero
// silently (they are genuinely below the smallest normal probability).
PowerSeries nb_power_coefficients(const GeometricPGF& pgf, std::int64_t n, std::size_t length);

PowerSeries geometric_coefficients(const GeometricPGF& pgf, std::size_t length);

// Cauchy product truncated at degree `length - 1`.
PowerSeries convolve(const PowerSeries& a, const PowerSeries& b, std::size_t length);

// One-pass recursive filter equal to convolve(a, geometric, length).
PowerSeries convolve_geometric(const PowerSeries& a, const GeometricPGF& pgf, std::size_t length);

// Sum of coefficients 0..m (compensated summation).  Throws when m reaches
// past the stored length and the tail is not known to be zero.
double partial_sum(const PowerSeries& series, std::size_t m);

// Neumaier-compensated accumulator for long fixed-order reductions.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            carry += (sum - t) + x;
        else
            carry += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + carry; }
};

}  // namespace bgg
