#include "bgg/series.hpp"

#include <cmath>
#include <stdexcept>

namespace bgg {

GeometricPGF geometric_pgf(double beta, double alpha_) {
    if (!(beta > 0.0) || beta > 1.0 || alpha_ < 0.0 || alpha_ >= 1.0 ||
        std::abs(beta + alpha_ - 1.0) > 1e-12)
        throw std::invalid_argument("geometric_pgf: need beta in (0,1], alpha_ in [0,1), beta+alpha_=1");
    return GeometricPGF{beta, alpha_};
}

PowerSeries nb_power_coefficients(const GeometricPGF& pgf, std::int64_t n, std::size_t length) {
    if (n < 1) throw std::invalid_argument("nb_power_coefficients: n must be >= 1");
    PowerSeries out;
    out.coefficients.resize(length, 0.0);
    if (length == 0) return out;
    double term = std::pow(pgf.beta, static_cast<double>(n));
    out.coefficients[0] = term;
    for (std::size_t k = 0; k + 1 < length; ++k) {
        term *= pgf.alpha_ * (static_cast<double>(n) + static_cast<double>(k)) /
                (static_cast<double>(k) + 1.0);
        out.coefficients[k + 1] = term;
    }
    if (pgf.alpha_ == 0.0) out.tail_is_zero = true;  // mass entirely at 0
    return out;
}

PowerSeries geometric_coefficients(const GeometricPGF& pgf, std::size_t length) {
    return nb_power_coefficients(pgf, 1, length);
}

PowerSeries convolve(const PowerSeries& a, const PowerSeries& b, std::size_t length) {
    PowerSeries out;
    out.coefficients.resize(length, 0.0);
    out.tail_is_zero = a.tail_is_zero && b.tail_is_zero &&
                       a.length() + b.length() <= length + 1;
    const std::size_t na = std::min(a.length(), length);
    for (std::size_t i = 0; i < na; ++i) {
        const double ai = a.coefficients[i];
        if (ai == 0.0) continue;
        const std::size_t nb = std::min(b.length(), length - i);
        for (std::size_t j = 0; j < nb; ++j)
            out.coefficients[i + j] += ai * b.coefficients[j];
    }
    return out;
}

PowerSeries convolve_geometric(const PowerSeries& a, const GeometricPGF& pgf, std::size_t length) {
    PowerSeries out;
    out.coefficients.resize(length, 0.0);
    double prev = 0.0;
    for (std::size_t k = 0; k < length; ++k) {
        const double ak = k < a.length() ? a.coefficients[k] : 0.0;
        prev = pgf.beta * ak + pgf.alpha_ * prev;
        out.coefficients[k] = prev;
    }
    return out;
}

double partial_sum(const PowerSeries& series, std::size_t m) {
    if (m + 1 > series.length() && !series.tail_is_zero)
        throw std::invalid_argument("partial_sum: index past stored length with unknown tail");
    KahanSum acc;
    const std::size_t stop = std::min(m + 1, series.length());
    for (std::size_t k = 0; k < stop; ++k) acc.add(series.coefficients[k]);
    return acc.value();
}

}  // namespace bgg
