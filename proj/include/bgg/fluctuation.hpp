#pragma once
// Exit-index analysis of the two-player block race: the defective law of the
// epoch at which the attacker first reaches the majority threshold strictly
// before the honest side does.

#include "bgg/model.hpp"

#include <stdexcept>
#include <vector>

namespace bgg {

enum class Backend {
    kAuto,        // factorized
    kDense,       // bivariate coefficient grids, box partial sums (oracle)
    kFactorized,  // total-arrivals law + binomial thinning, O(threshold) per term
};

struct ExitIndexSeries {
    std::vector<double> p;  // p[n] = P{nu = n, nu < mu}, n = 0..terms-1
    // Certified bound on the omitted tail Sum_{n >= terms} p[n]: the exact
    // probability that neither player has crossed at the last computed epoch.
    double truncation_error_bound = 0.0;
    bool converged = false;
    double total_mass = 0.0;  // Sum of the stored p[n]
};

class NonConvergenceError : public std::runtime_error {
  public:
    NonConvergenceError(const std::string& what, double bound)
        : std::runtime_error(what), remainder_bound(bound) {}
    double remainder_bound = 0.0;
};

ExitIndexSeries exit_index_series(const NetworkParams& params, const GeometricTerms& terms,
                                  int max_terms, double tolerance,
                                  Backend backend = Backend::kAuto);

// P{nu < mu} = total mass of the exit-index series.  Throws
// NonConvergenceError when the series bound cannot be driven below tolerance.
double prob_attacker_wins(const NetworkParams& params, const GeometricTerms& terms,
                          double tolerance = 1e-12, Backend backend = Backend::kAuto);

}  // namespace bgg
