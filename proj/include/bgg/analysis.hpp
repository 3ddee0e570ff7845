#pragma once
// Single-pass engine behind the fluctuation and marginal operations.  Both
// backends evaluate the same first-passage functional:
//
//   dense      — full bivariate coefficient grids of the increment
//                transforms, evolved by rational-series division, with box
//                partial sums; the brute-force oracle;
//   factorized — the per-epoch expansion of the same functional through the
//                law of total arrivals plus binomial thinning of marks,
//                O(threshold) per epoch after O(threshold^2) setup.
//
// Hopeless races (attacker share so small that the win probability is
// certifiably below tolerance) are short-circuited via a thinning bound that
// holds for any observation law: P{win} <= P{Binomial(2T-1, rho) >= T}.

#include "bgg/fluctuation.hpp"
#include "bgg/marginals.hpp"
#include "bgg/model.hpp"

#include <cstdint>
#include <vector>

namespace bgg {

struct AnalysisOptions {
    Backend backend = Backend::kAuto;
    double tolerance = 1e-12;
    int max_terms = 200000;
    int tail_extent = -1;          // -1: automatic (smallest with lump < tolerance, capped)
    std::vector<double> alphas;    // reserve fractions for q1
    bool want_pmfs = true;

    // Capacity limits; thresholds beyond these fail with NonConvergenceError
    // unless the hopeless-race bound applies first.
    std::int64_t dense_threshold_cap = 600;
    std::int64_t factorized_threshold_cap = 1200;
};

struct BurstAlphaPoint {
    double alpha = 0.0;
    std::int64_t threshold = 0;
    double q1 = 0.0;
};

struct AnalysisResult {
    NetworkParams params;
    Backend backend_used = Backend::kFactorized;

    ExitIndexSeries series;
    double p_win = 0.0;  // = q0 = trace mass

    DecisionMoments moments;
    double e_nu_tail_bound = 0.0;  // estimated remainder of Sum n*p[n]

    DefectiveDistribution pmf_attacker_prev;
    DefectiveDistribution pmf_attacker_exit;

    double q0 = 0.0;
    std::vector<BurstAlphaPoint> q1;
    double p_prev_below_half = 0.0;

    bool hopeless_shortcut = false;  // certified-negligible race, series skipped
    double hopeless_bound = 0.0;
    int terms_used = 0;
};

AnalysisResult run_exit_analysis(const NetworkParams& params, const AnalysisOptions& options);

}  // namespace bgg
