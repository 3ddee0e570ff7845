#include "bgg/marginals.hpp"

#include "bgg/analysis.hpp"

#include <stdexcept>

namespace bgg {

std::map<std::int64_t, double> DefectiveDistribution::conditional() const {
    if (!(total_mass > 0.0))
        throw std::logic_error("conditional view undefined: trace has no mass");
    std::map<std::int64_t, double> out;
    for (const auto& [k, v] : pmf) out[k] = v / total_mass;
    return out;
}

namespace {

AnalysisResult run_for(const NetworkParams& params, const GeometricTerms& terms,
                       double tolerance, Backend backend, bool want_pmfs, int tail_extent = -1,
                       std::vector<double> alphas = {}) {
    require_matching_terms(params, terms);
    AnalysisOptions opt;
    opt.backend = backend;
    opt.tolerance = tolerance;
    opt.tail_extent = tail_extent;
    opt.want_pmfs = want_pmfs;
    opt.alphas = std::move(alphas);
    const auto result = run_exit_analysis(params, opt);
    if (!result.series.converged)
        throw NonConvergenceError("exit-index series did not converge",
                                  result.series.truncation_error_bound);
    return result;
}

}  // namespace

double expected_exit_index(const NetworkParams& params, const GeometricTerms& terms,
                           double tolerance, Backend backend) {
    return run_for(params, terms, tolerance, backend, false).moments.exit_index_restricted;
}

DecisionMoments expected_decision_time(const NetworkParams& params, const GeometricTerms& terms,
                                       double tolerance, Backend backend) {
    return run_for(params, terms, tolerance, backend, false).moments;
}

DefectiveDistribution pmf_attacker_prev(const NetworkParams& params, const GeometricTerms& terms,
                                        double tolerance, Backend backend) {
    return run_for(params, terms, tolerance, backend, true).pmf_attacker_prev;
}

DefectiveDistribution pmf_attacker_exit(const NetworkParams& params, const GeometricTerms& terms,
                                        double tolerance, int tail_extent, Backend backend) {
    return run_for(params, terms, tolerance, backend, true, tail_extent).pmf_attacker_exit;
}

BurstProbabilities burst_probabilities(const NetworkParams& params, const GeometricTerms& terms,
                                       double alpha, double tolerance, Backend backend) {
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("burst_probabilities: alpha must be in [0, 1]");
    const auto result = run_for(params, terms, tolerance, backend, false, -1, {alpha});
    BurstProbabilities b;
    b.q0 = result.q0;
    b.q1_alpha = result.q1.at(0).q1;
    b.p_prev_below_half = result.p_prev_below_half;
    return b;
}

}  // namespace bgg
