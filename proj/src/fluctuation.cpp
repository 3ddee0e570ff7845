#include "bgg/fluctuation.hpp"

#include "bgg/analysis.hpp"

namespace bgg {

namespace {

AnalysisOptions series_options(int max_terms, double tolerance, Backend backend) {
    AnalysisOptions opt;
    opt.backend = backend;
    opt.tolerance = tolerance;
    opt.max_terms = max_terms;
    opt.want_pmfs = false;
    return opt;
}

}  // namespace

ExitIndexSeries exit_index_series(const NetworkParams& params, const GeometricTerms& terms,
                                  int max_terms, double tolerance, Backend backend) {
    require_matching_terms(params, terms);
    return run_exit_analysis(params, series_options(max_terms, tolerance, backend)).series;
}

double prob_attacker_wins(const NetworkParams& params, const GeometricTerms& terms,
                          double tolerance, Backend backend) {
    require_matching_terms(params, terms);
    const auto result = run_exit_analysis(params, series_options(200000, tolerance, backend));
    if (!result.series.converged)
        throw NonConvergenceError("exit-index series did not converge",
                                  result.series.truncation_error_bound);
    return result.p_win;
}

}  // namespace bgg
