#pragma once
// Decision quantities on the attacker-wins trace: the exit-index mean, the
// decision time, the block-count laws at and one step before the crossing,
// and the burst probabilities.

#include "bgg/fluctuation.hpp"
#include "bgg/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace bgg {

// PMF restricted to the attacker-wins trace; total mass is the trace
// probability, not 1.  Mass beyond the tabulated support is lumped.
struct DefectiveDistribution {
    std::map<std::int64_t, double> pmf;
    double total_mass = 0.0;
    double lump_mass = 0.0;
    std::int64_t lump_start = -1;  // first count covered by the lump; -1 if none
    std::string support_note;

    // pmf / total_mass; throws when the trace has no mass.
    std::map<std::int64_t, double> conditional() const;
};

struct DecisionMoments {
    double exit_index_restricted = 0.0;     // E[nu; nu < mu]
    double decision_time_restricted = 0.0;  // composed: d0 + d*(E_r[nu] - 1)
    std::optional<double> exit_index_conditional;     // E[nu | nu < mu]
    std::optional<double> decision_time_conditional;  // composed from the conditional mean
};

double expected_exit_index(const NetworkParams& params, const GeometricTerms& terms,
                           double tolerance, Backend backend = Backend::kAuto);

DecisionMoments expected_decision_time(const NetworkParams& params, const GeometricTerms& terms,
                                       double tolerance, Backend backend = Backend::kAuto);

DefectiveDistribution pmf_attacker_prev(const NetworkParams& params, const GeometricTerms& terms,
                                        double tolerance, Backend backend = Backend::kAuto);

DefectiveDistribution pmf_attacker_exit(const NetworkParams& params, const GeometricTerms& terms,
                                        double tolerance, int tail_extent,
                                        Backend backend = Backend::kAuto);

struct BurstProbabilities {
    double q0 = 0.0;       // P{A_nu >= threshold, nu < mu} = trace mass
    double q1_alpha = 0.0; // same with the threshold raised by alpha reserves
    double p_prev_below_half = 0.0;  // P{A_{nu-1} < threshold, nu < mu}
};

BurstProbabilities burst_probabilities(const NetworkParams& params, const GeometricTerms& terms,
                                       double alpha, double tolerance,
                                       Backend backend = Backend::kAuto);

}  // namespace bgg
