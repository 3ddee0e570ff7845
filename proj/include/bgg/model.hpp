#pragma once
// Model parameters for the attacker/honest block race and the memoryless
// (exponential observation) geometric constants derived from them.

#include <cstdint>
#include <string>
#include <vector>

namespace bgg {

struct NetworkParams {
    std::int64_t total_nodes = 0;           // M, nodes/ledgers in the network
    double lambda_attacker = 0.0;           // attacker block rate per unit time
    double lambda_honest = 0.0;             // honest block rate per unit time
    double mean_initial_observation = 0.0;  // mean of tau_0
    double mean_observation_gap = 0.0;      // mean of the gaps tau_k - tau_{k-1}

    bool operator==(const NetworkParams&) const = default;
};

// The race is to ceil(M/2) cumulative blocks ("at least half").
std::int64_t majority_threshold(std::int64_t total_nodes);

// Threshold after reserving a fraction alpha of additional nodes:
// ceil(M*(1+alpha)/2).  Guarded against binary rounding so grid values like
// alpha = 0.1 that make M*(1+alpha)/2 an exact integer are not bumped up.
std::int64_t raised_threshold(std::int64_t total_nodes, double alpha);

// The eight memoryless constants.  Each (beta, alpha) pair is a geometric
// law on {0,1,...}: mass at k equals beta * alpha^k, and beta + alpha = 1.
struct GeometricTerms {
    double beta_A0 = 1.0, alpha_A0 = 0.0;  // attacker blocks over [0, tau_0]
    double beta_A = 1.0, alpha_A = 0.0;    // attacker blocks per gap
    double beta_H0 = 1.0, alpha_H0 = 0.0;
    double beta_H = 1.0, alpha_H = 0.0;
};

GeometricTerms derive_geometric_terms(const NetworkParams& params);

// The geometric constants are derived state; operations taking both reject
// pairs that do not belong together so mixed-up call sites fail loudly.
void require_matching_terms(const NetworkParams& params, const GeometricTerms& terms);

struct AlphaGrid {
    double min = 0.0, max = 0.0, step = 0.0;
    std::vector<double> values() const;
};

struct CostParams {
    double token_value = 0.0;             // B, total token value at stake
    double node_reserve_unit_cost = 0.0;  // c, per node; c_alpha = c*alpha*M
    AlphaGrid alpha_grid;
};

struct ValidationResult {
    std::vector<std::string> violations;  // every violated invariant, not just the first
    bool ok() const { return violations.empty(); }
};

ValidationResult validate(const NetworkParams& params);
ValidationResult validate(const NetworkParams& params, const CostParams& cost);

// Calibration: meet target initial block means E[A0], E[H0] with one rate
// fixed, solving for the initial observation mean and the other rate.
struct CalibrationInput {
    std::int64_t total_nodes = 0;
    double target_initial_attacker_blocks = 0.0;  // E[A0]
    double target_initial_honest_blocks = 0.0;    // E[H0]
    double fixed_lambda_attacker = -1.0;          // exactly one of these is >= 0
    double fixed_lambda_honest = -1.0;
    double mean_observation_gap = 0.0;
};

NetworkParams calibrate_network(const CalibrationInput& in,
                                std::vector<std::string>* errors = nullptr);

}  // namespace bgg
