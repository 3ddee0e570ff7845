#pragma once
// Defender cost layer: burst-cost functions over the reserve fraction grid
// and the optimal reserve fraction.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bgg {

// Expected cost of doing nothing: the token value times the burst probability.
double cost_no_action(double token_value, double q0);

// Expected cost of reserving nodes: c_alpha*(1-q1) + (c_alpha+B)*q1, which
// collapses to c_alpha + B*q1.
double cost_action(double c_alpha, double token_value, double q1);

// Expected total cost when the action is only available while the attacker
// is still below threshold one epoch before crossing.
double total_cost(double q0, double q1_alpha, double p_prev_below_half, double c_alpha,
                  double token_value);

struct CostCurvePoint {
    double alpha = 0.0;
    double c_alpha = 0.0;
    double q1_alpha = 0.0;
    double cost_action = 0.0;
    double cost_no_action = 0.0;
    double cost_total = 0.0;
    bool feasible = false;           // cost_no_action >= cost_action at this alpha
    bool reserve_bound_ok = false;   // alpha*(B*q0 - c_alpha) >= c_alpha
};

struct GovernanceInputs {
    double token_value = 0.0;
    double node_reserve_unit_cost = 0.0;
    std::int64_t total_nodes = 0;
    double q0 = 0.0;
    double p_prev_below_half = 0.0;
};

struct GovernanceReport {
    double q0 = 0.0;
    double p_prev_below_half = 0.0;
    std::vector<CostCurvePoint> curve;

    double alpha_star = 0.0;       // cost-minimizing feasible alpha (> 0), or 0
    double alpha_star_cost = 0.0;
    bool no_action_justified = false;
    std::string strategy;          // "Action" or "DoNothing"

    std::optional<double> alpha_first_feasible;  // smallest alpha > 0 with
                                                 // cost_no_action >= cost_action
    double alpha_unconstrained = 0.0;            // grid argmin ignoring feasibility
    bool constraint_binding = false;             // feasibility moved the argmin
    std::optional<double> decision_time;         // conditional decision epoch time
};

// Grid search of the total cost.  q1_by_alpha[i] pairs with alpha_grid[i];
// the provider may be the analytic marginals, simulator estimates, or an
// injected model.  Ties break toward the smallest alpha.
GovernanceReport optimal_alpha(const GovernanceInputs& in, const std::vector<double>& alpha_grid,
                               const std::vector<double>& q1_by_alpha,
                               std::optional<double> decision_time = std::nullopt);

}  // namespace bgg
