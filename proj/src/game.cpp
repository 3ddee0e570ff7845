#include "bgg/game.hpp"

#include <cmath>
#include <stdexcept>

namespace bgg {

double cost_no_action(double token_value, double q0) { return token_value * q0; }

double cost_action(double c_alpha, double token_value, double q1) {
    return c_alpha * (1.0 - q1) + (c_alpha + token_value) * q1;
}

double total_cost(double q0, double q1_alpha, double p_prev_below_half, double c_alpha,
                  double token_value) {
    return cost_action(c_alpha, token_value, q1_alpha) * p_prev_below_half +
           cost_no_action(token_value, q0) * (1.0 - p_prev_below_half);
}

GovernanceReport optimal_alpha(const GovernanceInputs& in, const std::vector<double>& alpha_grid,
                               const std::vector<double>& q1_by_alpha,
                               std::optional<double> decision_time) {
    if (alpha_grid.empty()) throw std::invalid_argument("optimal_alpha: empty alpha grid");
    if (alpha_grid.size() != q1_by_alpha.size())
        throw std::invalid_argument("optimal_alpha: alpha grid and q1 values differ in length");

    GovernanceReport rep;
    rep.q0 = in.q0;
    rep.p_prev_below_half = in.p_prev_below_half;
    rep.decision_time = decision_time;

    const double no_action = cost_no_action(in.token_value, in.q0);
    const double m = static_cast<double>(in.total_nodes);

    std::size_t best_feasible = alpha_grid.size();  // among alpha > 0 and feasible
    std::size_t best_any = 0;
    for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
        CostCurvePoint pt;
        pt.alpha = alpha_grid[i];
        pt.c_alpha = in.node_reserve_unit_cost * pt.alpha * m;
        pt.q1_alpha = q1_by_alpha[i];
        pt.cost_action = cost_action(pt.c_alpha, in.token_value, pt.q1_alpha);
        pt.cost_no_action = no_action;
        pt.cost_total =
            total_cost(in.q0, pt.q1_alpha, in.p_prev_below_half, pt.c_alpha, in.token_value);
        pt.feasible = no_action >= pt.cost_action;
        // Reserve-bound constraint with c_alpha on both sides, evaluated
        // pointwise in its product form to avoid sign traps.
        pt.reserve_bound_ok = pt.alpha * (in.token_value * in.q0 - pt.c_alpha) >= pt.c_alpha;
        rep.curve.push_back(pt);

        if (pt.cost_total < rep.curve[best_any].cost_total) best_any = i;
        if (pt.alpha > 0.0 && pt.feasible) {
            if (!rep.alpha_first_feasible) rep.alpha_first_feasible = pt.alpha;
            if (best_feasible == alpha_grid.size() ||
                pt.cost_total < rep.curve[best_feasible].cost_total)
                best_feasible = i;
        }
    }
    rep.alpha_unconstrained = rep.curve[best_any].alpha;

    if (best_feasible == alpha_grid.size()) {
        rep.no_action_justified = true;
        rep.strategy = "DoNothing";
        rep.alpha_star = 0.0;
        rep.alpha_star_cost = no_action;
        rep.constraint_binding = rep.curve[best_any].alpha > 0.0;
    } else {
        rep.strategy = "Action";
        rep.alpha_star = rep.curve[best_feasible].alpha;
        rep.alpha_star_cost = rep.curve[best_feasible].cost_total;
        rep.constraint_binding = best_feasible != best_any;
    }
    return rep;
}

}  // namespace bgg
