#include "bgg/game.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bgg;

TEST_CASE("cost_no_action") {
    CHECK(cost_no_action(2e6, 0.05) == doctest::Approx(100000.0));
    CHECK(cost_no_action(2e6, 0.0) == 0.0);
    CHECK(cost_no_action(2e6, 1.0) == doctest::Approx(2e6));
}

TEST_CASE("cost_action hand values and algebraic identity") {
    CHECK(cost_action(4750.0, 2e6, 0.01) == doctest::Approx(24750.0).epsilon(1e-12));
    CHECK(cost_action(4750.0, 2e6, 0.0) == doctest::Approx(4750.0));
    CHECK(cost_action(4750.0, 2e6, 1.0) == doctest::Approx(4750.0 + 2e6));

    std::mt19937_64 gen(404);
    std::uniform_real_distribution<double> cost(0.0, 1e7), prob(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double c = cost(gen), b = cost(gen), q = prob(gen);
        const double split = cost_action(c, b, q);
        const double collapsed = c + b * q;
        CHECK(split == doctest::Approx(collapsed).epsilon(1e-9));
    }
}

TEST_CASE("total_cost reductions and the hand value") {
    CHECK(total_cost(0.05, 0.01, 1.0, 4750.0, 2e6) ==
          doctest::Approx(cost_action(4750.0, 2e6, 0.01)).epsilon(1e-12));
    CHECK(total_cost(0.05, 0.01, 0.0, 4750.0, 2e6) ==
          doctest::Approx(cost_no_action(2e6, 0.05)).epsilon(1e-12));
    CHECK(total_cost(0.05, 0.01, 0.9, 4750.0, 2e6) ==
          doctest::Approx(32275.0).epsilon(1e-12));
}

TEST_CASE("total_cost is monotone in each argument") {
    std::mt19937_64 gen(505);
    std::uniform_real_distribution<double> prob(0.0, 1.0), cost(0.0, 1e6);
    for (int i = 0; i < 2000; ++i) {
        const double q0 = prob(gen), q1 = prob(gen), p = prob(gen);
        const double c = cost(gen), b = cost(gen);
        const double base = total_cost(q0, q1, p, c, b);
        CHECK(total_cost(std::min(1.0, q0 + 0.05), q1, p, c, b) >= base - 1e-9);
        CHECK(total_cost(q0, std::min(1.0, q1 + 0.05), p, c, b) >= base - 1e-9);
        CHECK(total_cost(q0, q1, p, c + 100.0, b) >= base - 1e-9);
        // Token value scales both burst branches upward.
        CHECK(total_cost(q0, q1, p, c, b * 1.1) >= base - 1e-9);
    }
}

namespace {

GovernanceInputs demo_inputs(double q0, double p_prev) {
    GovernanceInputs in;
    in.token_value = 2e6;
    in.node_reserve_unit_cost = 0.5;
    in.total_nodes = 100000;
    in.q0 = q0;
    in.p_prev_below_half = p_prev;
    return in;
}

std::vector<double> grid_0_to(double max, double step) {
    std::vector<double> g;
    for (double a = 0.0; a <= max + 1e-12; a += step) g.push_back(a);
    return g;
}

}  // namespace

TEST_CASE("useless reserves mean no action") {
    const auto grid = grid_0_to(0.2, 0.01);
    std::vector<double> q1(grid.size(), 0.05);  // q1 == q0 for every alpha
    const auto rep = optimal_alpha(demo_inputs(0.05, 0.9), grid, q1);
    CHECK(rep.no_action_justified);
    CHECK(rep.alpha_star == 0.0);
    CHECK(rep.strategy == "DoNothing");
    CHECK_FALSE(rep.alpha_first_feasible.has_value());
}

TEST_CASE("zero token value means nothing to protect") {
    const auto grid = grid_0_to(0.2, 0.01);
    std::vector<double> q1(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) q1[i] = 0.05 * std::exp(-3.0 * grid[i]);
    auto in = demo_inputs(0.05, 0.9);
    in.token_value = 0.0;
    const auto rep = optimal_alpha(in, grid, q1);
    CHECK(rep.no_action_justified);
    CHECK(rep.alpha_star == 0.0);
}

TEST_CASE("interior optimum with a decaying burst model") {
    // q1(alpha) = q0*exp(-49.5*alpha) with p_prev = 0.5 dips near alpha 0.095.
    const auto grid = grid_0_to(0.2, 0.005);
    std::vector<double> q1(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) q1[i] = 0.056 * std::exp(-49.5 * grid[i]);
    const auto rep = optimal_alpha(demo_inputs(0.056, 0.5), grid, q1);
    CHECK_FALSE(rep.no_action_justified);
    CHECK(rep.alpha_star == doctest::Approx(0.095).epsilon(1e-12));
    CHECK(rep.alpha_star > grid.front());
    CHECK(rep.alpha_star < grid.back());
    CHECK(rep.strategy == "Action");

    // The grid argmin computed independently matches the report.
    std::size_t best = 0;
    double best_cost = 1e300;
    for (std::size_t i = 1; i < grid.size(); ++i) {  // action candidates: alpha > 0
        const double c_alpha = 0.5 * grid[i] * 100000.0;
        const double cost = total_cost(0.056, q1[i], 0.5, c_alpha, 2e6);
        if (cost < best_cost) {
            best_cost = cost;
            best = i;
        }
    }
    CHECK(rep.alpha_star == doctest::Approx(grid[best]));
    CHECK(rep.alpha_star_cost == doctest::Approx(best_cost).epsilon(1e-12));
}

TEST_CASE("ties break toward the smallest alpha") {
    const std::vector<double> grid{0.0, 0.1, 0.2};
    auto in = demo_inputs(0.5, 1.0);
    in.node_reserve_unit_cost = 0.0;        // c_alpha = 0 everywhere
    std::vector<double> q1{0.5, 0.2, 0.2};  // equal minimum at 0.1 and 0.2
    const auto rep = optimal_alpha(in, grid, q1);
    CHECK(rep.alpha_star == doctest::Approx(0.1));
}
