#include "bgg/model.hpp"

#include <cmath>
#include <stdexcept>

namespace bgg {

std::int64_t majority_threshold(std::int64_t total_nodes) {
    return (total_nodes + 1) / 2;
}

std::int64_t raised_threshold(std::int64_t total_nodes, double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("raised_threshold: alpha must be >= 0");
    const double raw = static_cast<double>(total_nodes) * (1.0 + alpha) / 2.0;
    // 1e-9 absolute guard: grid alphas such as 0.1 produce values like
    // 11.000000000000002 that must floor back to the intended integer.
    const auto t = static_cast<std::int64_t>(std::ceil(raw - 1e-9));
    return t < majority_threshold(total_nodes) ? majority_threshold(total_nodes) : t;
}

namespace {

void geometric_pair(double mean_times_rate, double& beta, double& alpha) {
    beta = 1.0 / (1.0 + mean_times_rate);
    alpha = mean_times_rate / (1.0 + mean_times_rate);
}

}  // namespace

GeometricTerms derive_geometric_terms(const NetworkParams& params) {
    const auto check = validate(params);
    if (!check.ok()) {
        std::string msg = "derive_geometric_terms: invalid params:";
        for (const auto& v : check.violations) msg += " " + v + ";";
        throw std::invalid_argument(msg);
    }
    GeometricTerms t;
    geometric_pair(params.mean_initial_observation * params.lambda_attacker, t.beta_A0, t.alpha_A0);
    geometric_pair(params.mean_observation_gap * params.lambda_attacker, t.beta_A, t.alpha_A);
    geometric_pair(params.mean_initial_observation * params.lambda_honest, t.beta_H0, t.alpha_H0);
    geometric_pair(params.mean_observation_gap * params.lambda_honest, t.beta_H, t.alpha_H);
    return t;
}

void require_matching_terms(const NetworkParams& params, const GeometricTerms& terms) {
    const GeometricTerms expect = derive_geometric_terms(params);
    const double eps = 1e-9;
    if (std::abs(expect.alpha_A - terms.alpha_A) > eps ||
        std::abs(expect.alpha_H - terms.alpha_H) > eps ||
        std::abs(expect.alpha_A0 - terms.alpha_A0) > eps ||
        std::abs(expect.alpha_H0 - terms.alpha_H0) > eps)
        throw std::invalid_argument("geometric terms do not match the network parameters");
}

std::vector<double> AlphaGrid::values() const {
    std::vector<double> out;
    if (step <= 0.0 || max < min) return out;
    const auto count = static_cast<std::int64_t>(std::floor((max - min) / step + 1e-9)) + 1;
    out.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) out.push_back(min + static_cast<double>(i) * step);
    return out;
}

ValidationResult validate(const NetworkParams& params) {
    ValidationResult r;
    if (params.total_nodes < 2) r.violations.push_back("total_nodes below minimum (need M >= 2)");
    if (!(params.mean_initial_observation > 0.0))
        r.violations.push_back("initial observation mean must be positive");
    if (!(params.mean_observation_gap > 0.0))
        r.violations.push_back("observation gap must be positive");
    if (params.lambda_attacker < 0.0) r.violations.push_back("attacker rate must be nonnegative");
    if (params.lambda_honest < 0.0) r.violations.push_back("honest rate must be nonnegative");
    if (params.lambda_attacker == 0.0 && params.lambda_honest == 0.0)
        r.violations.push_back("attacker and honest rates cannot both be zero");
    if (!std::isfinite(params.lambda_attacker) || !std::isfinite(params.lambda_honest) ||
        !std::isfinite(params.mean_initial_observation) || !std::isfinite(params.mean_observation_gap))
        r.violations.push_back("parameters must be finite");
    return r;
}

ValidationResult validate(const NetworkParams& params, const CostParams& cost) {
    ValidationResult r = validate(params);
    if (cost.token_value < 0.0) r.violations.push_back("token value must be nonnegative");
    if (cost.node_reserve_unit_cost < 0.0)
        r.violations.push_back("node reserve unit cost must be nonnegative");
    if (!(cost.alpha_grid.step > 0.0)) r.violations.push_back("alpha grid step must be positive");
    if (cost.alpha_grid.min < 0.0 || cost.alpha_grid.max > 1.0 ||
        !(cost.alpha_grid.min < cost.alpha_grid.max))
        r.violations.push_back("alpha grid must satisfy 0 <= min < max <= 1");
    if (cost.alpha_grid.values().empty()) r.violations.push_back("alpha grid is empty");
    return r;
}

NetworkParams calibrate_network(const CalibrationInput& in, std::vector<std::string>* errors) {
    std::vector<std::string> local;
    std::vector<std::string>& errs = errors ? *errors : local;

    const bool fix_attacker = in.fixed_lambda_attacker >= 0.0;
    const bool fix_honest = in.fixed_lambda_honest >= 0.0;
    if (fix_attacker == fix_honest)
        errs.push_back("calibration requires exactly one fixed rate");
    if (in.target_initial_attacker_blocks < 0.0)
        errs.push_back("target initial attacker blocks must be nonnegative");
    if (in.target_initial_honest_blocks < 0.0)
        errs.push_back("target initial honest blocks must be nonnegative");
    if (!(in.mean_observation_gap > 0.0)) errs.push_back("observation gap must be positive");

    NetworkParams p;
    p.total_nodes = in.total_nodes;
    p.mean_observation_gap = in.mean_observation_gap;
    if (!errs.empty()) return p;

    // The fixed rate and its target pin the initial observation mean; the
    // other target then pins the remaining rate.
    if (fix_attacker) {
        p.lambda_attacker = in.fixed_lambda_attacker;
        if (!(p.lambda_attacker > 0.0) || !(in.target_initial_attacker_blocks > 0.0)) {
            errs.push_back("calibration needs a positive fixed rate and a positive matching target");
            return p;
        }
        p.mean_initial_observation = in.target_initial_attacker_blocks / p.lambda_attacker;
        p.lambda_honest = in.target_initial_honest_blocks / p.mean_initial_observation;
    } else {
        p.lambda_honest = in.fixed_lambda_honest;
        if (!(p.lambda_honest > 0.0) || !(in.target_initial_honest_blocks > 0.0)) {
            errs.push_back("calibration needs a positive fixed rate and a positive matching target");
            return p;
        }
        p.mean_initial_observation = in.target_initial_honest_blocks / p.lambda_honest;
        p.lambda_attacker = in.target_initial_attacker_blocks / p.mean_initial_observation;
    }
    const auto check = validate(p);
    for (const auto& v : check.violations) errs.push_back("calibrated configuration invalid: " + v);
    return p;
}

}  // namespace bgg
