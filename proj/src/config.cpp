#include "bgg/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace bgg {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size() && std::isfinite(out);
    } catch (...) {
        return false;
    }
}

bool parse_int(const std::string& s, std::int64_t& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [p, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && p == end;
}

struct RawEntry {
    std::string value;
    int line = 0;
};

}  // namespace

ParseResult parse_config(const std::string& text) {
    ParseResult result;
    auto& errors = result.errors;

    std::map<std::string, RawEntry> entries;
    {
        std::istringstream in(text);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string stripped = trim(line);
            if (stripped.empty() || stripped[0] == '#') continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos) {
                errors.push_back({line_no, "expected 'section.key = value'"});
                continue;
            }
            const std::string key = trim(stripped.substr(0, eq));
            const std::string value = trim(stripped.substr(eq + 1));
            if (key.empty() || key.find('.') == std::string::npos) {
                errors.push_back({line_no, "key must be of the form section.key"});
                continue;
            }
            if (entries.count(key)) {
                errors.push_back({line_no, "duplicate key '" + key + "'"});
                continue;
            }
            entries[key] = {value, line_no};
        }
    }

    const std::set<std::string> known = {
        "network.total_nodes",
        "network.lambda_attacker",
        "network.lambda_honest",
        "network.mean_initial_observation",
        "network.mean_observation_gap",
        "network.target_initial_attacker_blocks",
        "network.target_initial_honest_blocks",
        "cost.token_value",
        "cost.node_reserve_unit_cost",
        "cost.alpha_min",
        "cost.alpha_max",
        "cost.alpha_step",
        "compute.backend",
        "compute.tolerance",
        "compute.max_terms",
        "compute.tail_extent",
        "simulation.episodes",
        "simulation.base_seed",
        "simulation.max_observations",
        "simulation.threads",
        "simulation.gap_law",
        "simulation.gamma_shape",
        "game.q_source",
        "game.injected_q0",
        "game.injected_decay",
        "game.injected_p_prev",
    };
    for (const auto& [key, entry] : entries)
        if (!known.count(key))
            errors.push_back({entry.line, "unknown key '" + key + "'"});

    auto have = [&](const std::string& key) { return entries.count(key) != 0; };
    auto get_double = [&](const std::string& key, double& out) {
        const auto it = entries.find(key);
        if (it == entries.end()) return false;
        if (!parse_double(it->second.value, out)) {
            errors.push_back({it->second.line, "'" + key + "' is not a number"});
            return false;
        }
        return true;
    };
    auto get_int = [&](const std::string& key, std::int64_t& out) {
        const auto it = entries.find(key);
        if (it == entries.end()) return false;
        if (!parse_int(it->second.value, out)) {
            errors.push_back({it->second.line, "'" + key + "' is not an integer"});
            return false;
        }
        return true;
    };

    RunConfig& cfg = result.config;

    // Required keys, reported exhaustively.
    for (const char* key : {"network.total_nodes", "cost.token_value",
                            "cost.node_reserve_unit_cost", "cost.alpha_min", "cost.alpha_max",
                            "cost.alpha_step"})
        if (!have(key)) errors.push_back({0, std::string("missing required key '") + key + "'"});

    const bool direct_rates = have("network.lambda_attacker") && have("network.lambda_honest") &&
                              have("network.mean_initial_observation");
    const bool calibration = have("network.target_initial_attacker_blocks") ||
                             have("network.target_initial_honest_blocks");
    if (!have("network.mean_observation_gap"))
        errors.push_back({0, "missing required key 'network.mean_observation_gap'"});

    if (calibration && have("network.mean_initial_observation"))
        errors.push_back(
            {0, "supply either direct rates with mean_initial_observation or initial-mean "
                "targets, not both"});
    if (!calibration && !direct_rates)
        errors.push_back(
            {0, "network needs either {lambda_attacker, lambda_honest, "
                "mean_initial_observation, mean_observation_gap} or initial-mean targets with "
                "one fixed rate"});

    get_int("network.total_nodes", cfg.network.total_nodes);
    get_double("network.mean_observation_gap", cfg.network.mean_observation_gap);

    if (calibration) {
        CalibrationInput cal;
        cal.total_nodes = cfg.network.total_nodes;
        cal.mean_observation_gap = cfg.network.mean_observation_gap;
        if (!have("network.target_initial_attacker_blocks") ||
            !have("network.target_initial_honest_blocks"))
            errors.push_back({0, "calibration needs both initial-mean targets"});
        get_double("network.target_initial_attacker_blocks",
                   cal.target_initial_attacker_blocks);
        get_double("network.target_initial_honest_blocks", cal.target_initial_honest_blocks);
        const bool has_la = have("network.lambda_attacker");
        const bool has_lh = have("network.lambda_honest");
        if (has_la == has_lh) {
            errors.push_back({0, "calibration needs exactly one fixed rate"});
        } else if (has_la) {
            get_double("network.lambda_attacker", cal.fixed_lambda_attacker);
        } else {
            get_double("network.lambda_honest", cal.fixed_lambda_honest);
        }
        if (errors.empty()) {
            std::vector<std::string> cal_errors;
            cfg.network = calibrate_network(cal, &cal_errors);
            cfg.calibrated = true;
            for (const auto& e : cal_errors) errors.push_back({0, e});
        }
    } else {
        get_double("network.lambda_attacker", cfg.network.lambda_attacker);
        get_double("network.lambda_honest", cfg.network.lambda_honest);
        get_double("network.mean_initial_observation", cfg.network.mean_initial_observation);
    }

    get_double("cost.token_value", cfg.cost.token_value);
    get_double("cost.node_reserve_unit_cost", cfg.cost.node_reserve_unit_cost);
    get_double("cost.alpha_min", cfg.cost.alpha_grid.min);
    get_double("cost.alpha_max", cfg.cost.alpha_grid.max);
    get_double("cost.alpha_step", cfg.cost.alpha_grid.step);

    if (const auto it = entries.find("compute.backend"); it != entries.end()) {
        const std::string& v = it->second.value;
        if (v == "auto")
            cfg.backend = Backend::kAuto;
        else if (v == "dense")
            cfg.backend = Backend::kDense;
        else if (v == "factorized")
            cfg.backend = Backend::kFactorized;
        else
            errors.push_back({it->second.line, "compute.backend must be auto|dense|factorized"});
    }
    get_double("compute.tolerance", cfg.tolerance);
    {
        std::int64_t v;
        if (get_int("compute.max_terms", v)) cfg.max_terms = static_cast<int>(v);
        if (get_int("compute.tail_extent", v)) cfg.tail_extent = static_cast<int>(v);
        if (get_int("simulation.episodes", v)) cfg.episodes = v;
        if (get_int("simulation.base_seed", v)) cfg.base_seed = static_cast<std::uint64_t>(v);
        if (get_int("simulation.max_observations", v)) cfg.max_observations = v;
        if (get_int("simulation.threads", v)) cfg.threads = static_cast<int>(v);
    }
    if (const auto it = entries.find("simulation.gap_law"); it != entries.end()) {
        const std::string& v = it->second.value;
        if (v == "exponential")
            cfg.observation.law = GapLaw::kExponential;
        else if (v == "deterministic")
            cfg.observation.law = GapLaw::kDeterministic;
        else if (v == "gamma")
            cfg.observation.law = GapLaw::kGamma;
        else
            errors.push_back(
                {it->second.line, "simulation.gap_law must be exponential|deterministic|gamma"});
    }
    get_double("simulation.gamma_shape", cfg.observation.gamma_shape);

    if (const auto it = entries.find("game.q_source"); it != entries.end()) {
        const std::string& v = it->second.value;
        if (v == "analytic")
            cfg.q_source = QSource::kAnalytic;
        else if (v == "injected")
            cfg.q_source = QSource::kInjected;
        else
            errors.push_back({it->second.line, "game.q_source must be analytic|injected"});
    }
    get_double("game.injected_q0", cfg.injected.q0);
    get_double("game.injected_decay", cfg.injected.decay);
    get_double("game.injected_p_prev", cfg.injected.p_prev_below_half);
    if (cfg.q_source == QSource::kInjected &&
        (!have("game.injected_q0") || !have("game.injected_p_prev")))
        errors.push_back({0, "injected q source needs game.injected_q0 and game.injected_p_prev"});

    if (errors.empty()) {
        const auto v = validate(cfg.network, cfg.cost);
        for (const auto& msg : v.violations) errors.push_back({0, msg});
        if (!(cfg.tolerance > 0.0)) errors.push_back({0, "compute.tolerance must be positive"});
        if (cfg.max_terms < 1) errors.push_back({0, "compute.max_terms must be >= 1"});
        if (cfg.episodes < 1) errors.push_back({0, "simulation.episodes must be >= 1"});
        if (cfg.observation.law == GapLaw::kGamma && !(cfg.observation.gamma_shape > 0.0))
            errors.push_back({0, "simulation.gamma_shape must be positive"});
    }
    return result;
}

ParseResult parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ParseResult r;
        r.errors.push_back({0, "cannot open config file '" + path + "'"});
        return r;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

RunConfig builtin_reference_config() {
    CalibrationInput cal;
    cal.total_nodes = 100000;
    cal.target_initial_attacker_blocks = 10.0;
    cal.target_initial_honest_blocks = 150.0;
    cal.fixed_lambda_attacker = 1.0;
    cal.mean_observation_gap = 10.0;  // same scale as the calibrated initial mean

    RunConfig cfg;
    cfg.network = calibrate_network(cal);
    cfg.calibrated = true;
    cfg.cost.token_value = 2e6;
    cfg.cost.node_reserve_unit_cost = 0.5;
    cfg.cost.alpha_grid = {0.0, 0.2, 0.005};
    // Illustrative burst-probability model for the cost demonstration; the
    // calibrated stochastic model itself yields a negligible win probability
    // at this scale (reported alongside).
    cfg.injected = {0.056, 49.5, 0.5};
    return cfg;
}

}  // namespace bgg
