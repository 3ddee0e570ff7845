#pragma once
// Flat key-value run configuration: one `section.key = value` per line,
// `#` comments, no nesting.

#include "bgg/analysis.hpp"
#include "bgg/model.hpp"
#include "bgg/simulator.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bgg {

struct InjectedQModel {
    double q0 = 0.0;
    double decay = 0.0;  // q1(alpha) = q0 * exp(-decay * alpha)
    double p_prev_below_half = 0.0;
};

enum class QSource { kAnalytic, kInjected };

struct RunConfig {
    NetworkParams network;
    CostParams cost;

    Backend backend = Backend::kAuto;
    double tolerance = 1e-12;
    int max_terms = 200000;
    int tail_extent = -1;

    std::int64_t episodes = 100000;
    std::uint64_t base_seed = 1;
    std::int64_t max_observations = 0;
    int threads = 0;
    ObservationLaw observation;

    QSource q_source = QSource::kAnalytic;
    InjectedQModel injected;

    bool calibrated = false;  // network was produced by initial-mean calibration
};

struct ConfigError {
    int line = 0;  // 0 when not tied to a specific line
    std::string message;
};

struct ParseResult {
    RunConfig config;
    std::vector<ConfigError> errors;
    bool ok() const { return errors.empty(); }
};

ParseResult parse_config(const std::string& text);
ParseResult parse_config_file(const std::string& path);

// The builtin reference scenario used by the paper-example subcommand:
// 100000 nodes, 2M token value, 0.5 per reserve node, initial means 10/150.
RunConfig builtin_reference_config();

}  // namespace bgg
