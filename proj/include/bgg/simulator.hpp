#pragma once
// Monte Carlo oracle for the block race: one shared observation renewal
// sequence, Poisson block counts per interval for both players, first
// crossings of the majority threshold.

#include "bgg/analysis.hpp"
#include "bgg/model.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace bgg {

inline constexpr std::int64_t kNeverCrosses = std::numeric_limits<std::int64_t>::max();
inline constexpr std::int64_t kUndetermined = -1;

enum class GapLaw { kExponential, kDeterministic, kGamma };

struct ObservationLaw {
    GapLaw law = GapLaw::kExponential;
    double gamma_shape = 2.0;  // used when law == kGamma
};

struct ExitSummary {
    std::int64_t nu = kUndetermined;
    std::int64_t mu = kUndetermined;
    std::int64_t attacker_prev = -1, attacker_exit = -1;
    std::int64_t honest_prev = -1, honest_exit = -1;
    double tau_prev = 0.0, tau_exit = 0.0;  // meaningful when nu is finite
    std::int64_t initial_attacker = 0, initial_honest = 0;
    bool attacker_wins = false;  // nu < mu, strictly
    bool tie = false;            // nu == mu, both finite
    bool censored = false;       // outcome undetermined at the episode cap
};

struct EpisodeOptions {
    std::int64_t max_observations = 0;  // 0: automatic from the rates
    ObservationLaw observation;
    // Extra thresholds raced by both players on the same path (the re-solved
    // raised-threshold variant); outcome per threshold: 1 attacker first,
    // 0 honest first or tie, -1 undetermined at the cap.
    std::vector<std::int64_t> raised_thresholds;
};

std::int64_t default_max_observations(const NetworkParams& params,
                                      std::int64_t largest_threshold);

ExitSummary simulate_episode(const NetworkParams& params, std::uint64_t base_seed,
                             std::uint64_t episode_index, const EpisodeOptions& opts = {},
                             std::vector<std::int8_t>* raised_outcomes = nullptr);

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

struct SimEstimates {
    NetworkParams params;
    std::int64_t episodes = 0;
    std::uint64_t base_seed = 0;
    std::int64_t wins = 0, losses = 0, ties = 0, censored = 0;

    Estimate p_win, p_lose, p_tie;
    double censored_fraction = 0.0;

    std::map<std::int64_t, double> exit_index_freq;    // winning nu / episodes
    std::map<std::int64_t, double> pmf_attacker_prev;  // defective, winning episodes
    std::map<std::int64_t, double> pmf_attacker_exit;

    Estimate mean_initial_attacker, mean_initial_honest;
    Estimate mean_exit_index_win;  // mean nu over winning episodes
    Estimate mean_tau_prev_win;    // raw mean of tau_{nu-1} over winners
    Estimate composed_tau_prev;    // d0 + d*(mean nu win - 1), se scaled from nu
    Estimate q0;

    struct QAlpha {
        double alpha = 0.0;
        std::int64_t threshold = 0;
        Estimate tail;      // frequency of A_exit >= threshold among all episodes
        Estimate resolved;  // re-solved race to the raised threshold
    };
    std::vector<QAlpha> q1;
    Estimate p_prev_below_half;
};

class CensoringError : public std::runtime_error {
  public:
    CensoringError(const std::string& what, double fraction)
        : std::runtime_error(what), censored_fraction(fraction) {}
    double censored_fraction = 0.0;
};

struct BatchOptions {
    std::vector<double> alphas;
    EpisodeOptions episode;
    int threads = 0;  // 0: hardware concurrency
    double max_censored_fraction = 0.01;
};

// Embarrassingly parallel over fixed blocks of episodes; per-episode RNG
// substreams and block-ordered reduction make results identical for any
// worker count.  Throws CensoringError when too many episodes are undecided.
SimEstimates run_batch(const NetworkParams& params, std::int64_t episodes,
                       std::uint64_t base_seed, const BatchOptions& opts = {});

struct ComparisonRow {
    std::string quantity;
    double analytic = 0.0, empirical = 0.0, se = 0.0, z = 0.0;
    bool pass = true;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    double z_threshold = 3.0;
    bool pass = true;
};

// Per-quantity z-scores plus total-variation rows for the PMFs.  Pointwise
// PMF tests are restricted to bins with analytic expected count >= 10; the
// remainder is tested as one lumped bin.  Throws when the two sides were not
// produced from the same parameters.
ComparisonReport compare_report(const AnalysisResult& analytic, const SimEstimates& sim,
                                double z_threshold = 3.0);

}  // namespace bgg
