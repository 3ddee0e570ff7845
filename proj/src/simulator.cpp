#include "bgg/simulator.hpp"

#include "bgg/rng.hpp"
#include "bgg/series.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace bgg {

namespace {

double draw_gap(Xoshiro256pp& rng, double mean, const ObservationLaw& law) {
    switch (law.law) {
        case GapLaw::kExponential: return draw_exponential(rng, mean);
        case GapLaw::kDeterministic: return mean;
        case GapLaw::kGamma: return draw_gamma(rng, law.gamma_shape, mean / law.gamma_shape);
    }
    return mean;
}

}  // namespace

std::int64_t default_max_observations(const NetworkParams& params,
                                      std::int64_t largest_threshold) {
    // Cover twenty times the expected crossing epoch of every player that can
    // cross at all; rates of zero are excluded (those players never cross).
    double worst = 0.0;
    const double t = static_cast<double>(largest_threshold);
    if (params.lambda_attacker > 0.0) {
        const double per = params.mean_observation_gap * params.lambda_attacker;
        worst = std::max(worst, t / per + 1.0);
    }
    if (params.lambda_honest > 0.0) {
        const double per = params.mean_observation_gap * params.lambda_honest;
        worst = std::max(worst, t / per + 1.0);
    }
    const double capped = std::min(20.0 * worst + 10.0, 1e7);
    return std::max<std::int64_t>(100, static_cast<std::int64_t>(capped));
}

ExitSummary simulate_episode(const NetworkParams& params, std::uint64_t base_seed,
                             std::uint64_t episode_index, const EpisodeOptions& opts,
                             std::vector<std::int8_t>* raised_outcomes) {
    const std::int64_t threshold = majority_threshold(params.total_nodes);
    std::int64_t largest = threshold;
    for (auto t : opts.raised_thresholds) largest = std::max(largest, t);
    const std::int64_t cap = opts.max_observations > 0
                                 ? opts.max_observations
                                 : default_max_observations(params, largest);

    // Per-threshold first-crossing epochs, attacker and honest.
    const std::size_t extra = opts.raised_thresholds.size();
    std::vector<std::int64_t> a_cross(extra, kUndetermined), h_cross(extra, kUndetermined);

    const bool attacker_can_cross = params.lambda_attacker > 0.0;
    const bool honest_can_cross = params.lambda_honest > 0.0;

    Xoshiro256pp rng = Xoshiro256pp::for_episode(base_seed, episode_index);

    ExitSummary s;
    if (!attacker_can_cross) {
        s.nu = kNeverCrosses;
        for (auto& v : a_cross) v = kNeverCrosses;
    }
    if (!honest_can_cross) {
        s.mu = kNeverCrosses;
        for (auto& v : h_cross) v = kNeverCrosses;
    }

    std::int64_t a = 0, h = 0;
    std::int64_t a_before = 0, h_before = 0;
    double tau = 0.0, tau_before = 0.0;

    auto all_done = [&] {
        if (s.nu == kUndetermined || s.mu == kUndetermined) return false;
        for (std::size_t i = 0; i < extra; ++i)
            if (a_cross[i] == kUndetermined || h_cross[i] == kUndetermined) return false;
        return true;
    };

    for (std::int64_t k = 0; k <= cap; ++k) {
        const double gap = draw_gap(
            rng, k == 0 ? params.mean_initial_observation : params.mean_observation_gap,
            opts.observation);
        a_before = a;
        h_before = h;
        tau_before = k == 0 ? 0.0 : tau;  // tau_{-1} = 0 by convention
        tau += gap;
        a += draw_poisson(rng, params.lambda_attacker * gap);
        h += draw_poisson(rng, params.lambda_honest * gap);
        if (k == 0) {
            s.initial_attacker = a;
            s.initial_honest = h;
        }
        if (s.nu == kUndetermined && a >= threshold) {
            s.nu = k;
            s.attacker_exit = a;
            s.honest_exit = h;
            s.tau_exit = tau;
            if (k == 0) {
                // No prior epoch; the crossing state doubles as the prior one.
                s.attacker_prev = a;
                s.honest_prev = h;
                s.tau_prev = 0.0;
            } else {
                s.attacker_prev = a_before;
                s.honest_prev = h_before;
                s.tau_prev = tau_before;
            }
        }
        if (s.mu == kUndetermined && h >= threshold) s.mu = k;
        for (std::size_t i = 0; i < extra; ++i) {
            if (a_cross[i] == kUndetermined && a >= opts.raised_thresholds[i]) a_cross[i] = k;
            if (h_cross[i] == kUndetermined && h >= opts.raised_thresholds[i]) h_cross[i] = k;
        }
        if (all_done()) break;
    }

    // Outcome: determined as soon as the order of the two crossings is known.
    if (s.nu != kUndetermined && s.mu != kUndetermined) {
        s.attacker_wins = s.nu < s.mu;
        s.tie = s.nu == s.mu && s.nu != kNeverCrosses;
    } else if (s.mu != kUndetermined && s.nu == kUndetermined) {
        s.attacker_wins = false;  // honest crossed already; nu > mu is certain
    } else if (s.nu != kUndetermined && s.mu == kUndetermined) {
        s.attacker_wins = true;  // attacker crossed with honest still below
    } else {
        s.censored = true;
    }

    if (raised_outcomes) {
        raised_outcomes->assign(extra, -1);
        for (std::size_t i = 0; i < extra; ++i) {
            const std::int64_t ac = a_cross[i], hc = h_cross[i];
            if (ac != kUndetermined && hc != kUndetermined) {
                (*raised_outcomes)[i] = ac < hc ? 1 : 0;  // ties defend
            } else if (ac != kUndetermined) {
                (*raised_outcomes)[i] = 1;  // attacker crossed, honest still below
            } else if (hc != kUndetermined) {
                (*raised_outcomes)[i] = 0;
            }
        }
    }
    return s;
}

namespace {

struct BlockAccumulator {
    std::int64_t episodes = 0;
    std::int64_t wins = 0, losses = 0, ties = 0, censored = 0;
    double sum_nu_win = 0, sum_nu2_win = 0;
    double sum_tau_prev = 0, sum_tau_prev2 = 0;
    double sum_a0 = 0, sum_a02 = 0, sum_h0 = 0, sum_h02 = 0;
    std::int64_t prev_below = 0;
    std::map<std::int64_t, std::int64_t> nu_hist, a_prev_hist, a_exit_hist;
    std::vector<std::int64_t> q1_tail, q1_resolved, q1_resolved_known;

    void merge(const BlockAccumulator& o) {
        episodes += o.episodes;
        wins += o.wins;
        losses += o.losses;
        ties += o.ties;
        censored += o.censored;
        sum_nu_win += o.sum_nu_win;
        sum_nu2_win += o.sum_nu2_win;
        sum_tau_prev += o.sum_tau_prev;
        sum_tau_prev2 += o.sum_tau_prev2;
        sum_a0 += o.sum_a0;
        sum_a02 += o.sum_a02;
        sum_h0 += o.sum_h0;
        sum_h02 += o.sum_h02;
        prev_below += o.prev_below;
        for (auto& [k, v] : o.nu_hist) nu_hist[k] += v;
        for (auto& [k, v] : o.a_prev_hist) a_prev_hist[k] += v;
        for (auto& [k, v] : o.a_exit_hist) a_exit_hist[k] += v;
        for (std::size_t i = 0; i < q1_tail.size(); ++i) {
            q1_tail[i] += o.q1_tail[i];
            q1_resolved[i] += o.q1_resolved[i];
            q1_resolved_known[i] += o.q1_resolved_known[i];
        }
    }
};

Estimate frequency_estimate(std::int64_t count, std::int64_t n) {
    Estimate e;
    if (n <= 0) return e;
    const double p = static_cast<double>(count) / static_cast<double>(n);
    e.value = p;
    e.se = std::sqrt(std::max(0.0, p * (1.0 - p) / static_cast<double>(n)));
    return e;
}

Estimate mean_estimate(double sum, double sum2, std::int64_t n) {
    Estimate e;
    if (n <= 0) return e;
    const double dn = static_cast<double>(n);
    e.value = sum / dn;
    const double var = std::max(0.0, sum2 / dn - e.value * e.value);
    e.se = n > 1 ? std::sqrt(var / (dn - 1.0)) : 0.0;
    return e;
}

}  // namespace

SimEstimates run_batch(const NetworkParams& params, std::int64_t episodes,
                       std::uint64_t base_seed, const BatchOptions& opts) {
    if (episodes < 1) throw std::invalid_argument("run_batch: episodes must be >= 1");
    const auto check = validate(params);
    if (!check.ok()) throw std::invalid_argument("run_batch: invalid params");

    const std::int64_t threshold = majority_threshold(params.total_nodes);
    EpisodeOptions epi = opts.episode;
    epi.raised_thresholds.clear();
    for (double a : opts.alphas)
        epi.raised_thresholds.push_back(raised_threshold(params.total_nodes, a));

    const std::int64_t block_size = 8192;
    const std::int64_t blocks = (episodes + block_size - 1) / block_size;
    std::vector<BlockAccumulator> partials(static_cast<std::size_t>(blocks));

    int workers = opts.threads > 0 ? opts.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = static_cast<int>(std::min<std::int64_t>(workers, blocks));

    std::atomic<std::int64_t> next_block{0};
    auto worker_fn = [&] {
        std::vector<std::int8_t> raised;
        for (;;) {
            const std::int64_t b = next_block.fetch_add(1);
            if (b >= blocks) return;
            BlockAccumulator acc;
            acc.q1_tail.assign(opts.alphas.size(), 0);
            acc.q1_resolved.assign(opts.alphas.size(), 0);
            acc.q1_resolved_known.assign(opts.alphas.size(), 0);
            const std::int64_t lo = b * block_size;
            const std::int64_t hi = std::min(episodes, lo + block_size);
            for (std::int64_t e = lo; e < hi; ++e) {
                const ExitSummary s = simulate_episode(params, base_seed,
                                                       static_cast<std::uint64_t>(e), epi, &raised);
                ++acc.episodes;
                acc.sum_a0 += static_cast<double>(s.initial_attacker);
                acc.sum_a02 += static_cast<double>(s.initial_attacker) *
                               static_cast<double>(s.initial_attacker);
                acc.sum_h0 += static_cast<double>(s.initial_honest);
                acc.sum_h02 +=
                    static_cast<double>(s.initial_honest) * static_cast<double>(s.initial_honest);
                if (s.censored) {
                    ++acc.censored;
                    continue;
                }
                if (s.attacker_wins) {
                    ++acc.wins;
                    ++acc.nu_hist[s.nu];
                    ++acc.a_prev_hist[s.attacker_prev];
                    ++acc.a_exit_hist[s.attacker_exit];
                    acc.sum_nu_win += static_cast<double>(s.nu);
                    acc.sum_nu2_win += static_cast<double>(s.nu) * static_cast<double>(s.nu);
                    acc.sum_tau_prev += s.tau_prev;
                    acc.sum_tau_prev2 += s.tau_prev * s.tau_prev;
                    if (s.attacker_prev < threshold) ++acc.prev_below;
                    for (std::size_t i = 0; i < raised.size(); ++i)
                        if (s.attacker_exit >= epi.raised_thresholds[i]) ++acc.q1_tail[i];
                } else if (s.tie) {
                    ++acc.ties;
                } else {
                    ++acc.losses;
                }
                for (std::size_t i = 0; i < raised.size(); ++i) {
                    if (raised[i] >= 0) {
                        ++acc.q1_resolved_known[i];
                        if (raised[i] == 1) ++acc.q1_resolved[i];
                    }
                }
            }
            partials[static_cast<std::size_t>(b)] = std::move(acc);
        }
    };

    if (workers == 1) {
        worker_fn();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker_fn);
        for (auto& t : pool) t.join();
    }

    BlockAccumulator total;
    total.q1_tail.assign(opts.alphas.size(), 0);
    total.q1_resolved.assign(opts.alphas.size(), 0);
    total.q1_resolved_known.assign(opts.alphas.size(), 0);
    for (const auto& b : partials) total.merge(b);

    SimEstimates out;
    out.params = params;
    out.episodes = episodes;
    out.base_seed = base_seed;
    out.wins = total.wins;
    out.losses = total.losses;
    out.ties = total.ties;
    out.censored = total.censored;
    out.censored_fraction =
        static_cast<double>(total.censored) / static_cast<double>(episodes);
    if (out.censored_fraction > opts.max_censored_fraction)
        throw CensoringError("censored fraction " + std::to_string(out.censored_fraction) +
                                 " exceeds the reporting limit; raise max_observations",
                             out.censored_fraction);

    out.p_win = frequency_estimate(total.wins, episodes);
    out.p_lose = frequency_estimate(total.losses, episodes);
    out.p_tie = frequency_estimate(total.ties, episodes);
    out.q0 = out.p_win;
    out.p_prev_below_half = frequency_estimate(total.prev_below, episodes);
    out.mean_initial_attacker = mean_estimate(total.sum_a0, total.sum_a02, episodes);
    out.mean_initial_honest = mean_estimate(total.sum_h0, total.sum_h02, episodes);
    out.mean_exit_index_win = mean_estimate(total.sum_nu_win, total.sum_nu2_win, total.wins);
    out.mean_tau_prev_win = mean_estimate(total.sum_tau_prev, total.sum_tau_prev2, total.wins);
    out.composed_tau_prev.value = params.mean_initial_observation +
                                  params.mean_observation_gap *
                                      (out.mean_exit_index_win.value - 1.0);
    out.composed_tau_prev.se = params.mean_observation_gap * out.mean_exit_index_win.se;

    const auto dn = static_cast<double>(episodes);
    for (auto& [k, v] : total.nu_hist) out.exit_index_freq[k] = static_cast<double>(v) / dn;
    for (auto& [k, v] : total.a_prev_hist) out.pmf_attacker_prev[k] = static_cast<double>(v) / dn;
    for (auto& [k, v] : total.a_exit_hist) out.pmf_attacker_exit[k] = static_cast<double>(v) / dn;

    for (std::size_t i = 0; i < opts.alphas.size(); ++i) {
        SimEstimates::QAlpha q;
        q.alpha = opts.alphas[i];
        q.threshold = epi.raised_thresholds[i];
        q.tail = frequency_estimate(total.q1_tail[i], episodes);
        q.resolved = frequency_estimate(total.q1_resolved[i], total.q1_resolved_known[i]);
        out.q1.push_back(q);
    }
    return out;
}

namespace {

void push_row(ComparisonReport& rep, const std::string& name, double analytic, double empirical,
              double se) {
    ComparisonRow row;
    row.quantity = name;
    row.analytic = analytic;
    row.empirical = empirical;
    row.se = se;
    row.z = se > 0.0 ? (empirical - analytic) / se : (empirical == analytic ? 0.0 : 1e9);
    row.pass = std::abs(row.z) <= rep.z_threshold;
    rep.rows.push_back(row);
    rep.pass = rep.pass && row.pass;
}

// Frequency rows use the analytic-p standard error (exact under the null).
void push_frequency_row(ComparisonReport& rep, const std::string& name, double analytic,
                        double empirical, std::int64_t episodes) {
    const double se =
        std::sqrt(std::max(analytic * (1.0 - analytic), 1e-12) / static_cast<double>(episodes));
    push_row(rep, name, analytic, empirical, se);
}

// Pointwise z rows for bins with analytic expected count >= 10; the rest is
// tested as one lumped bin.  A total-variation row checks the aggregate.
void compare_pmf(ComparisonReport& rep, const std::string& name,
                 const std::map<std::int64_t, double>& analytic, double analytic_lump,
                 const std::map<std::int64_t, double>& empirical, std::int64_t episodes) {
    const double dn = static_cast<double>(episodes);
    double lump_empirical = 0.0;
    for (const auto& [k, pe] : empirical)
        if (!analytic.contains(k)) lump_empirical += pe;

    double small_analytic = 0.0, small_empirical = 0.0;
    KahanSum tv_acc, se_acc;
    for (const auto& [k, pa] : analytic) {
        const auto it = empirical.find(k);
        const double pe = it == empirical.end() ? 0.0 : it->second;
        const double se0 = std::sqrt(std::max(pa * (1.0 - pa), 1e-300) / dn);
        tv_acc.add(std::abs(pe - pa));
        se_acc.add(se0);
        if (pa * dn >= 10.0) {
            push_row(rep, name + "[" + std::to_string(k) + "]", pa, pe, se0);
        } else {
            small_analytic += pa;
            small_empirical += pe;
        }
    }
    small_analytic += analytic_lump;
    small_empirical += lump_empirical;
    tv_acc.add(std::abs(analytic_lump - lump_empirical));
    se_acc.add(std::sqrt(std::max(analytic_lump * (1.0 - analytic_lump), 1e-300) / dn));
    push_frequency_row(rep, name + "[small-bin lump]", small_analytic, small_empirical, episodes);

    ComparisonRow tv;
    tv.quantity = name + " total-variation";
    tv.analytic = 0.0;
    tv.empirical = 0.5 * tv_acc.value();
    tv.se = 0.5 * se_acc.value();
    tv.z = tv.se > 0.0 ? tv.empirical / tv.se : 0.0;
    tv.pass = tv.z <= rep.z_threshold;
    rep.rows.push_back(tv);
    rep.pass = rep.pass && tv.pass;
}

}  // namespace

ComparisonReport compare_report(const AnalysisResult& analytic, const SimEstimates& sim,
                                double z_threshold) {
    if (!(analytic.params == sim.params))
        throw std::invalid_argument("compare_report: analytic and simulated params differ");
    ComparisonReport rep;
    rep.z_threshold = z_threshold;

    push_frequency_row(rep, "p_win", analytic.p_win, sim.p_win.value, sim.episodes);
    push_frequency_row(rep, "q0", analytic.q0, sim.q0.value, sim.episodes);
    push_frequency_row(rep, "p_prev_below_half", analytic.p_prev_below_half,
                       sim.p_prev_below_half.value, sim.episodes);

    // Restricted exit-index mean: empirical counterpart is sum(nu 1{win})/episodes.
    {
        const double emp = sim.mean_exit_index_win.value * sim.p_win.value;
        const double se = sim.mean_exit_index_win.se * sim.p_win.value +
                          sim.p_win.se * sim.mean_exit_index_win.value;
        push_row(rep, "E[nu] restricted", analytic.moments.exit_index_restricted, emp, se);
    }
    // Conditional rows only when the winning sample is large enough for the
    // normal approximation to mean anything.
    if (analytic.moments.exit_index_conditional && sim.wins >= 100) {
        push_row(rep, "E[nu] conditional", *analytic.moments.exit_index_conditional,
                 sim.mean_exit_index_win.value, sim.mean_exit_index_win.se);
        push_row(rep, "E[tau_prev] composed", *analytic.moments.decision_time_conditional,
                 sim.composed_tau_prev.value, sim.composed_tau_prev.se);
    }

    for (const auto& qa : analytic.q1) {
        for (const auto& qe : sim.q1) {
            if (qe.threshold == qa.threshold) {
                push_frequency_row(rep, "q1[alpha=" + std::to_string(qa.alpha) + "]", qa.q1,
                                   qe.tail.value, sim.episodes);
                break;
            }
        }
    }

    std::map<std::int64_t, double> exit_series;
    for (std::size_t n = 0; n < analytic.series.p.size(); ++n)
        exit_series[static_cast<std::int64_t>(n)] = analytic.series.p[n];
    compare_pmf(rep, "exit_index", exit_series, analytic.series.truncation_error_bound,
                sim.exit_index_freq, sim.episodes);
    compare_pmf(rep, "pmf_A_prev", analytic.pmf_attacker_prev.pmf,
                analytic.pmf_attacker_prev.lump_mass, sim.pmf_attacker_prev, sim.episodes);
    compare_pmf(rep, "pmf_A_exit", analytic.pmf_attacker_exit.pmf,
                analytic.pmf_attacker_exit.lump_mass, sim.pmf_attacker_exit, sim.episodes);
    return rep;
}

}  // namespace bgg
