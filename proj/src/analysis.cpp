#include "bgg/analysis.hpp"

#include "bgg/series.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bgg {

namespace {

// Memoryless race in thinned form.  Marks from both players form one stream;
// each mark is an attacker block with probability rho independently, and the
// number of marks per observation interval is geometric.
struct RaceLaw {
    std::int64_t threshold = 1;  // T = ceil(M/2)
    double d0 = 1.0, d = 1.0;    // observation means
    double p0 = 0.0, q0 = 0.0;   // delta0*lambda_A, delta0*lambda_H
    double p = 0.0, q = 0.0;     // delta*lambda_A,  delta*lambda_H
    double rho = 0.0, sigma = 1.0;
    double abar0 = 0.0, bbar0 = 1.0;  // totals over [0, tau0]: mass bbar*abar^s
    double abar = 0.0, bbar = 1.0;    // totals per gap
    double alpha_H0 = 0.0, alpha_H = 0.0;  // honest marginal decays
};

RaceLaw make_law(const NetworkParams& params) {
    RaceLaw law;
    law.threshold = majority_threshold(params.total_nodes);
    law.d0 = params.mean_initial_observation;
    law.d = params.mean_observation_gap;
    law.p0 = law.d0 * params.lambda_attacker;
    law.q0 = law.d0 * params.lambda_honest;
    law.p = law.d * params.lambda_attacker;
    law.q = law.d * params.lambda_honest;
    const double lam = params.lambda_attacker + params.lambda_honest;
    law.rho = lam > 0.0 ? params.lambda_attacker / lam : 0.0;
    law.sigma = 1.0 - law.rho;
    law.abar0 = (law.p0 + law.q0) / (1.0 + law.p0 + law.q0);
    law.bbar0 = 1.0 - law.abar0;
    law.abar = (law.p + law.q) / (1.0 + law.p + law.q);
    law.bbar = 1.0 - law.abar;
    law.alpha_H0 = law.q0 / (1.0 + law.q0);
    law.alpha_H = law.q / (1.0 + law.q);
    return law;
}

double honest_initial_cdf(const RaceLaw& law, std::int64_t y0) {
    return 1.0 - std::pow(law.alpha_H0, static_cast<double>(y0 + 1));
}
double honest_gap_cdf(const RaceLaw& law, std::int64_t y0) {
    return 1.0 - std::pow(law.alpha_H, static_cast<double>(y0 + 1));
}

// out[a - a_lo] = C(w, a) rho^a sigma^(w-a) for a in [a_lo, a_hi].  Anchored
// at the in-window mode through lgamma so large w cannot underflow the start.
void binomial_window(std::int64_t w, double rho, std::int64_t a_lo, std::int64_t a_hi,
                     std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(std::max<std::int64_t>(a_hi - a_lo + 1, 0)), 0.0);
    if (a_hi < a_lo) return;
    const double sigma = 1.0 - rho;
    if (rho <= 0.0) {
        if (a_lo <= 0 && 0 <= a_hi) out[static_cast<std::size_t>(-a_lo)] = 1.0;
        return;
    }
    if (rho >= 1.0) {
        if (a_lo <= w && w <= a_hi) out[static_cast<std::size_t>(w - a_lo)] = 1.0;
        return;
    }
    const std::int64_t anchor = std::clamp(
        static_cast<std::int64_t>(std::llround(static_cast<double>(w) * rho)), a_lo, a_hi);
    const double log_anchor =
        std::lgamma(static_cast<double>(w + 1)) - std::lgamma(static_cast<double>(anchor + 1)) -
        std::lgamma(static_cast<double>(w - anchor + 1)) +
        static_cast<double>(anchor) * std::log(rho) +
        static_cast<double>(w - anchor) * std::log(sigma);
    const double v = std::exp(log_anchor);
    out[static_cast<std::size_t>(anchor - a_lo)] = v;
    double fwd = v;
    for (std::int64_t a = anchor; a < a_hi; ++a) {
        fwd *= (static_cast<double>(w - a) / static_cast<double>(a + 1)) * (rho / sigma);
        out[static_cast<std::size_t>(a + 1 - a_lo)] = fwd;
    }
    double bwd = v;
    for (std::int64_t a = anchor; a > a_lo; --a) {
        bwd *= (static_cast<double>(a) / static_cast<double>(w - a + 1)) * (sigma / rho);
        out[static_cast<std::size_t>(a - 1 - a_lo)] = bwd;
    }
}

// out[h] = C(k + h, k) x^k y^h for h = 0..h_max, anchored at the row maximum.
void nb_window(std::int64_t k, double x, double y, std::int64_t h_max, std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(h_max + 1), 0.0);
    if (y <= 0.0) {
        out[0] = k == 0 ? 1.0 : std::pow(x, static_cast<double>(k));
        return;
    }
    if (k == 0) {
        double v = 1.0;
        for (std::int64_t h = 0; h <= h_max; ++h) {
            out[static_cast<std::size_t>(h)] = v;
            v *= y;
        }
        return;
    }
    if (x <= 0.0) return;
    // Ratio out[h+1]/out[h] = y*(k+h+1)/(h+1) >= 1 while h+1 <= y*(k+1)/(1-y).
    std::int64_t anchor = h_max;
    if (y < 1.0)
        anchor = std::clamp(
            static_cast<std::int64_t>(std::floor(y * static_cast<double>(k + 1) / (1.0 - y))),
            std::int64_t{0}, h_max);
    const double log_anchor = std::lgamma(static_cast<double>(k + anchor + 1)) -
                              std::lgamma(static_cast<double>(k + 1)) -
                              std::lgamma(static_cast<double>(anchor + 1)) +
                              static_cast<double>(k) * std::log(x) +
                              static_cast<double>(anchor) * std::log(y);
    const double v = std::exp(log_anchor);
    out[static_cast<std::size_t>(anchor)] = v;
    double fwd = v;
    for (std::int64_t h = anchor; h < h_max; ++h) {
        fwd *= y * static_cast<double>(k + h + 1) / static_cast<double>(h + 1);
        out[static_cast<std::size_t>(h + 1)] = fwd;
    }
    double bwd = v;
    for (std::int64_t h = anchor; h > 0; --h) {
        bwd *= static_cast<double>(h) / (y * static_cast<double>(k + h));
        out[static_cast<std::size_t>(h - 1)] = bwd;
    }
}

// Tables over the one-gap increment (X, Y):
//   g(x0, y0) = P{X >= x0, Y <= y0}   x0 in [0, xq], y0 in [0, T-1]
//   j(jj, y0) = P{X == jj, Y <= y0}   jj in [0, xp]
// Joint-law rows are supplied by row_fn so the two backends keep independent
// computations of the same law.
struct IncrementTables {
    std::int64_t T = 1, xq = 0, xp = 0;
    std::vector<double> g_inc;
    std::vector<double> jp;

    double g(std::int64_t x0, std::int64_t y0) const {
        return g_inc[static_cast<std::size_t>(x0) * static_cast<std::size_t>(T) +
                     static_cast<std::size_t>(y0)];
    }
    double j(std::int64_t jj, std::int64_t y0) const {
        return jp[static_cast<std::size_t>(jj) * static_cast<std::size_t>(T) +
                  static_cast<std::size_t>(y0)];
    }
};

using RowFn = std::function<void(std::int64_t, std::vector<double>&)>;

IncrementTables build_increment_tables(std::int64_t T, std::int64_t xq, std::int64_t xp,
                                       const RowFn& row_fn,
                                       const std::function<double(std::int64_t)>& y_cdf) {
    IncrementTables t;
    t.T = T;
    t.xq = xq;
    t.xp = xp;
    const auto sT = static_cast<std::size_t>(T);
    t.g_inc.assign(static_cast<std::size_t>(xq + 1) * sT, 0.0);
    t.jp.assign(static_cast<std::size_t>(xp + 1) * sT, 0.0);

    std::vector<double> cy(sT);
    for (std::int64_t y0 = 0; y0 < T; ++y0) cy[static_cast<std::size_t>(y0)] = y_cdf(y0);
    for (std::int64_t y0 = 0; y0 < T; ++y0)
        t.g_inc[static_cast<std::size_t>(y0)] = cy[static_cast<std::size_t>(y0)];

    std::vector<double> row;
    std::vector<double> column_cum(sT, 0.0);
    const std::int64_t x_top = std::max(xq - 1, xp);
    for (std::int64_t x = 0; x <= x_top; ++x) {
        row_fn(x, row);
        double run = 0.0;
        for (std::int64_t y0 = 0; y0 < T; ++y0) {
            run += row[static_cast<std::size_t>(y0)];
            if (x <= xp)
                t.jp[static_cast<std::size_t>(x) * sT + static_cast<std::size_t>(y0)] = run;
            column_cum[static_cast<std::size_t>(y0)] += run;
        }
        if (x + 1 <= xq) {
            for (std::int64_t y0 = 0; y0 < T; ++y0) {
                const double v =
                    cy[static_cast<std::size_t>(y0)] - column_cum[static_cast<std::size_t>(y0)];
                t.g_inc[static_cast<std::size_t>(x + 1) * sT + static_cast<std::size_t>(y0)] =
                    v > 0.0 ? v : 0.0;
            }
        }
    }
    return t;
}

// r0[x] = P{A0 = x, H0 <= T-1}.
std::vector<double> build_initial_row_sums(std::int64_t T, std::int64_t x_top,
                                           const RowFn& row_fn) {
    std::vector<double> r0(static_cast<std::size_t>(x_top + 1), 0.0);
    std::vector<double> row;
    for (std::int64_t x = 0; x <= x_top; ++x) {
        row_fn(x, row);
        KahanSum acc;
        for (std::int64_t y = 0; y < T; ++y) acc.add(row[static_cast<std::size_t>(y)]);
        r0[static_cast<std::size_t>(x)] = acc.value();
    }
    return r0;
}

// Factorized route: thinned joint rows bbar * C(x+y,x) (abar*rho)^x (abar*sigma)^y.
RowFn thinning_rows(const RaceLaw& law, double abar, double bbar) {
    const std::int64_t T = law.threshold;
    const double xr = abar * law.rho;
    const double ys = abar * law.sigma;
    return [T, xr, ys, bbar](std::int64_t x, std::vector<double>& row) {
        nb_window(x, xr, ys, T - 1, row);
        for (auto& v : row) v *= bbar;
    };
}

// Dense route: coefficients of 1/(1 + P(1-u) + Q(1-v)) by rational division.
struct DenseRowGen {
    std::int64_t T;
    double P, Q, c;
    std::vector<double> prev;
    std::int64_t next_x = 0;

    DenseRowGen(std::int64_t T_, double P_, double Q_) : T(T_), P(P_), Q(Q_), c(1.0 + P_ + Q_) {}

    void operator()(std::int64_t x, std::vector<double>& row) {
        if (x != next_x) throw std::logic_error("DenseRowGen: rows must be generated in order");
        row.assign(static_cast<std::size_t>(T), 0.0);
        for (std::int64_t y = 0; y < T; ++y) {
            double acc = (x == 0 && y == 0) ? 1.0 : 0.0;
            if (x > 0) acc += P * prev[static_cast<std::size_t>(y)];
            if (y > 0) acc += Q * row[static_cast<std::size_t>(y - 1)];
            row[static_cast<std::size_t>(y)] = acc / c;
        }
        prev = row;
        ++next_x;
    }
};

double clamp_dust(double v) {
    if (v < 0.0) {
        if (v < -1e-9) throw std::logic_error("probability fell below the roundoff dust band");
        return 0.0;
    }
    return v;
}

// Thinning bound valid for any observation law:
// P{nu < mu} <= P{Binomial(2T-1, rho) >= T}, Chernoff form.
double hopeless_race_bound(std::int64_t T, double rho) {
    if (rho <= 0.0) return 0.0;
    const double n = static_cast<double>(2 * T - 1);
    const double a = static_cast<double>(T) / n;
    if (rho >= a) return 1.0;
    const double kl = a * std::log(a / rho) + (1.0 - a) * std::log((1.0 - a) / (1.0 - rho));
    const double exponent = -n * kl;
    return exponent < -745.0 ? 0.0 : std::exp(exponent);
}

}  // namespace

AnalysisResult run_exit_analysis(const NetworkParams& params, const AnalysisOptions& options) {
    const auto check = validate(params);
    if (!check.ok()) {
        std::string msg = "run_exit_analysis: invalid params:";
        for (const auto& v : check.violations) msg += " " + v + ";";
        throw std::invalid_argument(msg);
    }
    if (!(options.tolerance > 0.0))
        throw std::invalid_argument("run_exit_analysis: tolerance must be positive");
    if (options.max_terms < 1)
        throw std::invalid_argument("run_exit_analysis: max_terms must be >= 1");

    const RaceLaw law = make_law(params);
    const std::int64_t T = law.threshold;
    const auto sT = static_cast<std::size_t>(T);

    AnalysisResult out;
    out.params = params;
    out.backend_used = options.backend == Backend::kDense ? Backend::kDense : Backend::kFactorized;

    std::vector<std::int64_t> raised;
    raised.reserve(options.alphas.size());
    for (double a : options.alphas) raised.push_back(raised_threshold(params.total_nodes, a));

    const char* note_prev = "attacker blocks one epoch before crossing, attacker-wins trace";
    const char* note_exit = "attacker blocks at the crossing epoch, attacker-wins trace";

    auto zero_result = [&](double bound) {
        out.hopeless_shortcut = true;
        out.hopeless_bound = bound;
        out.series.converged = true;
        out.series.truncation_error_bound = bound;
        out.moments.decision_time_restricted = law.d0 - law.d;
        out.pmf_attacker_prev.support_note = note_prev;
        out.pmf_attacker_exit.support_note = note_exit;
        for (std::size_t i = 0; i < raised.size(); ++i)
            out.q1.push_back({options.alphas[i], raised[i], 0.0});
        return out;
    };

    if (params.lambda_attacker == 0.0) return zero_result(0.0);
    const double chern = hopeless_race_bound(T, law.rho);
    if (T > 64 && chern < options.tolerance * 1e-3) return zero_result(chern);

    const std::int64_t cap = out.backend_used == Backend::kDense
                                 ? options.dense_threshold_cap
                                 : options.factorized_threshold_cap;
    if (T > cap)
        throw NonConvergenceError("analytic backend capacity exceeded: threshold " +
                                      std::to_string(T) + " beyond cap " + std::to_string(cap) +
                                      "; use the simulator for this regime",
                                  1.0);

    int tail = options.tail_extent;
    if (tail < 0)
        tail = static_cast<int>(std::max<std::int64_t>(
            24, static_cast<std::int64_t>(std::ceil(10.0 * std::max(1.0, law.p)))));

    const std::int64_t t_alpha_max =
        raised.empty() ? T : *std::max_element(raised.begin(), raised.end());
    const std::int64_t x0_top = std::max(T + tail, t_alpha_max);
    const std::int64_t xq = std::max(T, t_alpha_max);
    const std::int64_t xp = options.want_pmfs ? T + tail : 0;

    IncrementTables inc;
    std::vector<double> r0;
    if (out.backend_used == Backend::kDense) {
        DenseRowGen gap_rows(T, law.p, law.q);
        inc = build_increment_tables(
            T, xq, xp, [&gap_rows](std::int64_t x, std::vector<double>& row) { gap_rows(x, row); },
            [&law](std::int64_t y0) { return honest_gap_cdf(law, y0); });
        DenseRowGen init_rows(T, law.p0, law.q0);
        r0 = build_initial_row_sums(T, x0_top, [&init_rows](std::int64_t x, std::vector<double>& row) {
            init_rows(x, row);
        });
    } else {
        inc = build_increment_tables(T, xq, xp, thinning_rows(law, law.abar, law.bbar),
                                     [&law](std::int64_t y0) { return honest_gap_cdf(law, y0); });
        r0 = build_initial_row_sums(T, x0_top, thinning_rows(law, law.abar0, law.bbar0));
    }

    std::vector<double> r0_prefix(r0.size() + 1, 0.0);
    {
        KahanSum acc;
        for (std::size_t i = 0; i < r0.size(); ++i) {
            acc.add(r0[i]);
            r0_prefix[i + 1] = acc.value();
        }
    }
    const double h0_cdf = honest_initial_cdf(law, T - 1);
    auto initial_tail_at = [&](std::int64_t x0) {  // P{A0 >= x0, H0 <= T-1}
        const auto idx = static_cast<std::size_t>(
            std::min<std::int64_t>(x0, static_cast<std::int64_t>(r0.size())));
        const double v = h0_cdf - r0_prefix[idx];
        return v > 0.0 ? v : 0.0;
    };
    const double p_zero = initial_tail_at(T);

    // Per-epoch loop: exit-index terms, survival stopping, aggregated weights.
    std::vector<double> series_p{p_zero};
    double e_nu = 0.0;
    double survival = 1.0;
    double decay_ratio = 0.0;
    bool converged = false;
    int terms = 0;

    std::vector<double> tot, tot_acc;  // factorized: totals law and its running sum
    std::vector<double> dgrid, dacc;   // dense: joint box grid and its running sum

    if (out.backend_used == Backend::kFactorized) {
        const std::int64_t wmax = 2 * T - 2;
        const auto sw = static_cast<std::size_t>(wmax + 1);
        tot.assign(sw, 0.0);
        {
            double v = law.bbar0;
            for (std::size_t w = 0; w < sw; ++w) {
                tot[w] = v;
                v *= law.abar0;
            }
        }
        tot_acc.assign(sw, 0.0);
        std::vector<double> kker(sw, 0.0), binbox(sw, 0.0), brow;
        for (std::int64_t w = 0; w <= wmax; ++w) {
            const std::int64_t a_lo = std::max<std::int64_t>(0, w - (T - 1));
            const std::int64_t a_hi = std::min<std::int64_t>(w, T - 1);
            binomial_window(w, law.rho, a_lo, a_hi, brow);
            KahanSum kb, kk;
            for (std::int64_t a = a_lo; a <= a_hi; ++a) {
                const double b = brow[static_cast<std::size_t>(a - a_lo)];
                kb.add(b);
                kk.add(b * inc.g(T - a, T - 1 - (w - a)));
            }
            binbox[static_cast<std::size_t>(w)] = kb.value();
            kker[static_cast<std::size_t>(w)] = kk.value();
        }

        double prev_survival = 1.0;
        for (int n = 1; n <= options.max_terms; ++n) {
            KahanSum pk;
            for (std::size_t w = 0; w < sw; ++w) pk.add(tot[w] * kker[w]);
            const double pn = clamp_dust(pk.value());
            series_p.push_back(pn);
            e_nu += static_cast<double>(n) * pn;
            for (std::size_t w = 0; w < sw; ++w) tot_acc[w] += tot[w];
            double carry = 0.0;  // geometric filter advances the totals law
            for (std::size_t w = 0; w < sw; ++w) {
                carry = law.bbar * tot[w] + law.abar * carry;
                tot[w] = carry;
            }
            KahanSum sk;
            for (std::size_t w = 0; w < sw; ++w) sk.add(tot[w] * binbox[w]);
            const double s = sk.value();
            decay_ratio = prev_survival > 0.0 ? std::min(s / prev_survival, 1.0 - 1e-12) : 0.0;
            prev_survival = s;
            survival = s;
            terms = n;
            if (s < options.tolerance) {
                converged = true;
                break;
            }
        }
    } else {
        dgrid.assign(sT * sT, 0.0);
        dacc.assign(sT * sT, 0.0);
        {
            const double c = 1.0 + law.p0 + law.q0;
            for (std::int64_t x = 0; x < T; ++x)
                for (std::int64_t y = 0; y < T; ++y) {
                    double acc = (x == 0 && y == 0) ? 1.0 : 0.0;
                    if (x > 0)
                        acc += law.p0 *
                               dgrid[static_cast<std::size_t>(x - 1) * sT + static_cast<std::size_t>(y)];
                    if (y > 0)
                        acc += law.q0 *
                               dgrid[static_cast<std::size_t>(x) * sT + static_cast<std::size_t>(y - 1)];
                    dgrid[static_cast<std::size_t>(x) * sT + static_cast<std::size_t>(y)] = acc / c;
                }
        }
        std::vector<double> work(sT * sT, 0.0);
        double prev_survival = 1.0;
        for (int n = 1; n <= options.max_terms; ++n) {
            // p[n] = boxsum(D * gamma(1, v)) - boxsum(D * gamma(u, v)); the
            // second product, box-restricted, is also the next epoch's grid.
            KahanSum sum_univ;
            {
                const double c = 1.0 + law.q;
                for (std::int64_t x = 0; x < T; ++x) {
                    double prev = 0.0;
                    for (std::int64_t y = 0; y < T; ++y) {
                        prev = (dgrid[static_cast<std::size_t>(x) * sT + static_cast<std::size_t>(y)] +
                                law.q * prev) /
                               c;
                        sum_univ.add(prev);
                    }
                }
            }
            KahanSum sum_biv;
            {
                const double c = 1.0 + law.p + law.q;
                for (std::int64_t x = 0; x < T; ++x)
                    for (std::int64_t y = 0; y < T; ++y) {
                        double acc =
                            dgrid[static_cast<std::size_t>(x) * sT + static_cast<std::size_t>(y)];
                        if (x > 0)
                            acc += law.p * work[static_cast<std::size_t>(x - 1) * sT +
                                                static_cast<std::size_t>(y)];
                        if (y > 0)
                            acc += law.q * work[static_cast<std::size_t>(x) * sT +
                                                static_cast<std::size_t>(y - 1)];
                        const double v = acc / c;
                        work[static_cast<std::size_t>(x) * sT + static_cast<std::size_t>(y)] = v;
                        sum_biv.add(v);
                    }
            }
            const double pn = clamp_dust(sum_univ.value() - sum_biv.value());
            series_p.push_back(pn);
            e_nu += static_cast<double>(n) * pn;
            for (std::size_t i = 0; i < dgrid.size(); ++i) dacc[i] += dgrid[i];
            dgrid.swap(work);
            KahanSum sk;
            for (double v : dgrid) sk.add(v);
            const double s = sk.value();
            decay_ratio = prev_survival > 0.0 ? std::min(s / prev_survival, 1.0 - 1e-12) : 0.0;
            prev_survival = s;
            survival = s;
            terms = n;
            if (s < options.tolerance) {
                converged = true;
                break;
            }
        }
    }

    out.series.p = series_p;
    out.series.converged = converged;
    out.series.truncation_error_bound = survival;
    {
        KahanSum mass;
        for (double v : series_p) mass.add(v);
        out.series.total_mass = mass.value();
    }
    out.terms_used = terms;
    out.p_win = out.q0 = out.series.total_mass;
    out.p_prev_below_half = clamp_dust(out.p_win - p_zero);

    out.moments.exit_index_restricted = e_nu;
    out.moments.decision_time_restricted = law.d0 + law.d * (e_nu - 1.0);
    if (out.p_win > 0.0) {
        const double cond = e_nu / out.p_win;
        out.moments.exit_index_conditional = cond;
        out.moments.decision_time_conditional = law.d0 + law.d * (cond - 1.0);
    }
    {
        const double r = std::clamp(decay_ratio, 0.0, 1.0 - 1e-12);
        const double n1 = static_cast<double>(terms + 1);
        out.e_nu_tail_bound = survival * (n1 / (1.0 - r) + r / ((1.0 - r) * (1.0 - r)));
    }

    // Single sweep over the aggregated joint weights
    // Sum_{n>=1} P{A_{n-1}=a, H_{n-1}=h} for (a, h) in the box.
    std::vector<KahanSum> q1_acc(raised.size());
    std::vector<KahanSum> prev_acc(options.want_pmfs ? sT : 0);
    std::vector<KahanSum> exit_acc(options.want_pmfs ? static_cast<std::size_t>(tail + 1) : 0);

    auto absorb_cell = [&](std::int64_t a, std::int64_t h, double w) {
        if (w == 0.0) return;
        const std::int64_t y0 = T - 1 - h;
        for (std::size_t i = 0; i < raised.size(); ++i)
            q1_acc[i].add(w * inc.g(raised[i] - a, y0));
        if (!options.want_pmfs) return;
        prev_acc[static_cast<std::size_t>(a)].add(w * inc.g(T - a, y0));
        for (std::int64_t l = T; l <= T + tail; ++l)
            exit_acc[static_cast<std::size_t>(l - T)].add(w * inc.j(l - a, y0));
    };

    if (out.backend_used == Backend::kFactorized) {
        std::vector<double> row;
        for (std::int64_t a = 0; a < T; ++a) {
            nb_window(a, law.rho, law.sigma, T - 1, row);
            for (std::int64_t h = 0; h < T; ++h)
                absorb_cell(a, h,
                            tot_acc[static_cast<std::size_t>(a + h)] *
                                row[static_cast<std::size_t>(h)]);
        }
    } else {
        for (std::int64_t a = 0; a < T; ++a)
            for (std::int64_t h = 0; h < T; ++h)
                absorb_cell(a, h, dacc[static_cast<std::size_t>(a) * sT + static_cast<std::size_t>(h)]);
    }

    for (std::size_t i = 0; i < raised.size(); ++i) {
        const double v = clamp_dust(q1_acc[i].value() + initial_tail_at(raised[i]));
        out.q1.push_back({options.alphas[i], raised[i], std::min(v, out.p_win)});
    }

    if (options.want_pmfs) {
        out.pmf_attacker_prev.support_note = note_prev;
        out.pmf_attacker_exit.support_note = note_exit;
        out.pmf_attacker_prev.total_mass = out.p_win;
        out.pmf_attacker_exit.total_mass = out.p_win;

        KahanSum tab_prev, tab_exit;
        for (std::int64_t k = 0; k < T; ++k) {
            const double v = clamp_dust(prev_acc[static_cast<std::size_t>(k)].value());
            out.pmf_attacker_prev.pmf[k] = v;
            tab_prev.add(v);
        }
        // Tabulated extent: smallest with remaining lump below tolerance.
        int used_tail = tail;
        {
            double cum = 0.0;
            for (int t = 0; t <= tail; ++t) {
                cum += exit_acc[static_cast<std::size_t>(t)].value() +
                       r0[static_cast<std::size_t>(T + t)];
                if (out.p_win - cum < options.tolerance) {
                    used_tail = t;
                    break;
                }
            }
        }
        for (std::int64_t l = T; l <= T + used_tail; ++l) {
            const double init_part = r0[static_cast<std::size_t>(l)];
            out.pmf_attacker_prev.pmf[l] = clamp_dust(init_part);
            tab_prev.add(init_part);
            const double both =
                clamp_dust(exit_acc[static_cast<std::size_t>(l - T)].value() + init_part);
            out.pmf_attacker_exit.pmf[l] = both;
            tab_exit.add(both);
        }
        out.pmf_attacker_prev.lump_mass = clamp_dust(out.p_win - tab_prev.value());
        out.pmf_attacker_prev.lump_start = T + used_tail + 1;
        out.pmf_attacker_exit.lump_mass = clamp_dust(out.p_win - tab_exit.value());
        out.pmf_attacker_exit.lump_start = T + used_tail + 1;
    }

    return out;
}

}  // namespace bgg
