#include "bgg/marginals.hpp"

#include "bgg/analysis.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bgg;

namespace {

const NetworkParams kMicro{2, 1.0, 0.0, 1.0, 1.0};
const NetworkParams kReference{20, 1.0, 2.0, 1.0, 1.0};

}  // namespace

TEST_CASE("micro-case marginals by enumeration") {
    const auto terms = derive_geometric_terms(kMicro);

    SUBCASE("exit-index mean and decision time") {
        CHECK(expected_exit_index(kMicro, terms, 1e-12) == doctest::Approx(1.0).epsilon(1e-9));
        const auto m = expected_decision_time(kMicro, terms, 1e-12);
        CHECK(m.decision_time_restricted == doctest::Approx(1.0).epsilon(1e-9));
        REQUIRE(m.exit_index_conditional.has_value());
        CHECK(*m.exit_index_conditional == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(*m.decision_time_conditional == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("attacker-prev law carries the initial law above threshold at nu=0") {
        const auto d = pmf_attacker_prev(kMicro, terms, 1e-12);
        CHECK(d.total_mass == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(d.pmf.at(0) == doctest::Approx(0.5).epsilon(1e-9));
        for (int k = 1; k <= 6; ++k)
            CHECK(d.pmf.at(k) ==
                  doctest::Approx(0.25 * std::pow(0.5, k - 1)).epsilon(1e-9));
    }
}

TEST_CASE("zero attacker rate yields empty distributions") {
    const NetworkParams p{20, 0.0, 2.0, 1.0, 1.0};
    const auto terms = derive_geometric_terms(p);
    CHECK(expected_exit_index(p, terms, 1e-12) == 0.0);
    const auto prev = pmf_attacker_prev(p, terms, 1e-12);
    CHECK(prev.total_mass == 0.0);
    CHECK_THROWS(prev.conditional());
    const auto b = burst_probabilities(p, terms, 0.3, 1e-12);
    CHECK(b.q0 == 0.0);
    CHECK(b.q1_alpha == 0.0);
    CHECK(b.p_prev_below_half == 0.0);
}

TEST_CASE("exit law lives at or above the threshold") {
    const auto terms = derive_geometric_terms(kReference);
    const auto d = pmf_attacker_exit(kReference, terms, 1e-12, 40);
    const std::int64_t threshold = majority_threshold(kReference.total_nodes);
    for (const auto& [k, v] : d.pmf) {
        CHECK(k >= threshold);
        CHECK(v >= 0.0);
    }
    double tab = d.lump_mass;
    for (const auto& [k, v] : d.pmf) tab += v;
    CHECK(tab == doctest::Approx(d.total_mass).epsilon(1e-9));
}

TEST_CASE("trace masses agree across laws") {
    AnalysisOptions opt;
    opt.tolerance = 1e-13;
    const auto r = run_exit_analysis(kReference, opt);
    CHECK(r.pmf_attacker_prev.total_mass == doctest::Approx(r.series.total_mass).epsilon(1e-9));
    CHECK(r.pmf_attacker_exit.total_mass == doctest::Approx(r.series.total_mass).epsilon(1e-9));

    double prev_tab = r.pmf_attacker_prev.lump_mass;
    for (const auto& [k, v] : r.pmf_attacker_prev.pmf) prev_tab += v;
    CHECK(prev_tab == doctest::Approx(r.series.total_mass).epsilon(1e-9));

    // Below-threshold mass plus the nu=0 branch reconstructs the trace.
    const std::int64_t threshold = majority_threshold(kReference.total_nodes);
    double below = 0.0, above = r.pmf_attacker_prev.lump_mass;
    for (const auto& [k, v] : r.pmf_attacker_prev.pmf) (k < threshold ? below : above) += v;
    CHECK(below == doctest::Approx(r.p_prev_below_half).epsilon(1e-9));
    CHECK(below + above == doctest::Approx(r.p_win).epsilon(1e-9));
}

TEST_CASE("decision-time identity holds by construction across random sweeps") {
    std::mt19937_64 gen(555);
    std::uniform_real_distribution<double> unif(0.1, 3.0);
    for (int i = 0; i < 20; ++i) {
        NetworkParams p;
        p.total_nodes = 2 + static_cast<std::int64_t>(gen() % 30);
        p.lambda_attacker = unif(gen);
        p.lambda_honest = unif(gen);
        p.mean_initial_observation = unif(gen);
        p.mean_observation_gap = unif(gen);
        const auto terms = derive_geometric_terms(p);
        const double e_nu = expected_exit_index(p, terms, 1e-12);
        const auto m = expected_decision_time(p, terms, 1e-12);
        const double composed =
            p.mean_initial_observation + p.mean_observation_gap * (e_nu - 1.0);
        CHECK(std::abs(m.decision_time_restricted - composed) <= 1e-12);
    }
}

TEST_CASE("burst probabilities") {
    const auto terms = derive_geometric_terms(kReference);

    SUBCASE("alpha 0 coincides with q0") {
        const auto b = burst_probabilities(kReference, terms, 0.0, 1e-12);
        CHECK(b.q1_alpha == doctest::Approx(b.q0).epsilon(1e-12));
    }
    SUBCASE("alpha 1 tails beyond the full node count") {
        const auto b = burst_probabilities(kReference, terms, 1.0, 1e-12);
        const auto d = pmf_attacker_exit(kReference, terms, 1e-12, 60);
        double tail = d.lump_mass;
        for (const auto& [k, v] : d.pmf)
            if (k >= kReference.total_nodes) tail += v;
        CHECK(b.q1_alpha == doctest::Approx(tail).epsilon(1e-9));
    }
    SUBCASE("nonincreasing in alpha, exactly") {
        AnalysisOptions opt;
        opt.tolerance = 1e-13;
        for (double a = 0.0; a <= 1.0; a += 0.05) opt.alphas.push_back(a);
        const auto r = run_exit_analysis(kReference, opt);
        for (std::size_t i = 1; i < r.q1.size(); ++i)
            CHECK(r.q1[i].q1 <= r.q1[i - 1].q1 + 1e-15);
    }
}

TEST_CASE("q1 tail matches the tabulated exit-law tail") {
    const auto terms = derive_geometric_terms(kReference);
    const auto d = pmf_attacker_exit(kReference, terms, 1e-12, 60);
    const auto b = burst_probabilities(kReference, terms, 0.2, 1e-12);
    const std::int64_t t_raised = raised_threshold(kReference.total_nodes, 0.2);
    double tail = d.lump_mass;
    for (const auto& [k, v] : d.pmf)
        if (k >= t_raised) tail += v;
    CHECK(b.q1_alpha == doctest::Approx(tail).epsilon(1e-9));
}
