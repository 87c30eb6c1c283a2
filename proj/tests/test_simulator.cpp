#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ids/criteria_lmi.hpp"
#include "ids/selftest.hpp"
#include "ids/simulator.hpp"
#include "ids/spectral.hpp"

using namespace ids;
using namespace ids::sim;

namespace {

double norm(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

// Positive root of s = 2(1 − e^{−s}) by bisection.
double scalar_growth_root() {
    double lo = 0.5, hi = 3.0;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (mid - 2.0 * (1.0 - std::exp(-mid)) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Largest one-step increase of V over t ∈ [0, T − τ] on the grid, and V(0).
std::pair<double, double> worst_increase(const IdsSystem& sys, const Trajectory& tr, Functional which,
                                         const FunctionalWitness& w) {
    const double tau = static_cast<double>(tr.history_steps) * tr.h;
    const auto last = static_cast<std::size_t>(std::floor((tr.t_final - tau) / tr.h + 1e-9));
    double prev = eval_functional(sys, tr, which, w, 0.0), v0 = prev, worst = -1e300;
    for (std::size_t k = 1; k <= last; ++k) {
        const double v = eval_functional(sys, tr, which, w, static_cast<double>(k) * tr.h);
        worst = std::max(worst, v - prev);
        prev = v;
    }
    return {worst, v0};
}

}  // namespace

TEST_CASE("zero system dies at t = 0") {
    const auto sys = validate_system({Matrix(2, 2)}, {1.0});
    const auto tr = simulate(sys, HistorySpec::make_random_smooth(3), 0.05, 6.0);
    CHECK(norm(tr.x0_plus) == 0.0);
    for (std::size_t j = 1; j <= tr.steps(); ++j) CHECK(norm(tr.at_step(j)) == 0.0);
    CHECK(tr.max_norm_after_zero() == 0.0);
    REQUIRE(tr.decay_fit);
    CHECK(std::isinf(tr.decay_fit->beta));
    CHECK(tr.history_norm > 0.0);
}

TEST_CASE("constant history: closed form on the first delay interval") {
    // x = a(τ − t)c + a∫₀ᵗx gives x(t) = c + (aτc − c)e^{at} on (0, τ].
    const double a = -1.5, tau = 0.8, c = 2.0, h = 0.001;
    const auto tr = simulate(validate_system({Matrix{{a}}}, {tau}), HistorySpec::make_constant({c}), h, tau);
    CHECK(tr.x0_plus[0] == doctest::Approx(a * tau * c));
    double err = 0.0;
    for (std::size_t j = 1; j <= tr.steps(); ++j) {
        const double t = static_cast<double>(j) * h;
        err = std::max(err, std::abs(tr.at_step(j)[0] - (c + (a * tau * c - c) * std::exp(a * t))));
    }
    CHECK(err < 1e-5);
    CHECK(tr.max_residual <= 1e-10);
}

TEST_CASE("scalar a = 2, tau = 1 grows at the characteristic rate") {
    const auto tr = simulate(validate_system({Matrix{{2.0}}}, {1.0}), HistorySpec::make_constant({1.0}), 0.005, 20.0);
    CHECK(tr.max_norm_after_zero() > 1e3);
    CHECK_FALSE(tr.decay_fit.has_value());
    const std::size_t j1 = tr.steps(), j0 = j1 - 200;  // the last time unit
    const double rate = std::log(std::abs(tr.at_step(j1)[0]) / std::abs(tr.at_step(j0)[0]));
    CHECK(std::abs(rate - scalar_growth_root()) < 1e-3);
}

TEST_CASE("reference system decays at tau = (0.3, 0.11)") {
    const auto tr = simulate(reference_system(0.3, 0.11), HistorySpec::make_random_smooth(20140528), 0.01, 20.0);
    REQUIRE(tr.decay_fit);
    CHECK(tr.decay_fit->beta > 0.0);
    CHECK(tr.decay_fit->alpha > 0.0);
    CHECK(tr.max_residual <= 1e-10);
    CHECK(tr.delay_steps == std::vector<std::size_t>{30, 11});
    CHECK(std::abs(tr.snap_error[0]) < 1e-12);
    const auto again = estimate_decay(tr);
    REQUIRE(again);
    CHECK(again->beta == tr.decay_fit->beta);
}

TEST_CASE("step halving shows second order") {
    const auto sys = reference_system(0.3, 0.1);
    const auto hist = HistorySpec::make_random_smooth(5);
    const double h = 0.01, t_final = 3.0;
    const auto a = simulate(sys, hist, h, t_final);
    const auto b = simulate(sys, hist, h / 2, t_final);
    const auto c = simulate(sys, hist, h / 4, t_final);
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t j = 1; j <= a.steps(); ++j) {
        for (std::size_t k = 0; k < 2; ++k) {
            d1 = std::max(d1, std::abs(a.at_step(j)[k] - b.at_step(2 * j)[k]));
            d2 = std::max(d2, std::abs(b.at_step(2 * j)[k] - c.at_step(4 * j)[k]));
        }
    }
    CHECK(std::log2(d1 / d2) >= 1.8);
}

TEST_CASE("delay snapping is reported") {
    const auto tr = simulate(reference_system(0.3, 0.105), HistorySpec::make_random_smooth(1), 0.01, 1.0);
    CHECK(tr.delay_steps[1] == 11);  // round(10.5) away from zero
    CHECK(tr.snapped_tau[1] == doctest::Approx(0.11));
    CHECK(tr.snap_error[1] == doctest::Approx(0.005));
}

TEST_CASE("functionals") {
    SUBCASE("zero trajectory gives zero") {
        const auto sys = validate_system({Matrix(2, 2)}, {0.5});
        const auto tr = simulate(sys, HistorySpec::make_constant({0.0, 0.0}), 0.05, 2.0);
        FunctionalWitness w{Matrix::identity(2), {Matrix::identity(2)}};
        CHECK(eval_functional(sys, tr, Functional::amc, w, 0.5) == 0.0);
        CHECK(eval_functional(sys, tr, Functional::th1, w, 1.0) == 0.0);
    }
    SUBCASE("constant trajectory closed form") {
        // aτ = 1 keeps x ≡ c.
        const double tau = 0.5, c = 1.5, p = 2.0, q = 3.0;
        const auto sys = validate_system({Matrix{{1.0 / tau}}}, {tau});
        const auto tr = simulate(sys, HistorySpec::make_constant({c}), 0.01, 3.0);
        for (std::size_t j = 1; j <= tr.steps(); ++j) CHECK(tr.at_step(j)[0] == doctest::Approx(c).epsilon(1e-12));
        FunctionalWitness w{Matrix{{p}}, {Matrix{{q}}}};
        const double want = tau * c * p * c + tau * tau / 2.0 * c * q * c;
        CHECK(eval_functional(sys, tr, Functional::amc, w, 1.0) == doctest::Approx(want).epsilon(1e-12));
    }
    SUBCASE("range and shape errors") {
        const auto sys = reference_system(0.3, 0.1);
        const auto tr = simulate(sys, HistorySpec::make_random_smooth(2), 0.01, 2.0);
        FunctionalWitness w{Matrix::identity(2), {Matrix::identity(2), Matrix::identity(2)}};
        CHECK_THROWS_AS(eval_functional(sys, tr, Functional::amc, w, 1.8), SimulationError);
        CHECK_THROWS_AS(eval_functional(sys, tr, Functional::amc, w, -0.1), SimulationError);
        FunctionalWitness bad{Matrix::identity(3), {Matrix::identity(2), Matrix::identity(2)}};
        CHECK_THROWS_AS(eval_functional(sys, tr, Functional::amc, bad, 0.5), SimulationError);
        FunctionalWitness short_w{Matrix::identity(2), {Matrix::identity(2)}};
        CHECK_THROWS_AS(eval_functional(sys, tr, Functional::th1, short_w, 0.5), SimulationError);
    }
    CHECK(parse_functional("th2") == Functional::th2);
    CHECK_THROWS_AS(parse_functional("nope"), SimulationError);
}

TEST_CASE("functionals are nonincreasing along stable trajectories") {
    // ε_V = h²·V(0): the one-step increase allowed by the quadrature error.
    const double h = 0.01;
    SUBCASE("stacked LMI witness") {
        const auto sys = reference_system(0.3, 0.11);
        const auto r = lmi::solve_feasibility(criteria::build_stacked_lmi(sys));
        REQUIRE(r.feasible());
        const auto w = th2_functional_witness(sys, criteria::q_list(r.witness, 2));
        CHECK(w.delta > 0.0);
        CHECK(w.epsilon > 0.0);
        const auto tr = simulate(sys, HistorySpec::make_random_smooth(20140528), h, 10.0);
        const auto [worst, v0] = worst_increase(sys, tr, Functional::th2, w);
        CHECK(v0 > 0.0);
        CHECK(worst <= h * h * v0);
    }
    SUBCASE("slack LMI witness") {
        const auto sys = reference_system(0.3, 0.1);
        const auto r = lmi::solve_feasibility(criteria::build_slack_lmi(sys));
        REQUIRE(r.feasible());
        const auto rec = criteria::recover_split_nmi(r.witness, 2);
        const auto w = th1_functional_witness(rec.s, rec.q);
        const auto tr = simulate(sys, HistorySpec::make_random_smooth(8), h, 10.0);
        const auto [worst, v0] = worst_increase(sys, tr, Functional::th1, w);
        CHECK(v0 > 0.0);
        CHECK(worst <= h * h * v0);
    }
    SUBCASE("amc witness") {
        const auto sys = reference_system(0.3, 0.04);
        const auto r = lmi::solve_feasibility(criteria::build_amc(sys));
        REQUIRE(r.feasible());
        FunctionalWitness w{r.witness.at("P"), criteria::q_list(r.witness, 2)};
        const double hs = 0.005;  // τ₂/8
        const auto tr = simulate(sys, HistorySpec::make_random_smooth(9), hs, 10.0);
        const auto [worst, v0] = worst_increase(sys, tr, Functional::amc, w);
        CHECK(v0 > 0.0);
        CHECK(worst <= hs * hs * v0);
    }
}

TEST_CASE("functional witness helpers") {
    CHECK_THROWS_AS(th2_functional_witness(validate_system({Matrix{{1.0}}}, {2.0}), {Matrix{{1.0}}}), SimulationError);
    const auto w = th2_functional_witness(validate_system({Matrix{{1.0}}}, {0.5}), {Matrix{{1.0}}});
    // G = 0.25 − 1: δ = 0.75/1, ε = min(1, 0.375).
    CHECK(w.delta == doctest::Approx(0.75));
    CHECK(w.epsilon == doctest::Approx(0.375));
    const auto t1 = th1_functional_witness({Matrix{{0.25}}}, {Matrix{{1.0}}});
    CHECK(t1.p(0, 0) == doctest::Approx(0.375));
    CHECK_THROWS_AS(th1_functional_witness({Matrix{{2.0}}}, {Matrix{{1.0}}}), SimulationError);
}

TEST_CASE("simulate rejects bad inputs") {
    const auto sys = reference_system(0.3, 0.1);
    const auto hist = HistorySpec::make_random_smooth(1);
    CHECK_THROWS_AS(simulate(sys, hist, 0.02, 5.0), SimulationError);   // h > τ₂/8
    CHECK_THROWS_AS(simulate(sys, hist, 0.0, 5.0), SimulationError);
    CHECK_THROWS_AS(simulate(sys, hist, 0.01, 0.2), SimulationError);   // T < τ
    CHECK_THROWS_AS(simulate(sys, HistorySpec::make_constant({1.0}), 0.01, 1.0), SimulationError);
    // h/2 · a = 1 makes the implicit step singular.
    CHECK_THROWS_AS(simulate(validate_system({Matrix{{200.0}}}, {1.0}), HistorySpec::make_constant({1.0}), 0.01, 1.0),
                    SimulationError);
    const auto shortrun = simulate(sys, hist, 0.01, 1.0);
    CHECK_FALSE(shortrun.decay_fit.has_value());
    CHECK_THROWS_AS(estimate_decay(shortrun), SimulationError);
}

TEST_CASE("histories") {
    const auto f = make_history(HistorySpec::make_sampled({{0.0}, {2.0}, {4.0}}), 1, 1.0);
    CHECK(f(-1.0)[0] == doctest::Approx(0.0));
    CHECK(f(-0.25)[0] == doctest::Approx(3.0));
    CHECK(f(0.0)[0] == doctest::Approx(4.0));
    const auto g1 = make_history(HistorySpec::make_random_smooth(4), 3, 0.5);
    const auto g2 = make_history(HistorySpec::make_random_smooth(4), 3, 0.5);
    CHECK(g1(-0.2) == g2(-0.2));
    CHECK(g1(-0.2) != make_history(HistorySpec::make_random_smooth(5), 3, 0.5)(-0.2));
    // Continuity.
    CHECK(norm({g1(-0.1)[0] - g1(-0.1 + 1e-9)[0]}) < 1e-6);

    const auto sys = validate_system({Matrix{{-1.0}}}, {1.0});
    const auto tr = simulate(sys, HistorySpec::make_sampled({{1.0}, {0.0}, {1.0}}), 0.1, 2.0);
    CHECK(tr.samples.front()[0] == doctest::Approx(1.0));
    CHECK(tr.samples[5][0] == doctest::Approx(0.0));
}

TEST_CASE("simulation is deterministic") {
    const auto sys = reference_system(0.3, 0.11);
    const auto a = simulate(sys, HistorySpec::make_random_smooth(77), 0.01, 3.0);
    const auto b = simulate(sys, HistorySpec::make_random_smooth(77), 0.01, 3.0);
    CHECK(a.samples == b.samples);
}

TEST_CASE("CSV export") {
    const auto sys = reference_system(0.3, 0.105);
    const auto tr = simulate(sys, HistorySpec::make_random_smooth(1), 0.01, 1.0);  // too short for a fit
    std::ostringstream out;
    write_csv(out, tr);
    std::istringstream in(out.str());
    std::string line;
    int comments = 0, rows = 0;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.starts_with("#")) {
            ++comments;
        } else if (!header) {
            CHECK(line == "t, x1, x2");
            header = true;
        } else {
            ++rows;
        }
    }
    CHECK(header);
    CHECK(comments == 2);  // snapping lines only: too short for a fit
    CHECK(rows == static_cast<int>(tr.samples.size()));
    CHECK(out.str().find("# tau2 snapped to 0.11 (error 0.005)") != std::string::npos);

    std::ostringstream grow;
    write_csv(grow, simulate(validate_system({Matrix{{2.0}}}, {1.0}), HistorySpec::make_constant({1.0}), 0.1, 6.0));
    CHECK(grow.str().find("# decay fit: none\n") != std::string::npos);
    std::ostringstream decay;
    write_csv(decay, simulate(reference_system(0.3, 0.11), HistorySpec::make_random_smooth(1), 0.01, 5.0));
    CHECK(decay.str().find("# decay fit: alpha = ") != std::string::npos);
}

TEST_CASE("spectral pass implies observed decay on the corpus") {
    int checked = 0;
    for (const auto& sys : selftest::random_corpus(71, 60)) {
        if (!spectral::check_spectral(sys).pass) continue;
        double tau_min = sys.tau(0);
        for (std::size_t i = 1; i < sys.terms(); ++i) tau_min = std::min(tau_min, sys.tau(i));
        const double h = tau_min / 16.0;
        const auto tr = simulate(sys, HistorySpec::make_random_smooth(3), h, 10.0 * sys.tau_max());
        REQUIRE(tr.decay_fit);
        CHECK(tr.decay_fit->beta > 0.0);
        if (++checked == 15) break;
    }
    CHECK(checked > 5);
}
