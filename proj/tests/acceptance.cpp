// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "ids/criteria_lmi.hpp"
#include "ids/margin.hpp"
#include "ids/selftest.hpp"
#include "ids/simulator.hpp"
#include "ids/spectral.hpp"

using namespace ids;

namespace {

constexpr std::uint64_t kSeed = 20140528;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string cell(const std::optional<double>& v) { return v ? margin::format_number(*v) : "inf"; }

void table_reproduction() {
    // Rows τ₁ = 0.4, 0.3, 0.2, 0.1; columns th2-lmi, amc, single, spectral.
    const std::optional<double> inf;
    const std::vector<std::vector<std::optional<double>>> expected = {
        {0.0317, inf, inf, inf},
        {0.1146, 0.0474, 0.0474, 0.0474},
        {0.2418, 0.1527, 0.1527, 0.1527},
        {0.4882, 0.3414, 0.3414, 0.3414},
    };
    const auto start = std::chrono::steady_clock::now();
    const auto table = margin::table1({}, false);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    bool ok = table.rows.size() == expected.size();
    double worst = 0.0;
    std::string cells;
    for (std::size_t r = 0; ok && r < expected.size(); ++r) {
        for (std::size_t c = 0; c < expected[r].size(); ++c) {
            const auto& got = table.rows[r].margins.at(c);
            const auto& want = expected[r][c];
            if (got.has_value() != want.has_value()) {
                ok = false;
            } else if (want) {
                worst = std::max(worst, std::abs(*got - *want));
            }
            cells += (cells.empty() ? "" : " ") + cell(got);
        }
    }
    ok = ok && worst <= 2e-3 && seconds <= 300.0;
    report(1, ok, fmt("max |margin error| %.2e (tol 2e-3), single-threaded %.1f s (budget 300 s); cells: %s", worst,
                      seconds, cells.c_str()));
}

void single_delay_margin() {
    const auto sys = validate_system({reference_a1()}, {0.1});
    const auto m = margin::bisect_margin(sys, 0, margin::Criterion::amc, margin::table1_probe_lo,
                                         margin::default_upper_bracket(sys));
    const double rho = spectral_radius(reference_a1() * 0.4473);
    const bool ok = m && std::abs(*m - 0.4473) <= 1e-3 && std::abs(rho - 0.9999) <= 1e-3;
    report(2, ok, fmt("amc margin %s (want 0.4473 +- 1e-3), rho(0.4473 A1) = %.6g (want 0.9999 +- 1e-3)",
                      cell(m).c_str(), rho));
}

void weighted_spectral() {
    const auto sys = reference_system(0.4, 0.02);
    const double rho = spectral::check_spectral_weighted(sys, {0.9, 0.1}).rho;
    const auto opt = spectral::optimize_weights(sys);
    const bool ok = std::abs(rho - 0.9783) <= 1e-3 && opt.rho <= 0.9783 + 1e-6;
    report(3, ok, fmt("rho at alpha (0.9, 0.1) = %.6g (want 0.9783 +- 1e-3), optimized rho* = %.6g at alpha1 = %.4g", rho,
                      opt.rho, opt.alpha[0]));
}

void corpus_suites(const std::vector<IdsSystem>& corpus) {
    const auto eq = selftest::equivalence_stats(corpus);
    report(4, eq.systems == 100 && eq.disagreements == 0,
           fmt("%zu systems, %zu all-feasible, %zu disagreements among amc, th2-coupled, single, spectral", eq.systems,
               eq.feasible, eq.disagreements));

    const auto ord = selftest::ordering_stats(corpus);
    const bool ok = ord.ordering_violations == 0 && ord.coupled_conversion_failures == 0 &&
                    ord.stacked_conversion_failures == 0 && ord.coupled_conversions == ord.coupled_feasible;
    report(5, ok,
           fmt("%zu th2-coupled feasible, %zu ordering violations; coupled conversions %zu ok / %zu failed, "
               "th2-lmi conversions %zu ok / %zu failed",
               ord.coupled_feasible, ord.ordering_violations, ord.coupled_conversions, ord.coupled_conversion_failures,
               ord.stacked_conversions, ord.stacked_conversion_failures));
}

void factorization(const std::vector<IdsSystem>& corpus) {
    double worst = 0.0;
    for (const auto& sys : corpus) {
        const double a = spectral_radius(spectral::operator_block(sys));
        const double b = spectral_radius(spectral::kronecker_sum(sys));
        worst = std::max(worst, std::abs(a - b) / std::max(b, 1e-300));
    }
    report(6, corpus.size() == 100 && worst <= 1e-10,
           fmt("%zu systems, max relative difference %.2e (tol 1e-10)", corpus.size(), worst));
}

void jensen_suites() {
    const auto st = selftest::jensen_stats(kSeed, 10000);
    const bool ok = st.draws == 10000 && st.discrete_worst >= -1e-12 && st.quadrature_worst >= 0.0 &&
                    st.dominance_violations == 0 && st.convergence_order >= 1.9;
    report(7, ok,
           fmt("%zu draws; worst discrete gap %.2e (>= -1e-12); worst gap + eps_quad %.2e (>= 0); dominance "
               "violations %zu; convergence order %.4g (>= 1.9)",
               st.draws, st.discrete_worst, st.quadrature_worst, st.dominance_violations, st.convergence_order));
}

void simulator_checks() {
    const double h = 0.01;
    const auto sys = reference_system(0.3, 0.11);
    const auto tr = sim::simulate(sys, sim::HistorySpec::make_random_smooth(kSeed), h, 20.0);
    const double beta = tr.decay_fit ? tr.decay_fit->beta : NAN;

    // V(t_{k+1}) ≤ V(t_k) + ε_V with ε_V = h²·V(0), functional from a stacked-LMI witness.
    bool lyap_ok = false;
    double worst = NAN, eps_v = NAN;
    const auto r = lmi::solve_feasibility(criteria::build_stacked_lmi(sys));
    if (r.feasible()) {
        const auto w = sim::th2_functional_witness(sys, criteria::q_list(r.witness, 2));
        const double tau = static_cast<double>(tr.history_steps) * h;
        const auto last = static_cast<std::size_t>(std::floor((tr.t_final - tau) / h + 1e-9));
        double prev = sim::eval_functional(sys, tr, sim::Functional::th2, w, 0.0);
        eps_v = h * h * prev;
        worst = -INFINITY;
        for (std::size_t k = 1; k <= last; ++k) {
            const double v = sim::eval_functional(sys, tr, sim::Functional::th2, w, static_cast<double>(k) * h);
            worst = std::max(worst, v - prev);
            prev = v;
        }
        lyap_ok = worst <= eps_v;
    }

    const auto grow = sim::simulate(validate_system({Matrix{{2.0}}}, {1.0}), sim::HistorySpec::make_constant({1.0}),
                                    0.01, 20.0);
    const double growth = grow.max_norm_after_zero() / grow.history_norm;

    const auto hist = sim::HistorySpec::make_random_smooth(kSeed);
    const auto a = sim::simulate(reference_system(0.3, 0.1), hist, 0.01, 3.0);
    const auto b = sim::simulate(reference_system(0.3, 0.1), hist, 0.005, 3.0);
    const auto c = sim::simulate(reference_system(0.3, 0.1), hist, 0.0025, 3.0);
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t j = 1; j <= a.steps(); ++j) {
        for (std::size_t k = 0; k < 2; ++k) {
            d1 = std::max(d1, std::abs(a.at_step(j)[k] - b.at_step(2 * j)[k]));
            d2 = std::max(d2, std::abs(b.at_step(2 * j)[k] - c.at_step(4 * j)[k]));
        }
    }
    const double order = std::log2(d1 / d2);

    const bool ok = beta > 0.0 && lyap_ok && growth > 1e3 && order >= 1.8;
    report(8, ok,
           fmt("beta %.4g (> 0); max V increase %.2e vs eps_V %.2e; a=2 tau=1 growth %.3g x (> 1e3); step-halving "
               "order %.4g (>= 1.8)",
               beta, worst, eps_v, growth, order));
}

std::pair<int, std::string> run_selftest() {
    const std::string cmd = std::string(IDS_STAB_PATH) + " selftest --seed 7 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, ""};
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

void determinism() {
    const auto first = run_selftest();
    const auto second = run_selftest();
    const bool ok = first.first == second.first && first.second == second.second && !first.second.empty();
    report(9, ok, fmt("selftest --seed 7 twice: exit codes %d/%d, reports %s (%zu bytes)", first.first, second.first,
                      first.second == second.second ? "identical" : "differ", first.second.size()));
}

}  // namespace

int main() {
    const auto corpus = selftest::random_corpus(kSeed, 100);
    table_reproduction();
    single_delay_margin();
    weighted_spectral();
    corpus_suites(corpus);
    factorization(corpus);
    jensen_suites();
    simulator_checks();
    determinism();
    std::printf("%s\n", failures == 0 ? "all criteria passed" : "some criteria FAILED");
    return failures == 0 ? 0 : 1;
}
