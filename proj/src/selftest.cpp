#include "ids/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "ids/criteria_lmi.hpp"
#include "ids/jensen.hpp"
#include "ids/margin.hpp"
#include "ids/spectral.hpp"

namespace ids::selftest {

namespace {

using Rng = std::mt19937_64;

std::string fmt(const char* pattern, double v) {
    char buf[128];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Matrix random_matrix(Rng& rng, std::size_t n) {
    Matrix m(n, n);
    for (double& v : m.data()) v = uniform(rng, -1.0, 1.0);
    return m;
}

Matrix random_pd(Rng& rng, std::size_t n) {
    const Matrix g = random_matrix(rng, n);
    return g * g.transpose() + Matrix::identity(n) * 0.1;
}

std::vector<double> random_vector(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform(rng, -1.0, 1.0);
    return v;
}

// c₀ + c₁s + c₂ sin(b s + p) per component.
struct SmoothFunction {
    std::vector<double> c0, c1, c2, b, p;

    static SmoothFunction draw(Rng& rng, std::size_t n) {
        SmoothFunction f;
        for (std::size_t k = 0; k < n; ++k) {
            f.c0.push_back(uniform(rng, -1.0, 1.0));
            f.c1.push_back(uniform(rng, -1.0, 1.0));
            f.c2.push_back(uniform(rng, -1.0, 1.0));
            f.b.push_back(uniform(rng, 0.5, 4.0));
            f.p.push_back(uniform(rng, 0.0, 6.283185307179586));
        }
        return f;
    }

    jensen::SampledFunction sample(double tau, std::size_t m) const {
        return jensen::SampledFunction::sample(tau, m, [this](double s) {
            std::vector<double> v(c0.size());
            for (std::size_t k = 0; k < v.size(); ++k) v[k] = c0[k] + c1[k] * s + c2[k] * std::sin(b[k] * s + p[k]);
            return v;
        });
    }
};

}  // namespace

std::vector<IdsSystem> random_corpus(std::uint64_t seed, std::size_t count) {
    Rng rng(seed);
    std::vector<IdsSystem> out;
    while (out.size() < count) {
        const std::size_t n = pick(rng, 1, 3);
        const std::size_t terms = pick(rng, 1, 3);
        std::vector<Matrix> a;
        std::vector<double> tau;
        for (std::size_t i = 0; i < terms; ++i) {
            a.push_back(random_matrix(rng, n));
            tau.push_back(uniform(rng, 0.05, 1.0));
        }
        IdsSystem sys = validate_system(std::move(a), std::move(tau));
        const double n_rho = static_cast<double>(terms) * spectral::check_spectral(sys).rho;
        if (std::abs(n_rho - 1.0) > 0.05) out.push_back(std::move(sys));
    }
    return out;
}

JensenStats jensen_stats(std::uint64_t seed, std::size_t draws) {
    Rng rng(seed);
    JensenStats st;
    st.draws = draws;
    st.discrete_worst = std::numeric_limits<double>::infinity();
    st.quadrature_worst = std::numeric_limits<double>::infinity();
    double coarse_diff = 0.0, fine_diff = 0.0;

    for (std::size_t d = 0; d < draws; ++d) {
        const std::size_t n = pick(rng, 1, 3);
        const std::size_t terms = pick(rng, 1, 3);
        const std::size_t m = pick(rng, 8, 256);

        const Matrix q = random_pd(rng, n);
        std::vector<Matrix> qs;
        std::vector<std::vector<double>> xi;
        std::vector<SmoothFunction> fns;
        std::vector<jensen::SampledFunction> omegas;
        double weight_bound = 0.0;
        for (std::size_t i = 0; i < terms; ++i) {
            qs.push_back(random_pd(rng, n));
            xi.push_back(random_vector(rng, n));
            fns.push_back(SmoothFunction::draw(rng, n));
            const double tau = uniform(rng, 0.05, 2.0);
            omegas.push_back(fns.back().sample(tau, m));
            weight_bound = std::max(weight_bound, tau * lambda_max(spd_inverse(qs.back())));
        }

        // Discrete inequalities hold exactly; scale by the right-hand side.
        double rhs = 0.0;
        for (const auto& v : xi) rhs += quad_form(q, v);
        st.discrete_worst =
            std::min(st.discrete_worst, jensen::gap_discrete(xi, q) / std::max(1.0, static_cast<double>(terms) * rhs));
        double rhs_multi = 0.0;
        for (std::size_t i = 0; i < terms; ++i) rhs_multi += quad_form(spd_inverse(qs[i]), xi[i]);
        st.discrete_worst = std::min(st.discrete_worst, jensen::gap_discrete_multi(xi, qs) / std::max(1.0, rhs_multi));

        const double lq = lambda_max(q);
        const double eps_cont = jensen::quadrature_tolerance({omegas.front()}, omegas.front().tau() * lq);
        st.quadrature_worst = std::min(st.quadrature_worst, jensen::gap_continuous(omegas.front(), q) + eps_cont);
        const double eps_multi = jensen::quadrature_tolerance(omegas, weight_bound);
        st.quadrature_worst = std::min(st.quadrature_worst, jensen::gap_multiple(omegas, qs) + eps_multi);
        double tau_max = 0.0;
        for (const auto& o : omegas) tau_max = std::max(tau_max, o.tau());
        const double eps_summed =
            jensen::quadrature_tolerance(omegas, static_cast<double>(terms) * tau_max * lq);
        st.quadrature_worst = std::min(st.quadrature_worst, jensen::gap_summed(omegas, q) + eps_summed);

        const auto cmp = jensen::compare_bounds(omegas, q);
        const double scale = 1e-12 * std::max(1.0, cmp.summed.rhs);
        if (cmp.summed.rhs < cmp.multiple.rhs - scale || cmp.summed.gap() < cmp.multiple.gap() - scale) {
            ++st.dominance_violations;
        }

        const double tau = omegas.front().tau();
        const double g1 = jensen::gap_continuous(fns.front().sample(tau, 16), q);
        const double g2 = jensen::gap_continuous(fns.front().sample(tau, 32), q);
        const double g4 = jensen::gap_continuous(fns.front().sample(tau, 64), q);
        coarse_diff += std::abs(g1 - g2);
        fine_diff += std::abs(g2 - g4);
    }
    st.convergence_order = fine_diff > 0.0 ? std::log2(coarse_diff / fine_diff) : 0.0;
    return st;
}

SuiteResult jensen_suite(std::uint64_t seed, std::size_t draws) {
    const JensenStats st = jensen_stats(seed, draws);
    SuiteResult r;
    r.name = "jensen";
    const bool discrete_ok = st.discrete_worst >= -1e-12;
    const bool quad_ok = st.quadrature_worst >= 0.0;
    const bool dom_ok = st.dominance_violations == 0;
    const bool order_ok = st.convergence_order >= 1.9;
    r.pass = discrete_ok && quad_ok && dom_ok && order_ok;
    r.lines.push_back("draws " + std::to_string(st.draws));
    r.lines.push_back(fmt("discrete gaps: worst relative gap %.6g", st.discrete_worst) +
                      (discrete_ok ? " ok" : " FAILED"));
    r.lines.push_back(fmt("quadrature gaps: worst gap + eps_quad %.6g", st.quadrature_worst) +
                      (quad_ok ? " ok" : " FAILED"));
    r.lines.push_back("dominance violations " + std::to_string(st.dominance_violations) + (dom_ok ? " ok" : " FAILED"));
    r.lines.push_back(fmt("observed convergence order %.6g", st.convergence_order) + (order_ok ? " ok" : " FAILED"));
    return r;
}

EquivalenceStats equivalence_stats(const std::vector<IdsSystem>& corpus, const lmi::SolverConfig& cfg) {
    using margin::Criterion;
    const Criterion checks[] = {Criterion::amc, Criterion::th2_coupled, Criterion::single, Criterion::spectral};
    EquivalenceStats st;
    for (std::size_t k = 0; k < corpus.size(); ++k) {
        ++st.systems;
        std::vector<bool> verdicts;
        for (Criterion c : checks) verdicts.push_back(margin::evaluate_criterion(corpus[k], c, cfg).pass);
        const bool all_pass = std::all_of(verdicts.begin(), verdicts.end(), [](bool v) { return v; });
        const bool all_fail = std::none_of(verdicts.begin(), verdicts.end(), [](bool v) { return v; });
        if (all_pass) ++st.feasible;
        if (!all_pass && !all_fail) {
            ++st.disagreements;
            std::string line = "system " + std::to_string(k) + ":";
            for (std::size_t j = 0; j < verdicts.size(); ++j) {
                line += std::string(" ") + margin::criterion_id(checks[j]) + "=" + (verdicts[j] ? "pass" : "fail");
            }
            st.details.push_back(line);
        }
    }
    return st;
}

SuiteResult equivalence_suite(const std::vector<IdsSystem>& corpus, const lmi::SolverConfig& cfg) {
    const EquivalenceStats st = equivalence_stats(corpus, cfg);
    SuiteResult r;
    r.name = "equivalence";
    r.pass = st.disagreements == 0;
    r.lines.push_back("systems " + std::to_string(st.systems) + ", all pass " + std::to_string(st.feasible) +
                      ", all fail " + std::to_string(st.systems - st.feasible - st.disagreements));
    r.lines.push_back("disagreements " + std::to_string(st.disagreements));
    r.lines.insert(r.lines.end(), st.details.begin(), st.details.end());
    return r;
}

OrderingStats ordering_stats(const std::vector<IdsSystem>& corpus, const lmi::SolverConfig& cfg) {
    using margin::Criterion;
    OrderingStats st;
    for (std::size_t k = 0; k < corpus.size(); ++k) {
        const IdsSystem& sys = corpus[k];
        const auto coupled = margin::evaluate_criterion(sys, Criterion::th2_coupled, cfg);
        const auto stacked = margin::evaluate_criterion(sys, Criterion::th2_lmi, cfg);
        const std::string tag = "system " + std::to_string(k) + ": ";

        if (coupled.pass) {
            ++st.coupled_feasible;
            const auto slack = margin::evaluate_criterion(sys, Criterion::th1, cfg);
            if (!slack.pass || !stacked.pass) {
                ++st.ordering_violations;
                st.details.push_back(tag + "coupled feasible but th1=" + (slack.pass ? "pass" : "fail") +
                                     " th2-lmi=" + (stacked.pass ? "pass" : "fail"));
            }
            ++st.coupled_conversions;
            try {
                const auto conv = criteria::split_witness_from_coupled(sys, criteria::q_list(*coupled.witness, sys.terms()));
                if (!criteria::verify_split_nmi(sys, conv.r, conv.p)) {
                    ++st.coupled_conversion_failures;
                    st.details.push_back(tag + "converted coupled witness fails the split inequalities");
                }
            } catch (const std::exception& e) {
                ++st.coupled_conversion_failures;
                st.details.push_back(tag + "coupled conversion error: " + e.what());
            }
        }
        if (stacked.pass) {
            ++st.stacked_conversions;
            try {
                const auto q = criteria::q_list(*stacked.witness, sys.terms());
                const auto s = criteria::split_witness_from_inverse_nmi(sys, q);
                if (!criteria::verify_split_nmi(sys, s, q)) {
                    ++st.stacked_conversion_failures;
                    st.details.push_back(tag + "converted stacked witness fails the split inequalities");
                }
            } catch (const std::exception& e) {
                ++st.stacked_conversion_failures;
                st.details.push_back(tag + "stacked conversion error: " + e.what());
            }
        }
    }
    return st;
}

SuiteResult ordering_suite(const std::vector<IdsSystem>& corpus, const lmi::SolverConfig& cfg) {
    const OrderingStats st = ordering_stats(corpus, cfg);
    SuiteResult r;
    r.name = "ordering";
    r.pass = st.ordering_violations == 0 && st.coupled_conversion_failures == 0 && st.stacked_conversion_failures == 0;
    r.lines.push_back("coupled feasible " + std::to_string(st.coupled_feasible) + ", ordering violations " +
                      std::to_string(st.ordering_violations));
    r.lines.push_back("coupled conversions " + std::to_string(st.coupled_conversions) + ", failures " +
                      std::to_string(st.coupled_conversion_failures));
    r.lines.push_back("stacked conversions " + std::to_string(st.stacked_conversions) + ", failures " +
                      std::to_string(st.stacked_conversion_failures));
    r.lines.insert(r.lines.end(), st.details.begin(), st.details.end());
    return r;
}

bool Report::pass() const {
    return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.pass; });
}

std::string Report::text() const {
    std::ostringstream out;
    for (const auto& s : suites) {
        out << "[" << (s.pass ? "PASS" : "FAIL") << "] " << s.name << "\n";
        for (const auto& l : s.lines) out << "    " << l << "\n";
    }
    out << (pass() ? "selftest passed" : "selftest FAILED") << "\n";
    return out.str();
}

Report run_all(std::uint64_t seed) {
    lmi::SolverConfig cfg;
    cfg.seed = seed;
    const auto corpus = random_corpus(seed ^ 0x5eed5eed5eedULL, 100);
    Report rep;
    rep.suites.push_back(jensen_suite(seed));
    rep.suites.push_back(equivalence_suite(corpus, cfg));
    rep.suites.push_back(ordering_suite(corpus, cfg));
    return rep;
}

}  // namespace ids::selftest
