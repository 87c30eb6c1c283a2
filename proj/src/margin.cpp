#include "ids/margin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>

#include "ids/criteria_lmi.hpp"
#include "ids/spectral.hpp"

namespace ids::margin {

namespace {

struct Entry {
    Criterion c;
    const char* id;
};

constexpr Entry kEntries[] = {
    {Criterion::amc, "amc"},
    {Criterion::th2_coupled, "th2-coupled"},
    {Criterion::single, "single"},
    {Criterion::th1, "th1"},
    {Criterion::th2_lmi, "th2-lmi"},
    {Criterion::laa, "laa"},
    {Criterion::spectral, "spectral"},
    {Criterion::spectral_weighted, "spectral-weighted"},
    {Criterion::laa_spectral, "laa-spectral"},
    {Criterion::single_delay, "single-delay"},
};

DiscreteIds as_discrete(const IdsSystem& sys, Criterion c) {
    try {
        return validate_discrete(sys.a(), sys.tau());
    } catch (const ModelError& e) {
        throw MarginError(std::string("criterion ") + criterion_id(c) + " needs a discrete-delay system: " + e.what());
    }
}

Verdict from_spectral(const spectral::SpectralVerdict& v) {
    Verdict out;
    out.pass = v.pass;
    out.scalar_name = "rho";
    out.scalar = v.rho;
    out.threshold = v.threshold;
    out.boundary = v.boundary;
    return out;
}

lmi::LmiProblem build(const IdsSystem& sys, Criterion c) {
    switch (c) {
        case Criterion::amc: return criteria::build_amc(sys);
        case Criterion::th2_coupled: return criteria::build_coupled(sys);
        case Criterion::single: return criteria::build_single(sys);
        case Criterion::th1: return criteria::build_slack_lmi(sys);
        case Criterion::th2_lmi: return criteria::build_stacked_lmi(sys);
        case Criterion::laa: return criteria::build_delay_independent(as_discrete(sys, c));
        default: throw MarginError("not an LMI criterion");
    }
}

}  // namespace

Criterion parse_criterion(const std::string& id) {
    for (const auto& e : kEntries) {
        if (id == e.id) return e.c;
    }
    std::string known;
    for (const auto& e : kEntries) known += std::string(known.empty() ? "" : ", ") + e.id;
    throw MarginError("unknown criterion '" + id + "' (known: " + known + ")");
}

const char* criterion_id(Criterion c) {
    for (const auto& e : kEntries) {
        if (e.c == c) return e.id;
    }
    return "?";
}

const std::vector<Criterion>& all_criteria() {
    static const std::vector<Criterion> all = [] {
        std::vector<Criterion> v;
        for (const auto& e : kEntries) v.push_back(e.c);
        return v;
    }();
    return all;
}

bool is_lmi(Criterion c) {
    switch (c) {
        case Criterion::amc:
        case Criterion::th2_coupled:
        case Criterion::single:
        case Criterion::th1:
        case Criterion::th2_lmi:
        case Criterion::laa: return true;
        default: return false;
    }
}

Verdict evaluate_criterion(const IdsSystem& sys, Criterion c, const lmi::SolverConfig& cfg,
                           const std::vector<double>& alpha) {
    if (is_lmi(c)) {
        const auto report = lmi::solve_feasibility(build(sys, c), cfg);
        Verdict v;
        v.pass = report.feasible();
        v.scalar_name = "lambda*";
        v.scalar = report.lambda_star;
        v.threshold = 0.0;
        v.witness = report.witness;
        return v;
    }
    switch (c) {
        case Criterion::spectral: return from_spectral(spectral::check_spectral(sys));
        case Criterion::spectral_weighted: {
            std::vector<double> w = alpha;
            if (w.empty()) w = spectral::optimize_weights(sys, cfg.seed).alpha;
            Verdict v = from_spectral(spectral::check_spectral_weighted(sys, w));
            v.alpha = std::move(w);
            return v;
        }
        case Criterion::laa_spectral: return from_spectral(spectral::laa_spectral(as_discrete(sys, c)));
        case Criterion::single_delay: {
            if (sys.terms() != 1) throw MarginError("criterion single-delay needs exactly one delay term");
            const auto checks = spectral::single_delay_checks(sys.a(0), sys.tau(0));
            // ρ(A₁) < 1/τ₁ reported in the scaled form ρ(τ₁A₁) < 1.
            Verdict v = from_spectral(spectral::make_verdict(checks.rho * sys.tau(0), 1.0));
            v.pass = v.pass && checks.rho_pass;
            return v;
        }
        default: break;
    }
    throw MarginError("unhandled criterion");
}

double default_upper_bracket(const IdsSystem& sys) { return 10.0 * sys.tau_max(); }

std::optional<double> bisect_margin(const IdsSystem& sys, std::size_t vary_index, Criterion c, double lo, double hi,
                                    double tol, const lmi::SolverConfig& cfg) {
    if (vary_index >= sys.terms()) throw MarginError("vary index out of range");
    if (!(lo > 0.0) || !(lo < hi) || !std::isfinite(hi)) throw MarginError("invalid bracket: need 0 < lo < hi");
    if (!(tol > 0.0)) throw MarginError("tolerance must be positive");

    lmi::SolverConfig probe_cfg = cfg;
    if (is_lmi(c)) probe_cfg.restarts = 3 * cfg.restarts;
    auto passes = [&](double tau) { return evaluate_criterion(sys.with_delay(vary_index, tau), c, probe_cfg).pass; };

    if (!passes(lo)) return std::nullopt;
    if (passes(hi)) return hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (passes(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

Table1 table1(const lmi::SolverConfig& cfg, bool parallel) {
    Table1 t;
    t.columns = {Criterion::th2_lmi, Criterion::amc, Criterion::single, Criterion::spectral};
    const double rows[] = {0.4, 0.3, 0.2, 0.1};

    auto cell = [&cfg](double tau1, Criterion c) {
        const IdsSystem sys = reference_system(tau1, tau1);
        return bisect_margin(sys, 1, c, table1_probe_lo, default_upper_bracket(sys), 1e-4, cfg);
    };

    std::vector<std::future<std::optional<double>>> pending;
    for (double tau1 : rows) {
        Table1Row row;
        row.tau1 = tau1;
        for (Criterion c : t.columns) {
            if (parallel) {
                pending.push_back(std::async(std::launch::async, cell, tau1, c));
            } else {
                row.margins.push_back(cell(tau1, c));
            }
        }
        t.rows.push_back(std::move(row));
    }
    if (parallel) {
        std::size_t k = 0;
        for (auto& row : t.rows) {
            for (std::size_t j = 0; j < t.columns.size(); ++j) row.margins.push_back(pending[k++].get());
        }
    }
    return t;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void write_table_csv(std::ostream& out, const Table1& t) {
    out << "tau1";
    for (Criterion c : t.columns) out << ", " << criterion_id(c);
    out << "\n";
    for (const auto& row : t.rows) {
        out << format_number(row.tau1);
        for (const auto& m : row.margins) out << ", " << (m ? format_number(*m) : std::string("inf"));
        out << "\n";
    }
}

MonotonicityReport monotonicity_audit(const IdsSystem& sys, std::size_t vary_index,
                                      const std::function<bool(const IdsSystem&)>& passes,
                                      const std::vector<double>& grid) {
    if (vary_index >= sys.terms()) throw MarginError("vary index out of range");
    if (!std::is_sorted(grid.begin(), grid.end())) throw MarginError("audit grid must be ascending");
    MonotonicityReport r;
    r.grid = grid;
    std::optional<double> last_fail;
    for (double tau : grid) {
        const bool ok = passes(sys.with_delay(vary_index, tau));
        r.pass.push_back(ok);
        if (!ok) {
            last_fail = tau;
        } else if (last_fail) {
            r.violations.emplace_back(*last_fail, tau);
        }
    }
    return r;
}

MonotonicityReport monotonicity_audit(const IdsSystem& sys, std::size_t vary_index, Criterion c,
                                      const std::vector<double>& grid, const lmi::SolverConfig& cfg) {
    return monotonicity_audit(
        sys, vary_index, [&](const IdsSystem& s) { return evaluate_criterion(s, c, cfg).pass; }, grid);
}

}  // namespace ids::margin
