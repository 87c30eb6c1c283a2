#pragma once

// Criterion dispatch by identifier, delay-margin bisection and the reference
// margin table.

#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ids/lmi.hpp"
#include "ids/model.hpp"

namespace ids::margin {

class MarginError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Criterion {
    amc,
    th2_coupled,
    single,
    th1,
    th2_lmi,
    laa,
    spectral,
    spectral_weighted,
    laa_spectral,
    single_delay,
};

/// "amc", "th2-coupled", "single", "th1", "th2-lmi", "laa", "spectral",
/// "spectral-weighted", "laa-spectral", "single-delay".
Criterion parse_criterion(const std::string& id);
const char* criterion_id(Criterion c);
const std::vector<Criterion>& all_criteria();
bool is_lmi(Criterion c);

struct Verdict {
    bool pass = false;
    std::string scalar_name;  // "lambda*" for LMI criteria, "rho" otherwise
    double scalar = 0.0;
    double threshold = 0.0;
    bool boundary = false;
    std::optional<lmi::Witness> witness;  // LMI criteria only
    std::vector<double> alpha;            // spectral-weighted only
};

/// LMI criteria run solve_feasibility with `cfg`. "spectral-weighted" uses
/// `alpha` when given and optimize_weights otherwise. "laa" and
/// "laa-spectral" need strictly increasing delays; "single-delay" needs N = 1.
Verdict evaluate_criterion(const IdsSystem& sys, Criterion c, const lmi::SolverConfig& cfg = {},
                           const std::vector<double>& alpha = {});

/// Largest τ in [lo, hi] (within tol) at which the criterion passes when delay
/// `vary_index` is set to τ, assuming feasibility is monotone in that delay.
/// nullopt when the criterion fails at lo; hi when it passes at hi. LMI probes
/// use three times the configured restarts.
std::optional<double> bisect_margin(const IdsSystem& sys, std::size_t vary_index, Criterion c, double lo, double hi,
                                    double tol = 1e-4, const lmi::SolverConfig& cfg = {});

/// Default upper bracket: 10 · max τᵢ.
double default_upper_bracket(const IdsSystem& sys);

struct Table1Row {
    double tau1 = 0.0;
    std::vector<std::optional<double>> margins;  // one per column
};

struct Table1 {
    std::vector<Criterion> columns;
    std::vector<Table1Row> rows;
};

inline constexpr double table1_probe_lo = 1e-4;

/// Rows τ₁ ∈ {0.4, 0.3, 0.2, 0.1}, columns th2-lmi, amc, single, spectral,
/// margins in τ₂ for the reference system over [1e−4, 10·τ₁] with tol 1e−4.
/// Cells are computed concurrently when `parallel` is set.
Table1 table1(const lmi::SolverConfig& cfg = {}, bool parallel = true);

/// Header "tau1, th2-lmi, amc, single, spectral"; infeasible cells as "inf";
/// 6 significant digits.
void write_table_csv(std::ostream& out, const Table1& t);

struct MonotonicityReport {
    std::vector<double> grid;
    std::vector<bool> pass;
    /// (infeasible delay, later feasible delay) pairs.
    std::vector<std::pair<double, double>> violations;
    [[nodiscard]] bool monotone() const { return violations.empty(); }
};

MonotonicityReport monotonicity_audit(const IdsSystem& sys, std::size_t vary_index, Criterion c,
                                      const std::vector<double>& grid, const lmi::SolverConfig& cfg = {});
/// Same audit for an arbitrary pass/fail predicate.
MonotonicityReport monotonicity_audit(const IdsSystem& sys, std::size_t vary_index,
                                      const std::function<bool(const IdsSystem&)>& passes,
                                      const std::vector<double>& grid);

/// "%.6g" formatting shared by the table and command-line output.
std::string format_number(double v);

}  // namespace ids::margin
