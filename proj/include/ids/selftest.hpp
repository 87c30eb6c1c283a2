#pragma once

// Seeded property suites shared by the `selftest` subcommand and the test
// programs: Jensen-type inequality checks and the verdict-equivalence and
// ordering checks over a random system corpus.

#include <cstdint>
#include <string>
#include <vector>

#include "ids/lmi.hpp"
#include "ids/model.hpp"

namespace ids::selftest {

/// Systems with n, N ∈ {1, 2, 3}, entries U[−1, 1] and delays U[0.05, 1],
/// kept only when |N·ρ(Στᵢ²Aᵢ⊗Aᵢ) − 1| > 0.05.
std::vector<IdsSystem> random_corpus(std::uint64_t seed, std::size_t count = 100);

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::vector<std::string> lines;  // deterministic, no timings
};

struct JensenStats {
    std::size_t draws = 0;
    double discrete_worst = 0.0;    // min over draws of gap / max(1, rhs); must be ≥ −1e−12
    double quadrature_worst = 0.0;  // min over draws of gap + ε_quad (continuous, multiple, summed)
    std::size_t dominance_violations = 0;
    double convergence_order = 0.0; // aggregate observed order of the continuous gaps
};

JensenStats jensen_stats(std::uint64_t seed, std::size_t draws = 10000);
SuiteResult jensen_suite(std::uint64_t seed, std::size_t draws = 10000);

struct EquivalenceStats {
    std::size_t systems = 0;
    std::size_t feasible = 0;  // systems on which every verdict is pass
    std::size_t disagreements = 0;
    std::vector<std::string> details;
};

/// Verdicts of amc, th2-coupled, single and spectral on every corpus system.
EquivalenceStats equivalence_stats(const std::vector<IdsSystem>& corpus, const lmi::SolverConfig& cfg = {});
SuiteResult equivalence_suite(const std::vector<IdsSystem>& corpus, const lmi::SolverConfig& cfg = {});

struct OrderingStats {
    std::size_t coupled_feasible = 0;
    std::size_t ordering_violations = 0;   // coupled feasible but th1 or th2-lmi not found
    std::size_t coupled_conversions = 0;   // split witnesses built from coupled witnesses
    std::size_t coupled_conversion_failures = 0;
    std::size_t stacked_conversions = 0;   // split witnesses built from stacked-LMI witnesses
    std::size_t stacked_conversion_failures = 0;
    std::vector<std::string> details;
};

OrderingStats ordering_stats(const std::vector<IdsSystem>& corpus, const lmi::SolverConfig& cfg = {});
SuiteResult ordering_suite(const std::vector<IdsSystem>& corpus, const lmi::SolverConfig& cfg = {});

struct Report {
    std::vector<SuiteResult> suites;
    [[nodiscard]] bool pass() const;
    [[nodiscard]] std::string text() const;
};

/// All suites with solver seed and corpus seed derived from `seed`.
Report run_all(std::uint64_t seed);

}  // namespace ids::selftest
