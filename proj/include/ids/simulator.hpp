#pragma once

// Time-domain integration of x(t) = Σ Aᵢ ∫_{−τᵢ}^0 x(t+s) ds on a uniform
// grid, decay-rate estimation and evaluation of Lyapunov functionals along
// computed trajectories.
//
// The grid is t_j = j·h. Delays are snapped to kᵢ = round(τᵢ/h) steps; the
// history occupies indices −K..0 with K = max kᵢ. The solution generally jumps
// at t = 0 (x(0⁺) = Σ Aᵢ ∫φ need not equal φ(0)), so node 0 carries two values:
// φ(0) when it closes an interval and x(0⁺) when it opens one. Every integral
// uses the composite trapezoid rule with that convention, which keeps the
// scheme second order.

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ids/linalg.hpp"
#include "ids/model.hpp"

namespace ids::sim {

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class HistoryKind { constant, random_smooth, custom_sampled };

/// Initial function φ on [−τ, 0]; every kind yields a continuous function.
struct HistorySpec {
    HistoryKind kind = HistoryKind::constant;
    std::vector<double> constant;                // constant
    std::uint64_t seed = 20140528;               // random_smooth
    std::vector<std::vector<double>> samples;    // custom_sampled, uniform on [−τ, 0]

    static HistorySpec make_constant(std::vector<double> c);
    static HistorySpec make_random_smooth(std::uint64_t seed);
    static HistorySpec make_sampled(std::vector<std::vector<double>> samples);
};

/// Evaluates φ(s) for s ∈ [−tau, 0] in dimension n. Random-smooth histories are
/// a seeded sum of three sinusoids per component plus an offset; sampled ones
/// are linearly interpolated (and held constant outside [−tau, 0]).
std::function<std::vector<double>(double)> make_history(const HistorySpec& spec, std::size_t n, double tau);

struct DecayFit {
    double alpha = 0.0;  // ‖x(t)‖ ≲ alpha · sup‖φ‖ · e^{−beta t}
    double beta = 0.0;   // +∞ when the state vanishes identically
};

struct Trajectory {
    double h = 0.0;
    double t_final = 0.0;
    std::vector<std::size_t> delay_steps;  // kᵢ
    std::vector<double> snapped_tau;       // kᵢ·h
    std::vector<double> snap_error;        // kᵢ·h − τᵢ
    std::size_t history_steps = 0;         // K
    /// samples[j] holds the state at t = (j − K)·h; the history part uses φ.
    std::vector<std::vector<double>> samples;
    std::vector<double> x0_plus;
    double max_residual = 0.0;             // relative residual of the implicit solves
    double history_norm = 0.0;             // max ‖φ‖ on the grid
    std::optional<DecayFit> decay_fit;

    [[nodiscard]] std::size_t steps() const { return samples.size() - history_steps - 1; }
    [[nodiscard]] double time(std::size_t index) const;
    [[nodiscard]] const std::vector<double>& at_step(std::size_t j) const { return samples.at(history_steps + j); }
    [[nodiscard]] double max_norm_after_zero() const;
};

/// Requires h > 0, h ≤ min τᵢ / 8 and T ≥ max τᵢ. Throws SimulationError when
/// I − (h/2)ΣAᵢ is numerically singular. Fills decay_fit when T ≥ 5 max τᵢ.
Trajectory simulate(const IdsSystem& sys, const HistorySpec& history, double h, double t_final);

/// Least-squares line through log max‖x‖ over consecutive windows of width
/// max τᵢ on (0, T]. Returns nullopt when the fitted slope is ≥ 0.
std::optional<DecayFit> estimate_decay(const Trajectory& traj);

enum class Functional { amc, th1, th2 };

/// amc: P and Qᵢ; th1: P and Sᵢ (in `weights`); th2: Qᵢ, δ and ε, with
/// Rᵢ = (ΣQⱼ)⁻¹ / N. Delay values are the snapped ones of the trajectory.
struct FunctionalWitness {
    Matrix p;
    std::vector<Matrix> weights;
    double delta = 0.0;
    double epsilon = 1.0;
};

/// amc: ∫_{t−τ}^t xᵀPx + Σ ∫_{−τᵢ}^0 (s+τᵢ) xᵀQᵢx.
/// th1: ∫_{t−τ}^t xᵀPx + Σ ∫_{−τᵢ}^0 (s/τᵢ+1) xᵀSᵢx.
/// th2: ε Σ ∫_{t−τᵢ}^t xᵀRᵢx + Σ ∫_{−τᵢ}^0 (s+τᵢ) xᵀ(τᵢAᵢᵀQᵢ⁻¹Aᵢ + δI)x.
/// t must lie in [0, T − τ] and is rounded to the nearest grid point.
double eval_functional(const IdsSystem& sys, const Trajectory& traj, Functional which,
                       const FunctionalWitness& witness, double t);

/// Functional parameters from Qᵢ satisfying Σ τᵢ²AᵢᵀQᵢ⁻¹Aᵢ ≺ (ΣQᵢ)⁻¹:
/// δ and ε with Σ(τᵢ²AᵢᵀQᵢ⁻¹Aᵢ + τᵢδI) − Q⁻¹ ⪯ −εQ⁻¹.
FunctionalWitness th2_functional_witness(const IdsSystem& sys, const std::vector<Matrix>& q);

/// From (Sᵢ, Qᵢ) satisfying the split inequalities: P = ((ΣQᵢ)⁻¹ − ΣSᵢ)/2.
FunctionalWitness th1_functional_witness(const std::vector<Matrix>& s, const std::vector<Matrix>& q);

/// Header "t, x1, …, xn", one row per grid point, decay fit and delay
/// snapping as "#" comment lines. Numbers use 6 significant digits.
void write_csv(std::ostream& out, const Trajectory& traj);

Functional parse_functional(const std::string& name);

}  // namespace ids::sim
