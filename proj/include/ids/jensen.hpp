#pragma once

// Numerical gaps (right-hand side minus left-hand side) of the Jensen-type
// integral and sum inequalities. Integrals use the composite trapezoid rule on
// the sample grid.

#include <optional>
#include <stdexcept>
#include <vector>

#include "ids/linalg.hpp"

namespace ids::jensen {

class JensenError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// ω: [−τ, 0] → Rⁿ sampled at m+1 uniform points, values.front() at −τ.
class SampledFunction {
public:
    SampledFunction(double tau, std::vector<std::vector<double>> values);

    [[nodiscard]] double tau() const { return tau_; }
    [[nodiscard]] std::size_t intervals() const { return values_.size() - 1; }
    [[nodiscard]] std::size_t dim() const { return values_.front().size(); }
    [[nodiscard]] double step() const { return tau_ / static_cast<double>(intervals()); }
    [[nodiscard]] const std::vector<std::vector<double>>& values() const { return values_; }

    /// Trapezoid approximation of ∫ω.
    [[nodiscard]] std::vector<double> integral() const;
    /// Trapezoid approximation of ∫ωᵀ W ω.
    [[nodiscard]] double quadratic_integral(const Matrix& w) const;
    [[nodiscard]] double max_norm() const;

    template <typename F>
    static SampledFunction sample(double tau, std::size_t intervals, F&& f) {
        std::vector<std::vector<double>> v;
        v.reserve(intervals + 1);
        for (std::size_t k = 0; k <= intervals; ++k) {
            const double s = -tau + tau * static_cast<double>(k) / static_cast<double>(intervals);
            v.push_back(f(s));
        }
        return SampledFunction(tau, std::move(v));
    }

private:
    double tau_;
    std::vector<std::vector<double>> values_;
};

/// τ ∫ωᵀQω − (∫ω)ᵀ Q (∫ω).
double gap_continuous(const SampledFunction& omega, const Matrix& q);

/// N Σ ξᵢᵀ Q ξᵢ − (Σξᵢ)ᵀ Q (Σξᵢ).
double gap_discrete(const std::vector<std::vector<double>>& xi, const Matrix& q);

/// Σ ξᵢᵀ Qᵢ⁻¹ ξᵢ − (Σξᵢ)ᵀ (ΣQᵢ)⁻¹ (Σξᵢ).
double gap_discrete_multi(const std::vector<std::vector<double>>& xi, const std::vector<Matrix>& q);

struct Bound {
    double lhs = 0.0;
    double rhs = 0.0;
    [[nodiscard]] double gap() const { return rhs - lhs; }
};

/// (Σxᵢ)ᵀ(ΣQᵢ)⁻¹(Σxᵢ) ≤ Σ τᵢ ∫ωᵢᵀ Qᵢ⁻¹ ωᵢ with xᵢ = ∫ωᵢ.
Bound multiple_bound(const std::vector<SampledFunction>& omegas, const std::vector<Matrix>& q);
double gap_multiple(const std::vector<SampledFunction>& omegas, const std::vector<Matrix>& q);

/// (Σxᵢ)ᵀ Q (Σxᵢ) ≤ N Σ τᵢ ∫ωᵢᵀ Q ωᵢ. An empty slot stands for a
/// zero-horizon term (τᵢ = 0): it adds nothing to either side but still counts
/// toward N.
using HorizonTerm = std::optional<SampledFunction>;
Bound summed_bound(const std::vector<HorizonTerm>& omegas, const Matrix& q);
Bound summed_bound(const std::vector<SampledFunction>& omegas, const Matrix& q);
double gap_summed(const std::vector<HorizonTerm>& omegas, const Matrix& q);
double gap_summed(const std::vector<SampledFunction>& omegas, const Matrix& q);

/// The summed bound and the multiple bound evaluated with Qᵢ = Q⁻¹ on the
/// same inputs. The summed bound is N times the other on both sides.
struct Comparison {
    Bound summed;
    Bound multiple;
};
Comparison compare_bounds(const std::vector<SampledFunction>& omegas, const Matrix& q);

/// 10·h²·(max‖ω‖)²·λ-max(weight), with h the coarsest grid step.
double quadrature_tolerance(const std::vector<SampledFunction>& omegas, double weight_lambda_max);

}  // namespace ids::jensen
