#pragma once

// Eigenvalue-based stability tests built on Kronecker sums Σ cᵢ Aᵢ ⊗ Aᵢ.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ids/linalg.hpp"
#include "ids/model.hpp"

namespace ids::spectral {

class SpectralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// pass ⟺ rho < threshold. Values within 1e−12 of the threshold fail and
/// carry the boundary flag.
struct SpectralVerdict {
    double rho = 0.0;
    double threshold = 0.0;
    bool pass = false;
    bool boundary = false;
};

SpectralVerdict make_verdict(double rho, double threshold);

/// ρ(Σᵢ τᵢ² Aᵢ ⊗ Aᵢ) against 1/N.
SpectralVerdict check_spectral(const IdsSystem& sys);
Matrix kronecker_sum(const IdsSystem& sys);

/// ρ(Σᵢ (τᵢ²/αᵢ) Aᵢ ⊗ Aᵢ) against 1; α must lie in the open simplex.
SpectralVerdict check_spectral_weighted(const IdsSystem& sys, const std::vector<double>& alpha);

struct WeightOptimum {
    std::vector<double> alpha;
    double rho = 0.0;
};

/// Searches the open simplex for weights minimizing the weighted radius.
/// N = 2: grid scan plus golden-section refinement on α₁ ∈ [δ, 1 − δ];
/// N ≥ 3: Nelder–Mead in softmax coordinates with 20 seeded restarts.
/// The result is never worse than uniform weights.
WeightOptimum optimize_weights(const IdsSystem& sys, std::uint64_t seed = 20140528);

/// The Nn² × Nn² matrix whose i-th block row repeats τᵢ² Aᵢᵀ ⊗ Aᵢᵀ N times.
Matrix operator_block(const IdsSystem& sys);
/// Factors with operator_block = B·C: B stacks τᵢ² Aᵢᵀ ⊗ Aᵢᵀ, C = [I … I].
Matrix operator_factor_b(const IdsSystem& sys);
Matrix operator_factor_c(const IdsSystem& sys);

struct SingleDelayChecks {
    bool rho_pass = false;   // ρ(A₁) < 1/τ₁
    bool norm_pass = false;  // ‖A₁‖₂ < 1/τ₁
    double rho = 0.0;
    double norm = 0.0;
};

SingleDelayChecks single_delay_checks(const Matrix& a1, double tau1);

/// ρ(Σᵢ Aᵢ ⊗ Aᵢ) against 1/N, independent of the delays.
SpectralVerdict laa_spectral(const DiscreteIds& sys);

}  // namespace ids::spectral
