#pragma once

// LMI stability conditions for integral delay systems, direct checks of the
// nonlinear matrix inequalities they linearize, and the constructive witness
// conversions between conditions.
//
// Variable names used by the builders: "P", "Q1".."QN", "S1".."SN", "R".

#include <stdexcept>
#include <string>
#include <vector>

#include "ids/lmi.hpp"
#include "ids/model.hpp"

namespace ids::criteria {

class WitnessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string q_name(std::size_t i);  // "Q1", "Q2", … (0-based argument)
std::string s_name(std::size_t i);

/// Nτᵢ Aᵢᵀ (P + Σⱼ τⱼ Qⱼ) Aᵢ − Qᵢ ≺ 0 for each i; P, Qᵢ ≻ 0.
lmi::LmiProblem build_amc(const IdsSystem& sys);

/// Nτᵢ² Aᵢᵀ (Σⱼ Qⱼ) Aᵢ − Qᵢ ≺ 0 for each i; Qᵢ ≻ 0.
lmi::LmiProblem build_coupled(const IdsSystem& sys);

/// Σᵢ Nτᵢ² Aᵢᵀ Q Aᵢ − Q ≺ 0; Q ≻ 0.
lmi::LmiProblem build_single(const IdsSystem& sys);

/// ΣQᵢ + ΣSᵢ − (Rᵀ + R) ≺ 0 and [[−Sᵢ, τᵢAᵢᵀR], [τᵢRᵀAᵢ, −Qᵢ]] ≺ 0, with
/// Qᵢ, Sᵢ ≻ 0 and R a general matrix.
lmi::LmiProblem build_slack_lmi(const IdsSystem& sys);

/// M (Σᵢ Qᵢ) Mᵀ − diag(Q₁, …, Q_N) ≺ 0 with M = [τ₁A₁; …; τ_N A_N].
lmi::LmiProblem build_stacked_lmi(const IdsSystem& sys);

/// The delay-free stacked LMI for x(t) = Σ Aᵢ x(t − τᵢ): M = [A₁; …; A_N].
lmi::LmiProblem build_delay_independent(const DiscreteIds& sys);

/// Q_N = X_N, Qᵢ = Xᵢ − Xᵢ₊₁. Requires X₁ ≻ X₂ ≻ … ≻ X_N ≻ 0.
std::vector<Matrix> telescoping_weights(const std::vector<Matrix>& x);

/// τᵢ² Aᵢᵀ Qᵢ⁻¹ Aᵢ − Sᵢ ≺ 0 for all i and Σ Sᵢ ≺ (Σ Qᵢ)⁻¹, checked through
/// explicit inverses. Throws WitnessError when a Qᵢ is not positive definite
/// or has condition number above 1e12.
bool verify_split_nmi(const IdsSystem& sys, const std::vector<Matrix>& s, const std::vector<Matrix>& q);

/// Σᵢ τᵢ² Aᵢᵀ Qᵢ⁻¹ Aᵢ − (Σᵢ Qᵢ)⁻¹ ≺ 0.
bool verify_inverse_nmi(const IdsSystem& sys, const std::vector<Matrix>& q);
/// λ-max of the matrix in verify_inverse_nmi (negative means satisfied).
double inverse_nmi_margin(const IdsSystem& sys, const std::vector<Matrix>& q);

struct SplitNmiWitness {
    std::vector<Matrix> s;
    std::vector<Matrix> q;
};

/// Undoes the substitution RᵀQᵢR → Qᵢ: Qᵢ = R⁻ᵀ Q̂ᵢ R⁻¹, Sᵢ unchanged.
/// Expects a witness of build_slack_lmi with `terms` delay terms.
SplitNmiWitness recover_split_nmi(const lmi::Witness& w, std::size_t terms);

struct CoupledConversion {
    std::vector<Matrix> p;  // plays the Q role of the split NMI
    std::vector<Matrix> r;  // plays the S role of the split NMI
    double slack = 0.0;
    double epsilon = 0.0;
};

/// From Qᵢ solving the coupled LMIs with positive slack: Pᵢ = (N Σⱼ Qⱼ)⁻¹ and
/// Rᵢ = Qᵢ − εI with ε = min(slack, min λ-min(Qᵢ)) / 2. Throws WitnessError
/// when the slack is too small to proceed.
CoupledConversion split_witness_from_coupled(const IdsSystem& sys, const std::vector<Matrix>& q);

/// From Qᵢ satisfying the inverse NMI: Sᵢ = τᵢ² Aᵢᵀ Qᵢ⁻¹ Aᵢ + Ω with
/// Ω = (1/2N)((ΣQᵢ)⁻¹ − Σ τᵢ² Aᵢᵀ Qᵢ⁻¹ Aᵢ).
std::vector<Matrix> split_witness_from_inverse_nmi(const IdsSystem& sys, const std::vector<Matrix>& q);

/// Extracts Q1..QN from a solver witness.
std::vector<Matrix> q_list(const lmi::Witness& w, std::size_t terms);

}  // namespace ids::criteria
