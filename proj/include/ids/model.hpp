#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ids/linalg.hpp"

namespace ids {

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// x(t) = Σᵢ Aᵢ ∫_{−τᵢ}^{0} x(t+s) ds with constant delays τᵢ > 0.
///
/// Construct through validate_system(); a validated value is immutable in
/// spirit (the accessors are const) and records the aggregate delay bound.
class IdsSystem {
public:
    IdsSystem() = default;

    [[nodiscard]] std::size_t n() const { return n_; }
    [[nodiscard]] std::size_t terms() const { return a_.size(); }
    [[nodiscard]] const std::vector<Matrix>& a() const { return a_; }
    [[nodiscard]] const Matrix& a(std::size_t i) const { return a_.at(i); }
    [[nodiscard]] const std::vector<double>& tau() const { return tau_; }
    [[nodiscard]] double tau(std::size_t i) const { return tau_.at(i); }
    [[nodiscard]] double tau_max() const { return tau_max_; }

    /// Copy with delay `index` replaced (revalidated).
    [[nodiscard]] IdsSystem with_delay(std::size_t index, double value) const;

    friend IdsSystem validate_system(std::vector<Matrix> a, std::vector<double> tau);
    friend bool operator==(const IdsSystem&, const IdsSystem&) = default;

private:
    std::size_t n_ = 0;
    std::vector<Matrix> a_;
    std::vector<double> tau_;
    double tau_max_ = 0.0;
};

/// x(t) = Σᵢ Aᵢ x(t − τᵢ) with 0 < τ₁ < … < τ_N.
class DiscreteIds {
public:
    DiscreteIds() = default;

    [[nodiscard]] std::size_t n() const { return n_; }
    [[nodiscard]] std::size_t terms() const { return a_.size(); }
    [[nodiscard]] const std::vector<Matrix>& a() const { return a_; }
    [[nodiscard]] const Matrix& a(std::size_t i) const { return a_.at(i); }
    [[nodiscard]] const std::vector<double>& tau() const { return tau_; }

    friend DiscreteIds validate_discrete(std::vector<Matrix> a, std::vector<double> tau);
    friend bool operator==(const DiscreteIds&, const DiscreteIds&) = default;

private:
    std::size_t n_ = 0;
    std::vector<Matrix> a_;
    std::vector<double> tau_;
};

/// Throws ModelError on N = 0, non-square or mismatched Aᵢ, non-finite
/// entries, or a nonpositive delay.
IdsSystem validate_system(std::vector<Matrix> a, std::vector<double> tau);
IdsSystem validate_system(const IdsSystem& candidate);
DiscreteIds validate_discrete(std::vector<Matrix> a, std::vector<double> tau);

enum class SystemKind { integral, discrete };

/// Parsed system file: either kind is validated on load.
struct SystemFile {
    SystemKind kind = SystemKind::integral;
    std::vector<Matrix> a;
    std::vector<double> tau;

    [[nodiscard]] IdsSystem integral() const;
    [[nodiscard]] DiscreteIds discrete() const;
};

/// JSON text: {"A": [[[row], …], …], "tau": [...], "kind": "integral"|"discrete"}.
SystemFile parse_system_file(const std::string& text);
SystemFile read_system_file(const std::string& path);
IdsSystem load_system(const std::string& text);
std::string save_system(const IdsSystem& sys);
std::string save_system(const DiscreteIds& sys);

/// The two-delay example: A₁ = [[−4, 1], [−13, 2]], A₂ = [[0, −1], [1, 0]].
IdsSystem reference_system(double tau1, double tau2);
Matrix reference_a1();
Matrix reference_a2();

}  // namespace ids
