#pragma once

// Homogeneous strict LMIs in named matrix variables.
//
// A problem is a list of affine symmetric blocks B_k(V₁, …, V_m), each required
// to be negative definite. Every block is homogeneous (zero constant part), so
// a witness can be rescaled freely; the solver fixes the scale by requiring the
// traces of all positive-definite variables to sum to one.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ids/linalg.hpp"

namespace ids::lmi {

class LmiError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class VarKind { symmetric, general };

struct MatrixVariable {
    std::string name;
    VarKind kind = VarKind::symmetric;
    std::size_t dim = 0;
    bool require_pd = false;

    /// dim·(dim+1)/2 for symmetric variables, dim² for general ones.
    [[nodiscard]] std::size_t scalar_count() const;
};

/// Contribution left · V · right (or left · Vᵀ · right). Blocks are
/// symmetrized on evaluation, so an off-diagonal pair X, Xᵀ is written as a
/// single term with a factor 2.
struct Term {
    std::string var;
    Matrix left;
    Matrix right;
    bool transpose = false;
};

struct AffineBlock {
    std::string label;
    std::size_t dim = 0;
    Matrix constant;  // must be zero for the solver
    std::vector<Term> terms;
};

using Witness = std::map<std::string, Matrix>;

class LmiProblem {
public:
    void add_variable(MatrixVariable v);
    /// Appends an empty block and returns its index.
    std::size_t add_block(std::string label, std::size_t dim);
    /// Sets the constant part of a block (non-zero makes the problem
    /// non-homogeneous, which the solver rejects).
    void set_constant(std::size_t block, Matrix constant);
    void add_term(std::size_t block, std::string var, Matrix left, Matrix right, bool transpose = false);
    /// Adds the congruence term Lᵀ·V·L where `placement` is dim(V)×dim(block).
    void add_congruence(std::size_t block, const std::string& var, const Matrix& placement, double scale = 1.0);

    [[nodiscard]] const std::vector<MatrixVariable>& variables() const { return vars_; }
    [[nodiscard]] const std::vector<AffineBlock>& blocks() const { return blocks_; }
    [[nodiscard]] const MatrixVariable& variable(const std::string& name) const;
    [[nodiscard]] bool has_variable(const std::string& name) const;
    [[nodiscard]] std::size_t scalar_count() const;
    [[nodiscard]] bool homogeneous() const;

    friend bool operator==(const LmiProblem&, const LmiProblem&);

private:
    std::vector<MatrixVariable> vars_;
    std::vector<AffineBlock> blocks_;
};

bool operator==(const Term& a, const Term& b);

struct Evaluation {
    /// Explicit blocks first, then one −V block per positive-definite variable.
    std::vector<Matrix> blocks;
    std::vector<std::string> labels;
    double worst_lambda_max = 0.0;
};

/// Throws LmiError when a variable is missing or has the wrong shape.
Evaluation evaluate(const LmiProblem& problem, const Witness& witness);
Matrix evaluate_block(const LmiProblem& problem, std::size_t block, const Witness& witness);

/// Σ trace(V) over positive-definite variables.
double pd_trace(const LmiProblem& problem, const Witness& witness);
/// Rescales so that pd_trace == 1; throws when the trace is not positive.
Witness normalize(const LmiProblem& problem, const Witness& witness);
Witness scale(const Witness& witness, double factor);

/// True iff, after trace normalization, every block has λ-max ≤ −tol and every
/// positive-definite variable has λ-min ≥ tol.
bool check_witness(const LmiProblem& problem, const Witness& witness, double tol);

struct SolverConfig {
    std::uint64_t seed = 20140528;
    int restarts = 8;
    int max_iters = 5000;
    double eps_feas = 1e-7;
};

enum class FeasStatus { feasible, not_found };

struct FeasReport {
    FeasStatus status = FeasStatus::not_found;
    double lambda_star = 0.0;  // worst block λ-max at the normalized witness
    Witness witness;           // trace-normalized
    int iterations = 0;
    int restarts = 0;

    [[nodiscard]] bool feasible() const { return status == FeasStatus::feasible; }
};

/// Minimizes the worst-block λ-max over the trace-normalized slice. A
/// subgradient warm-up is followed by quasi-Newton iterations on a
/// log-sum-exp smoothing with a shrinking temperature. "not_found" is not an
/// infeasibility certificate.
FeasReport solve_feasibility(const LmiProblem& problem, const SolverConfig& cfg = {});

const char* to_string(FeasStatus s);

/// For positive definite Q, S: returns R = S when λ-max(Q − S⁻¹) < 0, which
/// then satisfies RᵀQR + S − (R + Rᵀ) ≺ 0; otherwise nullopt.
std::optional<Matrix> linearize_inverse_bound(const Matrix& q, const Matrix& s);
/// RᵀQR + S − (R + Rᵀ)
Matrix linearization_residual(const Matrix& q, const Matrix& s, const Matrix& r);

}  // namespace ids::lmi
