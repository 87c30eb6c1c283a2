#include "ids/criteria_lmi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ids::criteria {

using lmi::LmiProblem;
using lmi::MatrixVariable;
using lmi::VarKind;

namespace {

constexpr double kMaxCondition = 1e12;

// n × (n·count) matrix selecting block `index` of a stacked vector.
Matrix placement(std::size_t n, std::size_t count, std::size_t index) {
    Matrix e(n, n * count);
    for (std::size_t i = 0; i < n; ++i) e(i, index * n + i) = 1.0;
    return e;
}

void add_pd(LmiProblem& p, const std::string& name, std::size_t n) {
    p.add_variable(MatrixVariable{name, VarKind::symmetric, n, true});
}

Matrix checked_inverse(const Matrix& q, const std::string& what) {
    try {
        return spd_inverse(symmetrize(q), kMaxCondition);
    } catch (const LinalgError& e) {
        throw WitnessError(what + ": " + e.what());
    }
}

Matrix sum_of(const std::vector<Matrix>& ms) {
    Matrix s = ms.front();
    for (std::size_t i = 1; i < ms.size(); ++i) s += ms[i];
    return s;
}

void require_count(const IdsSystem& sys, const std::vector<Matrix>& ms, const char* what) {
    if (ms.size() != sys.terms()) {
        throw WitnessError(std::string(what) + ": expected one matrix per delay term");
    }
    for (const auto& m : ms) {
        if (m.rows() != sys.n() || m.cols() != sys.n()) {
            throw WitnessError(std::string(what) + ": matrix dimension does not match the system");
        }
    }
}

LmiProblem stacked(const std::vector<Matrix>& a, const std::vector<double>& weights) {
    const std::size_t n = a.front().rows();
    const std::size_t terms = a.size();
    LmiProblem p;
    for (std::size_t i = 0; i < terms; ++i) add_pd(p, q_name(i), n);
    Matrix m(n * terms, n);
    for (std::size_t i = 0; i < terms; ++i) m.set_block(i * n, 0, a[i] * weights[i]);
    const auto b = p.add_block("stacked", n * terms);
    for (std::size_t i = 0; i < terms; ++i) {
        p.add_term(b, q_name(i), m, m.transpose());
        p.add_congruence(b, q_name(i), placement(n, terms, i), -1.0);
    }
    return p;
}

}  // namespace

std::string q_name(std::size_t i) { return "Q" + std::to_string(i + 1); }
std::string s_name(std::size_t i) { return "S" + std::to_string(i + 1); }

LmiProblem build_amc(const IdsSystem& sys) {
    const std::size_t n = sys.n();
    const std::size_t terms = sys.terms();
    const double nn = static_cast<double>(terms);
    LmiProblem p;
    add_pd(p, "P", n);
    for (std::size_t i = 0; i < terms; ++i) add_pd(p, q_name(i), n);
    for (std::size_t i = 0; i < terms; ++i) {
        const Matrix& ai = sys.a(i);
        const auto b = p.add_block("coupled-" + std::to_string(i + 1), n);
        p.add_term(b, "P", ai.transpose() * (nn * sys.tau(i)), ai);
        for (std::size_t j = 0; j < terms; ++j) {
            p.add_term(b, q_name(j), ai.transpose() * (nn * sys.tau(i) * sys.tau(j)), ai);
        }
        p.add_term(b, q_name(i), -Matrix::identity(n), Matrix::identity(n));
    }
    return p;
}

LmiProblem build_coupled(const IdsSystem& sys) {
    const std::size_t n = sys.n();
    const std::size_t terms = sys.terms();
    const double nn = static_cast<double>(terms);
    LmiProblem p;
    for (std::size_t i = 0; i < terms; ++i) add_pd(p, q_name(i), n);
    for (std::size_t i = 0; i < terms; ++i) {
        const Matrix& ai = sys.a(i);
        const double w = nn * sys.tau(i) * sys.tau(i);
        const auto b = p.add_block("coupled-" + std::to_string(i + 1), n);
        for (std::size_t j = 0; j < terms; ++j) p.add_term(b, q_name(j), ai.transpose() * w, ai);
        p.add_term(b, q_name(i), -Matrix::identity(n), Matrix::identity(n));
    }
    return p;
}

LmiProblem build_single(const IdsSystem& sys) {
    const std::size_t n = sys.n();
    const double nn = static_cast<double>(sys.terms());
    LmiProblem p;
    add_pd(p, "Q", n);
    const auto b = p.add_block("single", n);
    for (std::size_t i = 0; i < sys.terms(); ++i) {
        const Matrix& ai = sys.a(i);
        p.add_term(b, "Q", ai.transpose() * (nn * sys.tau(i) * sys.tau(i)), ai);
    }
    p.add_term(b, "Q", -Matrix::identity(n), Matrix::identity(n));
    return p;
}

LmiProblem build_slack_lmi(const IdsSystem& sys) {
    const std::size_t n = sys.n();
    const std::size_t terms = sys.terms();
    const Matrix id = Matrix::identity(n);
    LmiProblem p;
    for (std::size_t i = 0; i < terms; ++i) add_pd(p, q_name(i), n);
    for (std::size_t i = 0; i < terms; ++i) add_pd(p, s_name(i), n);
    p.add_variable(MatrixVariable{"R", VarKind::general, n, false});

    const auto b0 = p.add_block("sum", n);
    for (std::size_t i = 0; i < terms; ++i) {
        p.add_term(b0, q_name(i), id, id);
        p.add_term(b0, s_name(i), id, id);
    }
    p.add_term(b0, "R", id * -2.0, id);

    const Matrix top = placement(n, 2, 0);
    const Matrix bottom = placement(n, 2, 1);
    for (std::size_t i = 0; i < terms; ++i) {
        const auto b = p.add_block("pair-" + std::to_string(i + 1), 2 * n);
        p.add_congruence(b, s_name(i), top, -1.0);
        p.add_congruence(b, q_name(i), bottom, -1.0);
        // 2·E₁ᵀ τᵢAᵢᵀ R E₂, symmetrized into the two off-diagonal blocks.
        p.add_term(b, "R", top.transpose() * sys.a(i).transpose() * (2.0 * sys.tau(i)), bottom);
    }
    return p;
}

LmiProblem build_stacked_lmi(const IdsSystem& sys) { return stacked(sys.a(), sys.tau()); }

LmiProblem build_delay_independent(const DiscreteIds& sys) {
    return stacked(sys.a(), std::vector<double>(sys.terms(), 1.0));
}

std::vector<Matrix> telescoping_weights(const std::vector<Matrix>& x) {
    if (x.empty()) throw WitnessError("empty chain");
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        if (!is_positive_definite(x[i] - x[i + 1])) {
            throw WitnessError("ordering violated: X" + std::to_string(i + 1) + " is not greater than X" +
                               std::to_string(i + 2));
        }
    }
    if (!is_positive_definite(x.back())) throw WitnessError("ordering violated: last matrix is not positive definite");
    std::vector<Matrix> q;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) q.push_back(x[i] - x[i + 1]);
    q.push_back(x.back());
    return q;
}

bool verify_split_nmi(const IdsSystem& sys, const std::vector<Matrix>& s, const std::vector<Matrix>& q) {
    require_count(sys, s, "S");
    require_count(sys, q, "Q");
    for (std::size_t i = 0; i < sys.terms(); ++i) {
        if (!is_positive_definite(s[i])) throw WitnessError("S" + std::to_string(i + 1) + " is not positive definite");
    }
    std::vector<Matrix> qinv;
    for (std::size_t i = 0; i < sys.terms(); ++i) qinv.push_back(checked_inverse(q[i], "Q" + std::to_string(i + 1)));
    for (std::size_t i = 0; i < sys.terms(); ++i) {
        const Matrix lhs = congruence(sys.a(i), qinv[i]) * (sys.tau(i) * sys.tau(i)) - s[i];
        if (!(lambda_max(symmetrize(lhs)) < 0.0)) return false;
    }
    const Matrix qsum_inv = checked_inverse(sum_of(q), "sum of Q");
    return lambda_max(symmetrize(sum_of(s) - qsum_inv)) < 0.0;
}

double inverse_nmi_margin(const IdsSystem& sys, const std::vector<Matrix>& q) {
    require_count(sys, q, "Q");
    Matrix acc(sys.n(), sys.n());
    for (std::size_t i = 0; i < sys.terms(); ++i) {
        const Matrix qinv = checked_inverse(q[i], "Q" + std::to_string(i + 1));
        acc += congruence(sys.a(i), qinv) * (sys.tau(i) * sys.tau(i));
    }
    acc -= checked_inverse(sum_of(q), "sum of Q");
    return lambda_max(symmetrize(acc));
}

bool verify_inverse_nmi(const IdsSystem& sys, const std::vector<Matrix>& q) { return inverse_nmi_margin(sys, q) < 0.0; }

SplitNmiWitness recover_split_nmi(const lmi::Witness& w, std::size_t terms) {
    const auto it = w.find("R");
    if (it == w.end()) throw WitnessError("witness has no R");
    const Matrix& r = it->second;
    const LuDecomposition lu(r);
    if (lu.singular() || lu.pivot_ratio() < 1e-13) {
        throw WitnessError("R is numerically singular");
    }
    const Matrix r_inv = lu.solve(Matrix::identity(r.rows()));
    SplitNmiWitness out;
    for (std::size_t i = 0; i < terms; ++i) {
        const auto qi = w.find(q_name(i));
        const auto si = w.find(s_name(i));
        if (qi == w.end() || si == w.end()) throw WitnessError("witness is missing Q/S matrices");
        out.q.push_back(symmetrize(r_inv.transpose() * qi->second * r_inv));
        out.s.push_back(si->second);
    }
    return out;
}

CoupledConversion split_witness_from_coupled(const IdsSystem& sys, const std::vector<Matrix>& q) {
    require_count(sys, q, "Q");
    const std::size_t n = sys.n();
    const double nn = static_cast<double>(sys.terms());
    const Matrix qsum = sum_of(q);
    double worst = -std::numeric_limits<double>::infinity();
    double min_eig = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sys.terms(); ++i) {
        const Matrix block = congruence(sys.a(i), qsum) * (nn * sys.tau(i) * sys.tau(i)) - q[i];
        worst = std::max(worst, lambda_max(symmetrize(block)));
        min_eig = std::min(min_eig, lambda_min(symmetrize(q[i])));
    }
    CoupledConversion out;
    out.slack = -worst;
    const double scale = std::max(1.0, qsum.max_abs());
    if (!(out.slack > 1e-14 * scale) || !(min_eig > 0.0)) {
        throw WitnessError("slack too small: the coupled LMIs are not strictly satisfied (slack = " +
                           std::to_string(out.slack) + ")");
    }
    out.epsilon = 0.5 * std::min(out.slack, min_eig);
    const Matrix p = checked_inverse(qsum * nn, "N times sum of Q");
    for (std::size_t i = 0; i < sys.terms(); ++i) {
        out.p.push_back(p);
        out.r.push_back(q[i] - Matrix::identity(n) * out.epsilon);
    }
    return out;
}

std::vector<Matrix> split_witness_from_inverse_nmi(const IdsSystem& sys, const std::vector<Matrix>& q) {
    if (!verify_inverse_nmi(sys, q)) {
        throw WitnessError("precondition violated: Q does not satisfy the inverse NMI");
    }
    const double nn = static_cast<double>(sys.terms());
    std::vector<Matrix> terms;
    Matrix sum_terms(sys.n(), sys.n());
    for (std::size_t i = 0; i < sys.terms(); ++i) {
        const Matrix qinv = checked_inverse(q[i], "Q" + std::to_string(i + 1));
        terms.push_back(symmetrize(congruence(sys.a(i), qinv) * (sys.tau(i) * sys.tau(i))));
        sum_terms += terms.back();
    }
    const Matrix omega = (checked_inverse(sum_of(q), "sum of Q") - sum_terms) * (1.0 / (2.0 * nn));
    std::vector<Matrix> s;
    for (auto& t : terms) s.push_back(t + omega);
    return s;
}

std::vector<Matrix> q_list(const lmi::Witness& w, std::size_t terms) {
    std::vector<Matrix> q;
    for (std::size_t i = 0; i < terms; ++i) {
        const auto it = w.find(q_name(i));
        if (it == w.end()) throw WitnessError("witness is missing " + q_name(i));
        q.push_back(it->second);
    }
    return q;
}

}  // namespace ids::criteria
