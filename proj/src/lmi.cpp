#include "ids/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace ids::lmi {

std::size_t MatrixVariable::scalar_count() const {
    return kind == VarKind::symmetric ? dim * (dim + 1) / 2 : dim * dim;
}

bool operator==(const Term& a, const Term& b) {
    return a.var == b.var && a.transpose == b.transpose && a.left == b.left && a.right == b.right;
}

bool operator==(const LmiProblem& a, const LmiProblem& b) {
    if (a.vars_.size() != b.vars_.size() || a.blocks_.size() != b.blocks_.size()) return false;
    for (std::size_t i = 0; i < a.vars_.size(); ++i) {
        const auto& x = a.vars_[i];
        const auto& y = b.vars_[i];
        if (x.name != y.name || x.kind != y.kind || x.dim != y.dim || x.require_pd != y.require_pd) return false;
    }
    for (std::size_t i = 0; i < a.blocks_.size(); ++i) {
        const auto& x = a.blocks_[i];
        const auto& y = b.blocks_[i];
        if (x.label != y.label || x.dim != y.dim || !(x.constant == y.constant) || !(x.terms == y.terms)) return false;
    }
    return true;
}

void LmiProblem::add_variable(MatrixVariable v) {
    if (v.dim == 0) throw LmiError("variable " + v.name + " has zero dimension");
    if (has_variable(v.name)) throw LmiError("duplicate variable " + v.name);
    if (v.kind == VarKind::general && v.require_pd) {
        throw LmiError("positive definiteness only applies to symmetric variables (" + v.name + ")");
    }
    vars_.push_back(std::move(v));
}

std::size_t LmiProblem::add_block(std::string label, std::size_t dim) {
    if (dim == 0) throw LmiError("block " + label + " has zero dimension");
    AffineBlock b;
    b.label = std::move(label);
    b.dim = dim;
    b.constant = Matrix(dim, dim);
    blocks_.push_back(std::move(b));
    return blocks_.size() - 1;
}

void LmiProblem::set_constant(std::size_t block, Matrix constant) {
    auto& b = blocks_.at(block);
    if (constant.rows() != b.dim || constant.cols() != b.dim) {
        throw LmiError("constant for block " + b.label + " has the wrong shape");
    }
    b.constant = symmetrize(constant);
}

void LmiProblem::add_term(std::size_t block, std::string var, Matrix left, Matrix right, bool transpose) {
    auto& b = blocks_.at(block);
    const auto& v = variable(var);
    if (left.rows() != b.dim || left.cols() != v.dim || right.rows() != v.dim || right.cols() != b.dim) {
        throw LmiError("term for " + var + " in block " + b.label + " has incompatible factor shapes");
    }
    b.terms.push_back(Term{std::move(var), std::move(left), std::move(right), transpose});
}

void LmiProblem::add_congruence(std::size_t block, const std::string& var, const Matrix& placement, double scale) {
    add_term(block, var, placement.transpose() * scale, placement);
}

const MatrixVariable& LmiProblem::variable(const std::string& name) const {
    for (const auto& v : vars_)
        if (v.name == name) return v;
    throw LmiError("unknown variable " + name);
}

bool LmiProblem::has_variable(const std::string& name) const {
    return std::any_of(vars_.begin(), vars_.end(), [&](const auto& v) { return v.name == name; });
}

std::size_t LmiProblem::scalar_count() const {
    std::size_t s = 0;
    for (const auto& v : vars_) s += v.scalar_count();
    return s;
}

bool LmiProblem::homogeneous() const {
    return std::all_of(blocks_.begin(), blocks_.end(), [](const auto& b) { return b.constant.max_abs() == 0.0; });
}

namespace {

const Matrix& lookup(const LmiProblem& problem, const Witness& w, const std::string& name) {
    const auto& v = problem.variable(name);
    const auto it = w.find(name);
    if (it == w.end()) throw LmiError("witness is missing variable " + name);
    if (it->second.rows() != v.dim || it->second.cols() != v.dim) {
        throw LmiError("witness variable " + name + " has the wrong dimension");
    }
    return it->second;
}

Matrix block_value(const LmiProblem& problem, const AffineBlock& b, const Witness& w) {
    Matrix acc = b.constant;
    for (const auto& t : b.terms) {
        const Matrix& v = lookup(problem, w, t.var);
        acc += t.left * (t.transpose ? v.transpose() : v) * t.right;
    }
    return symmetrize(acc);
}

}  // namespace

Matrix evaluate_block(const LmiProblem& problem, std::size_t block, const Witness& witness) {
    return block_value(problem, problem.blocks().at(block), witness);
}

Evaluation evaluate(const LmiProblem& problem, const Witness& witness) {
    Evaluation ev;
    ev.worst_lambda_max = -std::numeric_limits<double>::infinity();
    for (const auto& v : problem.variables()) (void)lookup(problem, witness, v.name);
    for (const auto& b : problem.blocks()) {
        ev.blocks.push_back(block_value(problem, b, witness));
        ev.labels.push_back(b.label);
    }
    for (const auto& v : problem.variables()) {
        if (!v.require_pd) continue;
        ev.blocks.push_back(-symmetrize(witness.at(v.name)));
        ev.labels.push_back("-" + v.name);
    }
    for (const auto& m : ev.blocks) ev.worst_lambda_max = std::max(ev.worst_lambda_max, lambda_max(m));
    return ev;
}

double pd_trace(const LmiProblem& problem, const Witness& witness) {
    double t = 0.0;
    for (const auto& v : problem.variables())
        if (v.require_pd) t += lookup(problem, witness, v.name).trace();
    return t;
}

Witness scale(const Witness& witness, double factor) {
    Witness out;
    for (const auto& [k, m] : witness) out.emplace(k, m * factor);
    return out;
}

Witness normalize(const LmiProblem& problem, const Witness& witness) {
    const double t = pd_trace(problem, witness);
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw LmiError("cannot normalize a witness whose positive-definite trace is not positive");
    }
    return scale(witness, 1.0 / t);
}

bool check_witness(const LmiProblem& problem, const Witness& witness, double tol) {
    for (const auto& v : problem.variables()) (void)lookup(problem, witness, v.name);
    const double t = pd_trace(problem, witness);
    if (!(t > 0.0) || !std::isfinite(t)) return false;
    const Witness w = scale(witness, 1.0 / t);
    for (const auto& b : problem.blocks())
        if (lambda_max(block_value(problem, b, w)) > -tol) return false;
    for (const auto& v : problem.variables())
        if (v.require_pd && lambda_min(symmetrize(w.at(v.name))) < tol) return false;
    return true;
}

const char* to_string(FeasStatus s) { return s == FeasStatus::feasible ? "feasible" : "not_found"; }

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

namespace {

// Coordinates: symmetric variables use the orthonormal basis E_ii and
// (E_ij + E_ji)/√2 (i < j) so the Euclidean metric on coordinates is the
// Frobenius metric on matrices; general variables use E_ij.
class Layout {
public:
    explicit Layout(const LmiProblem& p) : problem_(p) {
        for (const auto& v : p.variables()) {
            offsets_.push_back(size_);
            size_ += v.scalar_count();
        }
    }

    [[nodiscard]] std::size_t size() const { return size_; }

    [[nodiscard]] Matrix basis(std::size_t var, std::size_t k) const {
        const auto& v = problem_.variables()[var];
        Matrix m(v.dim, v.dim);
        if (v.kind == VarKind::general) {
            m(k / v.dim, k % v.dim) = 1.0;
            return m;
        }
        const auto [i, j] = sym_index(v.dim, k);
        if (i == j) {
            m(i, i) = 1.0;
        } else {
            m(i, j) = m(j, i) = 1.0 / std::sqrt(2.0);
        }
        return m;
    }

    [[nodiscard]] Witness unpack(std::span<const double> x) const {
        Witness w;
        for (std::size_t vi = 0; vi < problem_.variables().size(); ++vi) {
            const auto& v = problem_.variables()[vi];
            Matrix m(v.dim, v.dim);
            for (std::size_t k = 0; k < v.scalar_count(); ++k) {
                const double c = x[offsets_[vi] + k];
                if (v.kind == VarKind::general) {
                    m(k / v.dim, k % v.dim) = c;
                } else {
                    const auto [i, j] = sym_index(v.dim, k);
                    if (i == j) {
                        m(i, i) = c;
                    } else {
                        m(i, j) = m(j, i) = c / std::sqrt(2.0);
                    }
                }
            }
            w.emplace(v.name, std::move(m));
        }
        return w;
    }

    [[nodiscard]] std::vector<double> pack(const Witness& w) const {
        std::vector<double> x(size_, 0.0);
        for (std::size_t vi = 0; vi < problem_.variables().size(); ++vi) {
            const auto& v = problem_.variables()[vi];
            const Matrix& m = w.at(v.name);
            for (std::size_t k = 0; k < v.scalar_count(); ++k) {
                if (v.kind == VarKind::general) {
                    x[offsets_[vi] + k] = m(k / v.dim, k % v.dim);
                } else {
                    const auto [i, j] = sym_index(v.dim, k);
                    x[offsets_[vi] + k] = i == j ? m(i, i) : std::sqrt(2.0) * 0.5 * (m(i, j) + m(j, i));
                }
            }
        }
        return x;
    }

    [[nodiscard]] std::size_t offset(std::size_t var) const { return offsets_[var]; }

    static std::pair<std::size_t, std::size_t> sym_index(std::size_t n, std::size_t k) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t row = n - i;
            if (k < row) return {i, i + k};
            k -= row;
        }
        throw LmiError("symmetric index out of range");
    }

private:
    const LmiProblem& problem_;
    std::vector<std::size_t> offsets_;
    std::size_t size_ = 0;
};

// Each block (explicit ones plus the implicit −V blocks) as a linear map
// x ↦ Σ_j x_j F_j with the F_j stored densely.
struct LinearBlock {
    std::size_t dim = 0;
    std::vector<std::size_t> active;      // coordinates with nonzero F_j
    std::vector<std::vector<double>> coef;  // coef[a] = F_{active[a]}, row-major dim×dim
};

struct Compiled {
    std::size_t d = 0;
    std::vector<LinearBlock> blocks;
    std::vector<double> trace;  // c with cᵀx = Σ trace of PD variables
};

Compiled compile(const LmiProblem& p, const Layout& layout) {
    Compiled c;
    c.d = layout.size();
    c.trace.assign(c.d, 0.0);
    const auto& vars = p.variables();

    auto var_index = [&](const std::string& name) {
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i].name == name) return i;
        throw LmiError("unknown variable " + name);
    };

    for (const auto& b : p.blocks()) {
        LinearBlock lb;
        lb.dim = b.dim;
        std::vector<std::size_t> used;
        for (const auto& t : b.terms) used.push_back(var_index(t.var));
        std::sort(used.begin(), used.end());
        used.erase(std::unique(used.begin(), used.end()), used.end());
        for (std::size_t vi : used) {
            for (std::size_t k = 0; k < vars[vi].scalar_count(); ++k) {
                const Matrix e = layout.basis(vi, k);
                Matrix acc(b.dim, b.dim);
                for (const auto& t : b.terms) {
                    if (t.var != vars[vi].name) continue;
                    acc += t.left * (t.transpose ? e.transpose() : e) * t.right;
                }
                acc = symmetrize(acc);
                if (acc.max_abs() == 0.0) continue;
                lb.active.push_back(layout.offset(vi) + k);
                lb.coef.emplace_back(acc.data().begin(), acc.data().end());
            }
        }
        c.blocks.push_back(std::move(lb));
    }
    for (std::size_t vi = 0; vi < vars.size(); ++vi) {
        const auto& v = vars[vi];
        if (!v.require_pd) continue;
        LinearBlock lb;
        lb.dim = v.dim;
        for (std::size_t k = 0; k < v.scalar_count(); ++k) {
            Matrix e = layout.basis(vi, k);
            e *= -1.0;
            lb.active.push_back(layout.offset(vi) + k);
            lb.coef.emplace_back(e.data().begin(), e.data().end());
            c.trace[layout.offset(vi) + k] = -e.trace();
        }
        c.blocks.push_back(std::move(lb));
    }
    return c;
}

// Objective restricted to the affine slice cᵀx = 1, parametrized as
// x = x0 + Z y with Z an orthonormal basis of c⊥.
class SliceObjective {
public:
    explicit SliceObjective(const Compiled& c) : c_(c) {
        const std::size_t d = c.d;
        const double cc = dot(c.trace, c.trace);
        x0_.resize(d);
        for (std::size_t i = 0; i < d; ++i) x0_[i] = c.trace[i] / cc;
        // Householder reflector mapping c onto a multiple of e₀; its columns
        // 1..d−1 span c⊥.
        std::vector<double> v = c.trace;
        const double nc = std::sqrt(cc);
        v[0] += v[0] >= 0.0 ? nc : -nc;
        const double vv = dot(v, v);
        m_ = d - 1;
        z_ = Matrix(d, m_);
        for (std::size_t col = 1; col < d; ++col)
            for (std::size_t row = 0; row < d; ++row)
                z_(row, col - 1) = (row == col ? 1.0 : 0.0) - 2.0 * v[row] * v[col] / vv;
        vals_.resize(c.blocks.size());
        eig_.resize(c.blocks.size());
    }

    [[nodiscard]] std::size_t dim() const { return m_; }

    [[nodiscard]] std::vector<double> to_x(std::span<const double> y) const {
        std::vector<double> x = x0_;
        for (std::size_t r = 0; r < c_.d; ++r) {
            double s = 0.0;
            for (std::size_t k = 0; k < m_; ++k) s += z_(r, k) * y[k];
            x[r] += s;
        }
        return x;
    }

    /// Projects x (assumed on the slice) to slice coordinates.
    [[nodiscard]] std::vector<double> to_y(std::span<const double> x) const {
        std::vector<double> y(m_, 0.0);
        for (std::size_t k = 0; k < m_; ++k) {
            double s = 0.0;
            for (std::size_t r = 0; r < c_.d; ++r) s += z_(r, k) * (x[r] - x0_[r]);
            y[k] = s;
        }
        return y;
    }

    /// Worst λ-max and a subgradient (top eigenvector of the worst block).
    double subgradient(std::span<const double> y, std::vector<double>& g) {
        ++evals_;
        decompose(to_x(y));
        std::size_t worst = 0;
        double f = -std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < eig_.size(); ++b) {
            if (eig_[b].values.back() > f) {
                f = eig_[b].values.back();
                worst = b;
            }
        }
        std::vector<double> gx(c_.d, 0.0);
        const auto& e = eig_[worst];
        const std::size_t n = c_.blocks[worst].dim;
        Matrix w(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) w(i, j) = e.vectors(i, n - 1) * e.vectors(j, n - 1);
        accumulate(worst, w, gx);
        reduce(gx, g);
        return f;
    }

    /// Log-sum-exp smoothing f_μ = μ log Σ exp(λ/μ) over all block
    /// eigenvalues, with gradient. `fmax` receives the unsmoothed value.
    double smoothed(std::span<const double> y, double mu, std::vector<double>& g, double& fmax) {
        ++evals_;
        decompose(to_x(y));
        fmax = -std::numeric_limits<double>::infinity();
        for (const auto& e : eig_) fmax = std::max(fmax, e.values.back());
        double sum = 0.0;
        for (const auto& e : eig_)
            for (double l : e.values) sum += std::exp((l - fmax) / mu);
        std::vector<double> gx(c_.d, 0.0);
        for (std::size_t b = 0; b < eig_.size(); ++b) {
            const auto& e = eig_[b];
            const std::size_t n = c_.blocks[b].dim;
            Matrix w(n, n);
            bool any = false;
            for (std::size_t k = 0; k < n; ++k) {
                const double wk = std::exp((e.values[k] - fmax) / mu) / sum;
                if (wk < 1e-17) continue;
                any = true;
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) w(i, j) += wk * e.vectors(i, k) * e.vectors(j, k);
            }
            if (any) accumulate(b, w, gx);
        }
        reduce(gx, g);
        return fmax + mu * std::log(sum);
    }

    [[nodiscard]] long evaluations() const { return evals_; }

private:
    void decompose(const std::vector<double>& x) {
        for (std::size_t b = 0; b < c_.blocks.size(); ++b) {
            const auto& lb = c_.blocks[b];
            Matrix& m = vals_[b];
            m = Matrix(lb.dim, lb.dim);
            auto md = m.data();
            for (std::size_t a = 0; a < lb.active.size(); ++a) {
                const double xa = x[lb.active[a]];
                if (xa == 0.0) continue;
                const auto& f = lb.coef[a];
                for (std::size_t k = 0; k < f.size(); ++k) md[k] += xa * f[k];
            }
            eig_[b] = sym_eigen(m);
        }
    }

    void accumulate(std::size_t b, const Matrix& w, std::vector<double>& gx) const {
        const auto& lb = c_.blocks[b];
        const auto wd = w.data();
        for (std::size_t a = 0; a < lb.active.size(); ++a) {
            const auto& f = lb.coef[a];
            double s = 0.0;
            for (std::size_t k = 0; k < f.size(); ++k) s += wd[k] * f[k];
            gx[lb.active[a]] += s;
        }
    }

    void reduce(const std::vector<double>& gx, std::vector<double>& g) const {
        g.assign(m_, 0.0);
        for (std::size_t k = 0; k < m_; ++k) {
            double s = 0.0;
            for (std::size_t r = 0; r < c_.d; ++r) s += z_(r, k) * gx[r];
            g[k] = s;
        }
    }

    const Compiled& c_;
    std::vector<double> x0_;
    Matrix z_;
    std::size_t m_ = 0;
    std::vector<Matrix> vals_;
    std::vector<SymEigen> eig_;
    long evals_ = 0;
};

struct Search {
    std::vector<double> best_y;
    double best_f = std::numeric_limits<double>::infinity();
    double target = 0.0;
    int iterations = 0;
    int budget = 0;

    void offer(std::span<const double> y, double f) {
        if (f < best_f) {
            best_f = f;
            best_y.assign(y.begin(), y.end());
        }
    }
    [[nodiscard]] bool done() const { return best_f <= target || iterations >= budget; }
};

// Projected subgradient with a Polyak step towards an adaptive level
// f_best − δ; δ halves after a run of non-improving steps.
void subgradient_phase(SliceObjective& obj, std::vector<double> y, int iters, Search& s) {
    std::vector<double> g;
    double f = obj.subgradient(y, g);
    s.offer(y, f);
    double delta = std::max(std::abs(f), 1e-3);
    int stall = 0;
    for (int k = 0; k < iters && !s.done(); ++k) {
        ++s.iterations;
        const double gg = dot(g, g);
        if (gg == 0.0) break;
        const double level = std::min(s.best_f - delta, s.target * 2.0);
        const double step = (f - level) / gg;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] -= step * g[i];
        const double prev_best = s.best_f;
        f = obj.subgradient(y, g);
        s.offer(y, f);
        if (s.best_f < prev_best - 1e-3 * delta) {
            stall = 0;
        } else if (++stall >= 10) {
            delta *= 0.5;
            stall = 0;
            y = s.best_y;
            f = obj.subgradient(y, g);
        }
    }
}

// BFGS with a weak Wolfe line search on the smoothed objective, with the
// temperature μ reduced by a factor 10 per stage.
void quasi_newton_phase(SliceObjective& obj, std::vector<double> y, Search& s) {
    const std::size_t m = y.size();
    std::vector<double> g, g_new, p(m), y_new(m);
    double fmax = 0.0;
    double mu = std::max(1e-2 * std::abs(s.best_f), 1e-6);
    const double mu_floor = 1e-13;
    Matrix h = Matrix::identity(m);
    bool fresh = true;

    while (!s.done() && mu >= mu_floor) {
        double f = obj.smoothed(y, mu, g, fmax);
        s.offer(y, fmax);
        int quiet = 0;
        const int stage_cap = 400;
        for (int it = 0; it < stage_cap && !s.done(); ++it) {
            ++s.iterations;
            for (std::size_t i = 0; i < m; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < m; ++j) acc += h(i, j) * g[j];
                p[i] = -acc;
            }
            double slope = dot(g, p);
            if (!(slope < 0.0)) {
                h = Matrix::identity(m);
                fresh = true;
                for (std::size_t i = 0; i < m; ++i) p[i] = -g[i];
                slope = -dot(g, g);
                if (!(slope < 0.0)) break;
            }
            // Weak Wolfe bracketing.
            double lo = 0.0, hi = std::numeric_limits<double>::infinity(), t = 1.0;
            double f_new = f;
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                for (std::size_t i = 0; i < m; ++i) y_new[i] = y[i] + t * p[i];
                double fm_new = 0.0;
                f_new = obj.smoothed(y_new, mu, g_new, fm_new);
                s.offer(y_new, fm_new);
                if (!(f_new <= f + 1e-4 * t * slope)) {
                    hi = t;
                } else if (dot(g_new, p) < 0.9 * slope) {
                    lo = t;
                } else {
                    accepted = true;
                    break;
                }
                t = std::isinf(hi) ? 2.0 * t : 0.5 * (lo + hi);
                if (hi - lo < 1e-16 * std::max(1.0, t)) break;
            }
            if (!accepted) {
                if (lo > 0.0) {
                    for (std::size_t i = 0; i < m; ++i) y_new[i] = y[i] + lo * p[i];
                    double fm_new = 0.0;
                    f_new = obj.smoothed(y_new, mu, g_new, fm_new);
                } else {
                    break;  // no progress possible at this temperature
                }
            }
            std::vector<double> sv(m), yv(m);
            for (std::size_t i = 0; i < m; ++i) {
                sv[i] = y_new[i] - y[i];
                yv[i] = g_new[i] - g[i];
            }
            const double sy = dot(sv, yv);
            if (sy > 1e-300 && std::isfinite(sy)) {
                if (fresh) {
                    const double scale0 = sy / dot(yv, yv);
                    h = Matrix::identity(m) * scale0;
                    fresh = false;
                }
                // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
                const double rho = 1.0 / sy;
                const auto hy = h * std::span<const double>(yv);
                const double yhy = dot(yv, hy);
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < m; ++j)
                        h(i, j) += -rho * (sv[i] * hy[j] + hy[i] * sv[j]) + (rho * rho * yhy + rho) * sv[i] * sv[j];
            }
            const double decrease = f - f_new;
            y = y_new;
            g = g_new;
            f = f_new;
            if (decrease <= 1e-15 * std::max(1.0, std::abs(f))) {
                if (++quiet >= 5) break;
            } else {
                quiet = 0;
            }
        }
        mu *= 0.1;
        // Restart the stage from the best unsmoothed point seen so far.
        y = s.best_y;
        h = Matrix::identity(m);
        fresh = true;
    }
}

}  // namespace

FeasReport solve_feasibility(const LmiProblem& problem, const SolverConfig& cfg) {
    if (!problem.homogeneous()) {
        throw LmiError("non-homogeneous problem: every block must have a zero constant part");
    }
    const bool has_pd = std::any_of(problem.variables().begin(), problem.variables().end(),
                                    [](const auto& v) { return v.require_pd; });
    if (!has_pd) {
        throw LmiError("no positive definite variable to normalize the trace");
    }
    if (cfg.restarts < 1 || cfg.max_iters < 1 || !(cfg.eps_feas > 0.0)) {
        throw LmiError("invalid solver configuration");
    }

    const Layout layout(problem);
    const Compiled compiled = compile(problem, layout);
    SliceObjective obj(compiled);
    const std::size_t m = obj.dim();

    FeasReport report;
    std::vector<double> overall_best_y;
    double overall_best = std::numeric_limits<double>::infinity();
    int total_iters = 0;
    int used = 0;

    for (int r = 0; r < cfg.restarts; ++r) {
        ++used;
        std::mt19937_64 rng(cfg.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(r + 1));
        std::normal_distribution<double> normal(0.0, 1.0);

        // Restart 0 starts from identity PD variables and identity general
        // variables; later restarts from random PD / random general matrices.
        Witness start;
        for (const auto& v : problem.variables()) {
            Matrix mtx(v.dim, v.dim);
            if (r == 0) {
                mtx = Matrix::identity(v.dim);
            } else {
                Matrix g(v.dim, v.dim);
                for (auto& e : g.data()) e = normal(rng);
                if (v.kind == VarKind::symmetric) {
                    mtx = g * g.transpose() * (1.0 / static_cast<double>(v.dim)) + Matrix::identity(v.dim) * 0.1;
                } else {
                    mtx = g + Matrix::identity(v.dim);
                }
            }
            start.emplace(v.name, std::move(mtx));
        }
        std::vector<double> x = layout.pack(start);
        const double cx = dot(compiled.trace, x);
        for (double& e : x) e /= cx;

        Search s;
        s.target = -2.0 * cfg.eps_feas;
        s.budget = cfg.max_iters;
        if (m == 0) {
            std::vector<double> g;
            std::vector<double> y;
            s.offer(y, obj.subgradient(y, g));
        } else {
            const std::vector<double> y0 = obj.to_y(x);
            subgradient_phase(obj, y0, std::max(1, cfg.max_iters / 10), s);
            if (!s.done()) quasi_newton_phase(obj, s.best_y, s);
        }
        total_iters += s.iterations;
        if (s.best_f < overall_best) {
            overall_best = s.best_f;
            overall_best_y = s.best_y;
        }
        if (overall_best <= s.target) break;
    }

    Witness w = layout.unpack(obj.to_x(overall_best_y));
    w = normalize(problem, w);
    report.witness = std::move(w);
    report.lambda_star = evaluate(problem, report.witness).worst_lambda_max;
    report.iterations = total_iters;
    report.restarts = used;
    report.status = check_witness(problem, report.witness, cfg.eps_feas) ? FeasStatus::feasible
                                                                         : FeasStatus::not_found;
    return report;
}

std::optional<Matrix> linearize_inverse_bound(const Matrix& q, const Matrix& s) {
    if (!q.square() || !s.square() || q.rows() != s.rows()) {
        throw LmiError("linearization needs square matrices of equal size");
    }
    if (!is_positive_definite(q) || !is_positive_definite(s)) {
        throw LmiError("linearization needs positive definite Q and S");
    }
    const Matrix gap = symmetrize(q - inverse(s));
    if (lambda_max(gap) < 0.0) return s;
    return std::nullopt;
}

Matrix linearization_residual(const Matrix& q, const Matrix& s, const Matrix& r) {
    return symmetrize(r.transpose() * q * r + s - (r + r.transpose()));
}

}  // namespace ids::lmi
