#include "ids/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

namespace ids::sim {

HistorySpec HistorySpec::make_constant(std::vector<double> c) {
    HistorySpec s;
    s.kind = HistoryKind::constant;
    s.constant = std::move(c);
    return s;
}

HistorySpec HistorySpec::make_random_smooth(std::uint64_t seed) {
    HistorySpec s;
    s.kind = HistoryKind::random_smooth;
    s.seed = seed;
    return s;
}

HistorySpec HistorySpec::make_sampled(std::vector<std::vector<double>> samples) {
    HistorySpec s;
    s.kind = HistoryKind::custom_sampled;
    s.samples = std::move(samples);
    return s;
}

std::function<std::vector<double>(double)> make_history(const HistorySpec& spec, std::size_t n, double tau) {
    switch (spec.kind) {
        case HistoryKind::constant: {
            if (spec.constant.size() != n) {
                throw SimulationError("constant history has dimension " + std::to_string(spec.constant.size()) +
                                      ", system has " + std::to_string(n));
            }
            return [c = spec.constant](double) { return c; };
        }
        case HistoryKind::random_smooth: {
            constexpr int modes = 3;
            std::mt19937_64 rng(spec.seed);
            std::uniform_real_distribution<double> unit(-1.0, 1.0);
            std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
            std::vector<double> offset(n), amp(n * modes), ph(n * modes);
            for (std::size_t k = 0; k < n; ++k) {
                offset[k] = unit(rng);
                for (int j = 0; j < modes; ++j) {
                    amp[k * modes + j] = unit(rng) / (j + 1);
                    ph[k * modes + j] = phase(rng);
                }
            }
            return [=](double s) {
                std::vector<double> v(n);
                for (std::size_t k = 0; k < n; ++k) {
                    double acc = offset[k];
                    for (int j = 0; j < modes; ++j) {
                        const double omega = (j + 1) * std::numbers::pi / tau;
                        acc += amp[k * modes + j] * std::sin(omega * s + ph[k * modes + j]);
                    }
                    v[k] = acc;
                }
                return v;
            };
        }
        case HistoryKind::custom_sampled: {
            if (spec.samples.size() < 2) throw SimulationError("sampled history needs at least 2 samples");
            for (const auto& v : spec.samples) {
                if (v.size() != n) throw SimulationError("sampled history dimension does not match the system");
            }
            return [samples = spec.samples, tau, n](double s) {
                const double m = static_cast<double>(samples.size() - 1);
                const double u = std::clamp((s + tau) / tau * m, 0.0, m);
                const auto lo = std::min(static_cast<std::size_t>(std::floor(u)), samples.size() - 2);
                const double w = u - static_cast<double>(lo);
                std::vector<double> v(n);
                for (std::size_t k = 0; k < n; ++k) v[k] = (1.0 - w) * samples[lo][k] + w * samples[lo + 1][k];
                return v;
            };
        }
    }
    throw SimulationError("unknown history kind");
}

double Trajectory::time(std::size_t index) const {
    return (static_cast<double>(index) - static_cast<double>(history_steps)) * h;
}

double Trajectory::max_norm_after_zero() const {
    double r = norm2(x0_plus);
    for (std::size_t j = history_steps + 1; j < samples.size(); ++j) r = std::max(r, norm2(samples[j]));
    return r;
}

namespace {

// Value of node `j` (absolute index) as the left end of [t_j, t_{j+1}].
const std::vector<double>& left_value(const Trajectory& tr, std::size_t j) {
    return j == tr.history_steps ? tr.x0_plus : tr.samples[j];
}

void axpy(std::vector<double>& y, double a, const std::vector<double>& x) {
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}

}  // namespace

Trajectory simulate(const IdsSystem& sys, const HistorySpec& history, double h, double t_final) {
    const std::size_t n = sys.n();
    const std::size_t terms = sys.terms();
    double tau_min = sys.tau(0);
    for (double t : sys.tau()) tau_min = std::min(tau_min, t);

    if (!(h > 0.0) || !std::isfinite(h)) throw SimulationError("step size must be positive");
    if (h > tau_min / 8.0 * (1.0 + 1e-12)) {
        throw SimulationError("step size too large: h must not exceed min tau / 8 = " + std::to_string(tau_min / 8.0));
    }
    if (!(t_final >= sys.tau_max())) throw SimulationError("final time must be at least the largest delay");

    Trajectory tr;
    tr.h = h;
    for (std::size_t i = 0; i < terms; ++i) {
        const auto k = static_cast<std::size_t>(std::llround(sys.tau(i) / h));
        tr.delay_steps.push_back(k);
        tr.snapped_tau.push_back(static_cast<double>(k) * h);
        tr.snap_error.push_back(static_cast<double>(k) * h - sys.tau(i));
        tr.history_steps = std::max(tr.history_steps, k);
    }
    const auto steps = static_cast<std::size_t>(std::llround(t_final / h));
    tr.t_final = static_cast<double>(steps) * h;
    const std::size_t big_k = tr.history_steps;

    const auto phi = make_history(history, n, sys.tau_max());
    tr.samples.reserve(big_k + steps + 1);
    for (std::size_t j = 0; j <= big_k; ++j) {
        tr.samples.push_back(phi(tr.time(j)));
        tr.history_norm = std::max(tr.history_norm, norm2(tr.samples.back()));
    }

    // x(0⁺) = Σ Aᵢ ∫_{−τᵢ}^0 φ by the trapezoid rule on the history nodes.
    tr.x0_plus.assign(n, 0.0);
    for (std::size_t i = 0; i < terms; ++i) {
        const std::size_t k = tr.delay_steps[i];
        std::vector<double> integral(n, 0.0);
        for (std::size_t j = big_k - k; j <= big_k; ++j) {
            axpy(integral, (j == big_k - k || j == big_k) ? 0.5 * h : h, tr.samples[j]);
        }
        axpy(tr.x0_plus, 1.0, sys.a(i) * std::span<const double>(integral));
    }

    Matrix lhs = Matrix::identity(n);
    for (std::size_t i = 0; i < terms; ++i) lhs -= sys.a(i) * (0.5 * h);
    const LuDecomposition lu(lhs);
    if (lu.singular() || lu.pivot_ratio() < 1e-12) {
        throw SimulationError("I - (h/2) sum A_i is numerically singular at h = " + std::to_string(h) +
                              "; try halving h");
    }

    for (std::size_t step = 1; step <= steps; ++step) {
        const std::size_t cur = big_k + step;
        std::vector<double> rhs(n, 0.0);
        for (std::size_t i = 0; i < terms; ++i) {
            const std::size_t k = tr.delay_steps[i];
            std::vector<double> partial(n, 0.0);
            axpy(partial, 0.5 * h, left_value(tr, cur - k));
            for (std::size_t j = cur - k + 1; j < cur; ++j) {
                if (j == big_k) {
                    axpy(partial, 0.5 * h, tr.samples[j]);
                    axpy(partial, 0.5 * h, tr.x0_plus);
                } else {
                    axpy(partial, h, tr.samples[j]);
                }
            }
            axpy(rhs, 1.0, sys.a(i) * std::span<const double>(partial));
        }
        std::vector<double> x = lu.solve(rhs);
        auto res = lhs * std::span<const double>(x);
        axpy(res, -1.0, rhs);
        tr.max_residual = std::max(tr.max_residual, norm2(res) / std::max(1.0, norm2(rhs)));
        tr.samples.push_back(std::move(x));
    }
    if (tr.max_residual > 1e-10) {
        throw SimulationError("implicit step residual " + std::to_string(tr.max_residual) + " exceeds 1e-10");
    }

    if (tr.t_final >= 5.0 * sys.tau_max()) tr.decay_fit = estimate_decay(tr);
    return tr;
}

std::optional<DecayFit> estimate_decay(const Trajectory& tr) {
    const std::size_t width = tr.history_steps;
    const std::size_t steps = tr.steps();
    if (width == 0 || steps < 5 * width) throw SimulationError("trajectory too short for a decay fit (need T >= 5 tau)");

    std::vector<double> ts, logs;
    for (std::size_t start = 1; start + width - 1 <= steps; start += width) {
        double env = 0.0;
        for (std::size_t j = start; j < start + width; ++j) env = std::max(env, norm2(tr.at_step(j)));
        if (env == 0.0) {
            return DecayFit{1.0, std::numeric_limits<double>::infinity()};
        }
        ts.push_back(static_cast<double>(start) * tr.h);
        logs.push_back(std::log(env));
    }
    const double m = static_cast<double>(ts.size());
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        st += ts[k];
        sl += logs[k];
        stt += ts[k] * ts[k];
        stl += ts[k] * logs[k];
    }
    const double slope = (m * stl - st * sl) / (m * stt - st * st);
    const double intercept = (sl - slope * st) / m;
    if (!(slope < 0.0)) return std::nullopt;
    const double scale = tr.history_norm > 0.0 ? tr.history_norm : 1.0;
    return DecayFit{std::exp(intercept) / scale, -slope};
}

namespace {

// Σ over intervals inside [from, to] (absolute indices) of the trapezoid rule
// applied to g(s)·xᵀWx with s = t_j − t_to.
template <typename Weight>
double window_integral(const Trajectory& tr, std::size_t from, std::size_t to, const Matrix& w, Weight g) {
    double acc = 0.0;
    const double t_end = tr.time(to);
    for (std::size_t j = from; j < to; ++j) {
        const double left = g(tr.time(j) - t_end) * quad_form(w, left_value(tr, j));
        const double right = g(tr.time(j + 1) - t_end) * quad_form(w, tr.samples[j + 1]);
        acc += 0.5 * tr.h * (left + right);
    }
    return acc;
}

void require_weights(const IdsSystem& sys, const FunctionalWitness& w, bool needs_p) {
    if (w.weights.size() != sys.terms()) throw SimulationError("functional witness: wrong number of weight matrices");
    for (const auto& m : w.weights) {
        if (m.rows() != sys.n() || m.cols() != sys.n()) throw SimulationError("functional witness: dimension mismatch");
    }
    if (needs_p && (w.p.rows() != sys.n() || w.p.cols() != sys.n())) {
        throw SimulationError("functional witness: P has the wrong dimension");
    }
}

}  // namespace

double eval_functional(const IdsSystem& sys, const Trajectory& tr, Functional which, const FunctionalWitness& w,
                       double t) {
    if (sys.terms() != tr.delay_steps.size()) throw SimulationError("trajectory does not belong to this system");
    const double tau = static_cast<double>(tr.history_steps) * tr.h;
    if (t < -1e-12 || t > tr.t_final - tau + 1e-9 * tr.h) {
        throw SimulationError("functional time out of range [0, T - tau]");
    }
    const std::size_t at = tr.history_steps + static_cast<std::size_t>(std::llround(t / tr.h));
    const std::size_t terms = sys.terms();

    double v = 0.0;
    switch (which) {
        case Functional::amc:
        case Functional::th1: {
            require_weights(sys, w, true);
            v += window_integral(tr, at - tr.history_steps, at, w.p, [](double) { return 1.0; });
            for (std::size_t i = 0; i < terms; ++i) {
                const double ti = tr.snapped_tau[i];
                const double scale = which == Functional::th1 ? 1.0 / ti : 1.0;
                v += window_integral(tr, at - tr.delay_steps[i], at, w.weights[i],
                                     [=](double s) { return (s + ti) * scale; });
            }
            break;
        }
        case Functional::th2: {
            require_weights(sys, w, false);
            Matrix q_sum = w.weights.front();
            for (std::size_t i = 1; i < terms; ++i) q_sum += w.weights[i];
            const Matrix r = spd_inverse(q_sum) * (1.0 / static_cast<double>(terms));
            for (std::size_t i = 0; i < terms; ++i) {
                const double ti = tr.snapped_tau[i];
                const Matrix wi = congruence(sys.a(i), spd_inverse(w.weights[i])) * ti +
                                  Matrix::identity(sys.n()) * w.delta;
                v += w.epsilon * window_integral(tr, at - tr.delay_steps[i], at, r, [](double) { return 1.0; });
                v += window_integral(tr, at - tr.delay_steps[i], at, wi, [=](double s) { return s + ti; });
            }
            break;
        }
    }
    return v;
}

FunctionalWitness th2_functional_witness(const IdsSystem& sys, const std::vector<Matrix>& q) {
    if (q.size() != sys.terms()) throw SimulationError("functional witness: wrong number of weight matrices");
    Matrix q_sum = q.front();
    for (std::size_t i = 1; i < q.size(); ++i) q_sum += q[i];
    const Matrix q_inv = spd_inverse(q_sum);
    Matrix g = q_inv * -1.0;
    double tau_sum = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        g += congruence(sys.a(i), spd_inverse(q[i])) * (sys.tau(i) * sys.tau(i));
        tau_sum += sys.tau(i);
    }
    const double lmax = lambda_max(symmetrize(g));
    if (!(lmax < 0.0)) throw SimulationError("weights do not satisfy the inverse inequality");
    FunctionalWitness w;
    w.weights = q;
    w.delta = -lmax / (2.0 * tau_sum);
    w.epsilon = std::min(1.0, (-lmax / 2.0) / lambda_max(q_inv));
    return w;
}

FunctionalWitness th1_functional_witness(const std::vector<Matrix>& s, const std::vector<Matrix>& q) {
    if (s.empty() || s.size() != q.size()) throw SimulationError("functional witness: mismatched S and Q lists");
    Matrix q_sum = q.front(), s_sum = s.front();
    for (std::size_t i = 1; i < q.size(); ++i) {
        q_sum += q[i];
        s_sum += s[i];
    }
    FunctionalWitness w;
    w.p = symmetrize(spd_inverse(q_sum) - s_sum) * 0.5;
    if (!is_positive_definite(w.p)) throw SimulationError("S and Q do not satisfy sum S < (sum Q)^-1");
    w.weights = s;
    return w;
}

void write_csv(std::ostream& out, const Trajectory& tr) {
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };
    for (std::size_t i = 0; i < tr.delay_steps.size(); ++i) {
        out << "# tau" << i + 1 << " snapped to " << num(tr.snapped_tau[i]) << " (error " << num(tr.snap_error[i])
            << ")\n";
    }
    if (tr.decay_fit) {
        out << "# decay fit: alpha = " << num(tr.decay_fit->alpha) << ", beta = " << num(tr.decay_fit->beta) << "\n";
    } else if (tr.steps() >= 5 * tr.history_steps) {
        out << "# decay fit: none\n";
    }
    out << "t";
    for (std::size_t k = 0; k < tr.x0_plus.size(); ++k) out << ", x" << k + 1;
    out << "\n";
    for (std::size_t j = 0; j < tr.samples.size(); ++j) {
        out << num(tr.time(j));
        for (double v : tr.samples[j]) out << ", " << num(v);
        out << "\n";
    }
}

Functional parse_functional(const std::string& name) {
    if (name == "amc") return Functional::amc;
    if (name == "th1") return Functional::th1;
    if (name == "th2") return Functional::th2;
    throw SimulationError("unknown functional '" + name + "' (expected amc, th1 or th2)");
}

}  // namespace ids::sim
