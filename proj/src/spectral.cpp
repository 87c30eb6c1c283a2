#include "ids/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace ids::spectral {

SpectralVerdict make_verdict(double rho, double threshold) {
    SpectralVerdict v;
    v.rho = rho;
    v.threshold = threshold;
    v.boundary = std::abs(rho - threshold) < 1e-12;
    v.pass = !v.boundary && rho < threshold;
    return v;
}

namespace {

Matrix weighted_kron_sum(const std::vector<Matrix>& a, const std::vector<double>& w) {
    const std::size_t n = a.front().rows();
    Matrix acc(n * n, n * n);
    for (std::size_t i = 0; i < a.size(); ++i) acc += kron(a[i], a[i]) * w[i];
    return acc;
}

double weighted_rho(const IdsSystem& sys, const std::vector<double>& alpha) {
    std::vector<double> w(sys.terms());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = sys.tau(i) * sys.tau(i) / alpha[i];
    return spectral_radius(weighted_kron_sum(sys.a(), w));
}

std::vector<double> softmax(const std::vector<double>& z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    std::vector<double> e(z.size());
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) s += (e[i] = std::exp(z[i] - zmax));
    for (double& v : e) v /= s;
    return e;
}

template <typename F>
std::vector<double> nelder_mead(F&& f, std::vector<double> x0, double step, int max_iter) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
    for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

    std::vector<std::size_t> idx(n + 1);
    for (int it = 0; it < max_iter; ++it) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = idx.front(), worst = idx.back(), second = idx[n - 1];
        if (std::abs(vals[worst] - vals[best]) < 1e-14) break;

        std::vector<double> c(n, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i : idx)
                if (i != worst) c[k] += pts[i][k] / static_cast<double>(n);
        auto along = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t k = 0; k < n; ++k) p[k] = c[k] + t * (pts[worst][k] - c[k]);
            return p;
        };
        auto xr = along(-1.0);
        const double fr = f(xr);
        if (fr < vals[best]) {
            auto xe = along(-2.0);
            const double fe = f(xe);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
        } else if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
        } else {
            auto xc = along(fr < vals[worst] ? -0.5 : 0.5);
            const double fc = f(xc);
            if (fc < std::min(fr, vals[worst])) {
                pts[worst] = xc;
                vals[worst] = fc;
            } else {
                for (std::size_t i : idx) {
                    if (i == best) continue;
                    for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    const auto it = std::min_element(vals.begin(), vals.end());
    return pts[static_cast<std::size_t>(it - vals.begin())];
}

}  // namespace

Matrix kronecker_sum(const IdsSystem& sys) {
    std::vector<double> w(sys.terms());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = sys.tau(i) * sys.tau(i);
    return weighted_kron_sum(sys.a(), w);
}

SpectralVerdict check_spectral(const IdsSystem& sys) {
    return make_verdict(spectral_radius(kronecker_sum(sys)), 1.0 / static_cast<double>(sys.terms()));
}

SpectralVerdict check_spectral_weighted(const IdsSystem& sys, const std::vector<double>& alpha) {
    if (alpha.size() != sys.terms()) {
        throw SpectralError("weights: expected one weight per delay term");
    }
    double sum = 0.0;
    for (double a : alpha) {
        if (sys.terms() > 1 && !(a > 0.0 && a < 1.0)) throw SpectralError("weights must lie in (0, 1)");
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw SpectralError("weights must sum to 1");
    return make_verdict(weighted_rho(sys, alpha), 1.0);
}

WeightOptimum optimize_weights(const IdsSystem& sys, std::uint64_t seed) {
    const std::size_t terms = sys.terms();
    if (terms == 1) return {{1.0}, weighted_rho(sys, {1.0})};

    const std::vector<double> uniform(terms, 1.0 / static_cast<double>(terms));
    WeightOptimum best{uniform, weighted_rho(sys, uniform)};
    auto consider = [&](const std::vector<double>& alpha) {
        const double r = weighted_rho(sys, alpha);
        if (r < best.rho) best = {alpha, r};
    };

    if (terms == 2) {
        const double delta = 1e-3;
        auto f = [&](double a1) { return weighted_rho(sys, {a1, 1.0 - a1}); };
        const int grid = 200;
        const double step = (1.0 - 2.0 * delta) / grid;
        int arg = 0;
        double fbest = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= grid; ++k) {
            const double v = f(delta + step * k);
            if (v < fbest) {
                fbest = v;
                arg = k;
            }
        }
        double lo = std::max(delta, delta + step * (arg - 1));
        double hi = std::min(1.0 - delta, delta + step * (arg + 1));
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        double f1 = f(x1), f2 = f(x2);
        while (hi - lo > 1e-12) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = f(x2);
            }
        }
        consider({delta + step * arg, 1.0 - (delta + step * arg)});
        const double a1 = 0.5 * (lo + hi);
        consider({a1, 1.0 - a1});
        return best;
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto objective = [&](const std::vector<double>& z) { return weighted_rho(sys, softmax(z)); };
    for (int r = 0; r < 20; ++r) {
        std::vector<double> z0(terms, 0.0);
        if (r > 0)
            for (double& v : z0) v = normal(rng);
        const auto z = nelder_mead(objective, z0, 0.5, 400);
        consider(softmax(z));
    }
    return best;
}

Matrix operator_factor_b(const IdsSystem& sys) {
    const std::size_t n2 = sys.n() * sys.n();
    Matrix b(sys.terms() * n2, n2);
    for (std::size_t i = 0; i < sys.terms(); ++i) {
        const Matrix at = sys.a(i).transpose();
        b.set_block(i * n2, 0, kron(at, at) * (sys.tau(i) * sys.tau(i)));
    }
    return b;
}

Matrix operator_factor_c(const IdsSystem& sys) {
    const std::size_t n2 = sys.n() * sys.n();
    Matrix c(n2, sys.terms() * n2);
    for (std::size_t i = 0; i < sys.terms(); ++i) c.set_block(0, i * n2, Matrix::identity(n2));
    return c;
}

Matrix operator_block(const IdsSystem& sys) {
    const std::size_t n2 = sys.n() * sys.n();
    const std::size_t terms = sys.terms();
    Matrix m(terms * n2, terms * n2);
    for (std::size_t i = 0; i < terms; ++i) {
        const Matrix at = sys.a(i).transpose();
        const Matrix blk = kron(at, at) * (sys.tau(i) * sys.tau(i));
        for (std::size_t j = 0; j < terms; ++j) m.set_block(i * n2, j * n2, blk);
    }
    return m;
}

SingleDelayChecks single_delay_checks(const Matrix& a1, double tau1) {
    if (!a1.square()) throw SpectralError("single-delay checks need a square matrix");
    if (!(tau1 > 0.0)) throw SpectralError("single-delay checks need a positive delay");
    SingleDelayChecks c;
    c.rho = spectral_radius(a1);
    c.norm = spectral_norm(a1);
    c.rho_pass = c.rho < 1.0 / tau1;
    c.norm_pass = c.norm < 1.0 / tau1;
    return c;
}

SpectralVerdict laa_spectral(const DiscreteIds& sys) {
    return make_verdict(spectral_radius(weighted_kron_sum(sys.a(), std::vector<double>(sys.terms(), 1.0))),
                        1.0 / static_cast<double>(sys.terms()));
}

}  // namespace ids::spectral
