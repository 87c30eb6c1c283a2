#include "ids/jensen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ids::jensen {

namespace {

void require_dim(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw JensenError(std::string("dimension mismatch in ") + what + ": got " + std::to_string(got) +
                          ", expected " + std::to_string(want));
    }
}

void require_weight(const Matrix& q, std::size_t n, const char* what) {
    if (!q.square()) throw JensenError(std::string("weight matrix in ") + what + " is not square");
    require_dim(q.rows(), n, what);
}

std::vector<double> add(std::vector<double> a, const std::vector<double>& b) {
    for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
    return a;
}

Matrix sum(const std::vector<Matrix>& q) {
    Matrix s = q.front();
    for (std::size_t i = 1; i < q.size(); ++i) s += q[i];
    return s;
}

Matrix checked_inverse(const Matrix& q) {
    try {
        return spd_inverse(q);
    } catch (const LinalgError& e) {
        throw JensenError(std::string("weight matrix is not positive definite: ") + e.what());
    }
}

std::size_t common_dim(const std::vector<std::vector<double>>& xi) {
    if (xi.empty()) throw JensenError("at least one vector is required");
    for (const auto& v : xi) require_dim(v.size(), xi.front().size(), "vector list");
    return xi.front().size();
}

}  // namespace

SampledFunction::SampledFunction(double tau, std::vector<std::vector<double>> values)
    : tau_(tau), values_(std::move(values)) {
    if (!(tau_ > 0.0) || !std::isfinite(tau_)) throw JensenError("sampled function needs a positive horizon");
    if (values_.size() < 3) throw JensenError("sampled function needs at least 2 intervals");
    const std::size_t n = values_.front().size();
    if (n == 0) throw JensenError("sampled function has empty vectors");
    for (const auto& v : values_) require_dim(v.size(), n, "sampled function");
}

std::vector<double> SampledFunction::integral() const {
    const double h = step();
    std::vector<double> acc(dim(), 0.0);
    const std::size_t m = intervals();
    for (std::size_t k = 0; k <= m; ++k) {
        const double w = (k == 0 || k == m) ? 0.5 * h : h;
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += w * values_[k][j];
    }
    return acc;
}

double SampledFunction::quadratic_integral(const Matrix& w) const {
    require_weight(w, dim(), "quadratic integral");
    const double h = step();
    const std::size_t m = intervals();
    double acc = 0.0;
    for (std::size_t k = 0; k <= m; ++k) acc += ((k == 0 || k == m) ? 0.5 * h : h) * quad_form(w, values_[k]);
    return acc;
}

double SampledFunction::max_norm() const {
    double r = 0.0;
    for (const auto& v : values_) r = std::max(r, norm2(v));
    return r;
}

double gap_continuous(const SampledFunction& omega, const Matrix& q) {
    require_weight(q, omega.dim(), "gap_continuous");
    const auto x = omega.integral();
    return omega.tau() * omega.quadratic_integral(q) - quad_form(q, x);
}

double gap_discrete(const std::vector<std::vector<double>>& xi, const Matrix& q) {
    const std::size_t n = common_dim(xi);
    require_weight(q, n, "gap_discrete");
    std::vector<double> total(n, 0.0);
    double rhs = 0.0;
    for (const auto& v : xi) {
        total = add(std::move(total), v);
        rhs += quad_form(q, v);
    }
    return static_cast<double>(xi.size()) * rhs - quad_form(q, total);
}

double gap_discrete_multi(const std::vector<std::vector<double>>& xi, const std::vector<Matrix>& q) {
    const std::size_t n = common_dim(xi);
    require_dim(q.size(), xi.size(), "gap_discrete_multi weight count");
    for (const auto& qi : q) require_weight(qi, n, "gap_discrete_multi");
    std::vector<double> total(n, 0.0);
    double rhs = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        total = add(std::move(total), xi[i]);
        rhs += quad_form(checked_inverse(q[i]), xi[i]);
    }
    return rhs - quad_form(checked_inverse(sum(q)), total);
}

Bound multiple_bound(const std::vector<SampledFunction>& omegas, const std::vector<Matrix>& q) {
    if (omegas.empty()) throw JensenError("at least one function is required");
    require_dim(q.size(), omegas.size(), "gap_multiple weight count");
    const std::size_t n = omegas.front().dim();
    std::vector<double> total(n, 0.0);
    Bound b;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        require_dim(omegas[i].dim(), n, "gap_multiple");
        require_weight(q[i], n, "gap_multiple");
        total = add(std::move(total), omegas[i].integral());
        b.rhs += omegas[i].tau() * omegas[i].quadratic_integral(checked_inverse(q[i]));
    }
    b.lhs = quad_form(checked_inverse(sum(q)), total);
    return b;
}

double gap_multiple(const std::vector<SampledFunction>& omegas, const std::vector<Matrix>& q) {
    return multiple_bound(omegas, q).gap();
}

Bound summed_bound(const std::vector<HorizonTerm>& omegas, const Matrix& q) {
    if (omegas.empty()) throw JensenError("at least one term is required");
    if (!q.square()) throw JensenError("weight matrix in gap_summed is not square");
    const std::size_t n = q.rows();
    std::vector<double> total(n, 0.0);
    double rhs = 0.0;
    for (const auto& w : omegas) {
        if (!w) continue;
        require_dim(w->dim(), n, "gap_summed");
        total = add(std::move(total), w->integral());
        rhs += w->tau() * w->quadratic_integral(q);
    }
    return {quad_form(q, total), static_cast<double>(omegas.size()) * rhs};
}

Bound summed_bound(const std::vector<SampledFunction>& omegas, const Matrix& q) {
    return summed_bound(std::vector<HorizonTerm>(omegas.begin(), omegas.end()), q);
}

double gap_summed(const std::vector<HorizonTerm>& omegas, const Matrix& q) {
    return summed_bound(omegas, q).gap();
}

double gap_summed(const std::vector<SampledFunction>& omegas, const Matrix& q) {
    return summed_bound(omegas, q).gap();
}

Comparison compare_bounds(const std::vector<SampledFunction>& omegas, const Matrix& q) {
    const Matrix qinv = checked_inverse(q);
    return {summed_bound(omegas, q), multiple_bound(omegas, std::vector<Matrix>(omegas.size(), qinv))};
}

double quadrature_tolerance(const std::vector<SampledFunction>& omegas, double weight_lambda_max) {
    double h = 0.0, w = 0.0;
    for (const auto& o : omegas) {
        h = std::max(h, o.step());
        w = std::max(w, o.max_norm());
    }
    return 10.0 * h * h * w * w * weight_lambda_max;
}

}  // namespace ids::jensen
