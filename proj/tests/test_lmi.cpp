#include <doctest.h>

#include <cmath>
#include <random>

#include "ids/criteria_lmi.hpp"
#include "ids/lmi.hpp"
#include "test_support.hpp"

using namespace ids;
using namespace ids::lmi;

namespace {

// Single 1×1 block q·c with q ≻ 0.
LmiProblem scalar_problem(double c) {
    LmiProblem p;
    p.add_variable({"q", VarKind::symmetric, 1, true});
    const auto b = p.add_block("scalar", 1);
    p.add_term(b, "q", Matrix{{c}}, Matrix{{1.0}});
    return p;
}

Witness random_witness(const LmiProblem& p, std::mt19937_64& rng) {
    Witness w;
    for (const auto& v : p.variables()) {
        w[v.name] = v.kind == VarKind::symmetric ? test_support::random_symmetric(rng, v.dim)
                                                 : test_support::random_matrix(rng, v.dim, v.dim);
    }
    return w;
}

}  // namespace

TEST_CASE("evaluate on a scalar problem") {
    // q·(τ²a² − 1) with a = 1, τ = 0.5, q = 1.
    const auto p = scalar_problem(0.25 - 1.0);
    const auto e = evaluate(p, {{"q", Matrix{{1.0}}}});
    REQUIRE(e.blocks.size() == 2);  // the explicit block and −q
    CHECK(e.blocks[0](0, 0) == doctest::Approx(-0.75));
    CHECK(e.worst_lambda_max == doctest::Approx(-0.75));
    CHECK(evaluate(p, {{"q", Matrix{{0.0}}}}).worst_lambda_max == 0.0);
}

TEST_CASE("evaluate rejects missing or mis-shaped variables") {
    const auto p = scalar_problem(-1.0);
    CHECK_THROWS_AS(evaluate(p, {}), LmiError);
    CHECK_THROWS_AS(evaluate(p, {{"q", Matrix(2, 2)}}), LmiError);
}

TEST_CASE("problem construction checks shapes") {
    LmiProblem p;
    p.add_variable({"X", VarKind::general, 2, false});
    const auto b = p.add_block("b", 3);
    CHECK_THROWS_AS(p.add_term(b, "X", Matrix(2, 2), Matrix(2, 3)), LmiError);
    CHECK_THROWS_AS(p.add_term(b, "Y", Matrix(3, 2), Matrix(2, 3)), LmiError);
    CHECK_NOTHROW(p.add_term(b, "X", Matrix(3, 2), Matrix(2, 3)));
    CHECK(p.variable("X").scalar_count() == 4);
    CHECK(MatrixVariable{"S", VarKind::symmetric, 3, true}.scalar_count() == 6);
    CHECK_THROWS_AS(p.add_variable({"X", VarKind::symmetric, 2, true}), LmiError);
}

TEST_CASE("evaluation is homogeneous") {
    std::mt19937_64 rng(31);
    const auto sys = reference_system(0.3, 0.05);
    for (const auto& p : {criteria::build_amc(sys), criteria::build_slack_lmi(sys), criteria::build_stacked_lmi(sys)}) {
        for (int trial = 0; trial < 10; ++trial) {
            const auto w = random_witness(p, rng);
            const double c = 0.1 + 5.0 * std::uniform_real_distribution<double>(0, 1)(rng);
            const auto e1 = evaluate(p, w);
            const auto e2 = evaluate(p, scale(w, c));
            for (std::size_t k = 0; k < e1.blocks.size(); ++k) {
                CHECK(test_support::max_abs_diff(e2.blocks[k], e1.blocks[k] * c) < 1e-12 * (1 + e1.blocks[k].max_abs() * c));
            }
        }
    }
}

TEST_CASE("worst lambda-max is convex in the variables") {
    std::mt19937_64 rng(32);
    const auto p = criteria::build_slack_lmi(reference_system(0.3, 0.1));
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
        const auto w1 = random_witness(p, rng), w2 = random_witness(p, rng);
        const double theta = u(rng);
        Witness mix;
        for (const auto& [name, m] : w1) mix[name] = m * theta + w2.at(name) * (1 - theta);
        const double lhs = evaluate(p, mix).worst_lambda_max;
        const double rhs = theta * evaluate(p, w1).worst_lambda_max + (1 - theta) * evaluate(p, w2).worst_lambda_max;
        CHECK(lhs <= rhs + 1e-10);
    }
}

TEST_CASE("solver decides scalar problems") {
    // τ²a² − 1 with a = 1: feasible for τ = 0.9, not for τ = 1.1.
    const auto ok = solve_feasibility(scalar_problem(0.81 - 1.0));
    CHECK(ok.feasible());
    CHECK(ok.lambda_star < 0.0);
    const auto bad = solve_feasibility(scalar_problem(1.21 - 1.0));
    CHECK_FALSE(bad.feasible());
    CHECK(bad.lambda_star > 0.0);
}

TEST_CASE("solver on the two-delay reference system") {
    const auto near = solve_feasibility(criteria::build_amc(reference_system(0.3, 0.0474)));
    CHECK(near.feasible());
    CHECK(check_witness(criteria::build_amc(reference_system(0.3, 0.0474)), near.witness, 1e-7 / 2));
    CHECK_FALSE(solve_feasibility(criteria::build_amc(reference_system(0.3, 0.06))).feasible());
}

TEST_CASE("solver report is consistent and deterministic") {
    const auto p = criteria::build_stacked_lmi(reference_system(0.3, 0.1));
    SolverConfig cfg;
    cfg.seed = 99;
    const auto r1 = solve_feasibility(p, cfg);
    const auto r2 = solve_feasibility(p, cfg);
    CHECK(r1.status == r2.status);
    CHECK(r1.lambda_star == r2.lambda_star);
    CHECK(r1.iterations == r2.iterations);
    CHECK(r1.witness == r2.witness);
    CHECK(std::abs(evaluate(p, r1.witness).worst_lambda_max - r1.lambda_star) < 1e-10);
    CHECK(pd_trace(p, r1.witness) == doctest::Approx(1.0));

    const auto infeasible = criteria::build_stacked_lmi(reference_system(0.3, 0.2));
    const auto r3 = solve_feasibility(infeasible, cfg);
    CHECK_FALSE(r3.feasible());
    CHECK(std::abs(evaluate(infeasible, r3.witness).worst_lambda_max - r3.lambda_star) < 1e-10);
}

TEST_CASE("check_witness semantics") {
    const auto p = criteria::build_single(reference_system(0.3, 0.04));
    const auto r = solve_feasibility(p);
    REQUIRE(r.feasible());
    CHECK(check_witness(p, r.witness, 1e-7 / 2));
    CHECK(check_witness(p, scale(r.witness, 7.0), 1e-7 / 2));
    CHECK_FALSE(check_witness(p, {{"Q", Matrix(2, 2)}}, 1e-7));
}

TEST_CASE("solver rejects unsupported problems") {
    LmiProblem no_pd;
    no_pd.add_variable({"X", VarKind::symmetric, 1, false});
    no_pd.add_term(no_pd.add_block("b", 1), "X", Matrix{{1.0}}, Matrix{{1.0}});
    CHECK_THROWS_AS(solve_feasibility(no_pd), LmiError);

    auto shifted = scalar_problem(-1.0);
    CHECK(shifted.homogeneous());
    shifted.set_constant(0, Matrix{{1.0}});
    CHECK_FALSE(shifted.homogeneous());
    CHECK_THROWS_AS(solve_feasibility(shifted), LmiError);
}

TEST_CASE("inverse-bound linearization") {
    const Matrix i2 = Matrix::identity(2);
    const auto r = linearize_inverse_bound(i2 * 0.5, i2);
    REQUIRE(r);
    CHECK(*r == i2);
    CHECK(test_support::max_abs_diff(linearization_residual(i2 * 0.5, i2, *r), i2 * -0.5) < 1e-15);
    CHECK_FALSE(linearize_inverse_bound(i2, i2));
    CHECK_THROWS_AS(linearize_inverse_bound(Matrix{{1, 0}, {0, -1}}, i2), LmiError);
}

TEST_CASE("linearization holds in both directions on random samples") {
    std::mt19937_64 rng(33);
    int accepted = 0, converse = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 1 + trial % 3;
        const Matrix q = test_support::random_spd(rng, n, 0.05);
        const Matrix s = test_support::random_spd(rng, n, 0.05);
        const bool bound = lambda_max(symmetrize(q - spd_inverse(s))) < 0.0;
        const auto r = linearize_inverse_bound(q, s);
        CHECK(r.has_value() == bound);
        if (r) {
            ++accepted;
            CHECK(lambda_max(linearization_residual(q, s, *r)) < 0.0);
        }
        const Matrix rr = test_support::random_matrix(rng, n, n, -2.0, 2.0);
        if (lambda_max(linearization_residual(q, s, rr)) < 0.0) {
            ++converse;
            CHECK(bound);
        }
    }
    CHECK(accepted > 50);
    CHECK(converse > 20);
}
