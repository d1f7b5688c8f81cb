#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "rtv/errors.hpp"
#include "rtv/spectrum.hpp"

using namespace rtv;

namespace {

const PhysicalParams unit = PhysicalParams::make(1.0, 1.0, 1.0);

const ReducedProblem& bump_problem() {
    static const ReducedProblem p(make_bump({1.0, 3.0, 1.0}), unit);
    return p;
}

const ReducedProblem& tanh_problem() {
    static const ReducedProblem p(make_tanh({1.0, 3.0, 1.0}), unit);
    return p;
}

}  // namespace

TEST_CASE("gamma spectrum: ordering, positivity, eigen-residual and M_rho-orthonormality") {
    for (const ReducedProblem* p : {&bump_problem(), &tanh_problem()}) {
        const auto forms = p->forms(0.2);
        const auto s = gamma_spectrum(forms, 10, true);
        REQUIRE(s.gammas.size() == 10);
        for (std::size_t i = 0; i < s.gammas.size(); ++i) {
            CHECK(s.gammas[i] > 0.0);
            if (i > 0) CHECK(s.gammas[i] <= s.gammas[i - 1]);
            const Eigen::VectorXd c = s.eigvecs.col(i);
            const Eigen::VectorXd r = forms.M_rho.multiply(c) - s.gammas[i] * forms.K.multiply(c);
            CHECK(r.norm() <= 1e-10 * forms.K.frobenius() * c.norm());
            // the identity is checked to 1e-10 or to the round-off floor of evaluating c^T K c, whichever is larger
            const double lhs = s.gammas[i] * forms.K.quadratic(c), rhs = forms.M_rho.quadratic(c);
            const Eigen::VectorXd ac = c.cwiseAbs();
            const double floor = std::numeric_limits<double>::epsilon() * s.gammas[i] *
                                 ac.dot(forms.K.dense().cwiseAbs() * ac);
            CAPTURE(lhs - rhs);
            CHECK(std::abs(lhs - rhs) <= std::max(1e-10 * rhs, floor));
            for (std::size_t j = 0; j <= i; ++j) {
                const double m = s.eigvecs.col(j).dot(forms.M_rho.multiply(c));
                CHECK(std::abs(m - (i == j ? 1.0 : 0.0)) <= 1e-10);
            }
        }
    }
}

TEST_CASE("property: Rayleigh quotients never exceed gamma_1") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> nd;
    for (const ReducedProblem* p : {&bump_problem(), &tanh_problem()}) {
        const auto forms = p->forms(0.1);
        const double g1 = gamma_spectrum(forms, 1, false).gammas[0];
        for (int i = 0; i < 100; ++i) {
            Eigen::VectorXd x(forms.K.size());
            for (auto& v : x) v = nd(rng);
            CHECK(forms.M_rho.quadratic(x) / forms.K.quadratic(x) <= g1 * (1.0 + 1e-8));
        }
    }
}

TEST_CASE("gamma_n decays with n on the tanh fixture") {
    const auto s = spectrum_at(tanh_problem(), 0.2, 40);
    CHECK(s.gammas[39] <= 1e-2 * s.gammas[0]);
}

TEST_CASE("rank error when n_max exceeds the rank of M_rho") {
    const auto bump = make_bump({1.0, 3.0, 1.0});
    const HermiteSpace wide(build_mesh(-2.0, 2.0, 8));
    const auto bc = compact_bc_coeffs(compact_outer_basis(bump, unit, 0.3));
    const auto forms = assemble_forms(bump, unit, 0.3, bc, wide);
    try {
        gamma_spectrum(forms, static_cast<int>(wide.dim()), false);
        FAIL("expected a rank error");
    } catch (const NumericalError& e) {
        CHECK(e.tag() == "rank");
    }
}

TEST_CASE("compact kind: strictly decreasing roots below lambda_max with one sign change each") {
    const auto& p = bump_problem();
    const auto roots = solve_dispersion(p, 8);
    REQUIRE(roots.size() == 8);
    const double gk2 = 1.0;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        CHECK(roots[i].n == static_cast<int>(i) + 1);
        CHECK(roots[i].lambda_n < p.lambda_max());
        CHECK(roots[i].lambda_n > 0.0);
        CHECK(roots[i].residual <= p.options().tol * gk2);
        if (i > 0) CHECK(roots[i].lambda_n < roots[i - 1].lambda_n);
    }
    CHECK(roots[0].lambda_n == doctest::Approx(0.309651).epsilon(1e-5));
    CHECK(roots[7].lambda_n / roots[0].lambda_n <= 0.5);

    const auto grid = log_grid(0.5 * roots.back().lambda_n, p.lambda_max(), 64);
    const auto scan = dispersion_scan(p, grid, 8);
    for (int n = 1; n <= 8; ++n) CHECK(count_sign_changes(scan, n) == 1);
}

TEST_CASE("compact kind: gamma_n is non-increasing in lambda") {
    const auto& p = bump_problem();
    const auto grid = log_grid(p.lambda_floor(), p.lambda_max(), 16);
    std::vector<std::vector<double>> g;
    for (double lam : grid) g.push_back(spectrum_at(p, lam, 8).gammas);
    for (std::size_t i = 1; i < grid.size(); ++i)
        for (int n = 0; n < 8; ++n) CHECK(g[i][n] <= g[i - 1][n] * (1.0 + 1e-8));
}

TEST_CASE("bracket errors") {
    const auto& p = bump_problem();
    try {
        solve_compact(p, 1, 0.01, 0.02, 1e-8);
        FAIL("expected a bracket error");
    } catch (const NumericalError& e) {
        CHECK(e.tag() == "bracket");
    }
    CHECK_THROWS_AS(solve_compact(p, 1, 0.01, 2.0, 1e-8), DomainError);
    CHECK_THROWS_AS(solve_compact(tanh_problem(), 1, 0.01, 0.5, 1e-8), DomainError);
}

TEST_CASE("general kind: roots verified by re-assembly and at least N(eps_star) of them") {
    const auto& p = tanh_problem();
    const auto roots = solve_dispersion(p, 4);
    const auto count = mode_count(p, p.eps_star(), log_grid(p.eps_star(), p.lambda_max(), 64), 4);
    CHECK(count.N >= 1);
    CHECK(static_cast<int>(roots.size()) >= count.N);
    for (const auto& r : roots) {
        CHECK(r.lambda_n >= p.eps_star());
        CHECK(r.lambda_n <= p.lambda_max());
        const double f = spectrum_at(p, r.lambda_n, r.n).gammas[r.n - 1] - r.lambda_n;
        CHECK(std::abs(f) <= p.options().tol);
    }
    for (std::size_t i = 1; i < count.b.size(); ++i) CHECK(count.b[i] <= count.b[i - 1]);
}

TEST_CASE("mode count is non-increasing in eps_star") {
    const auto& p = tanh_problem();
    const auto grid = log_grid(p.eps_star(), p.lambda_max(), 64);
    const auto scan = dispersion_scan(p, grid, 6);
    int prev = 1000;
    for (double eps : {p.eps_star(), 0.02, 0.05, 0.1, 0.3}) {
        const int N = mode_count(scan, eps, p.params()).N;
        CHECK(N <= prev);
        prev = N;
    }
    CHECK(mode_count(scan, p.eps_star(), p.params()).N >= 1);
    CHECK(mode_count(scan, 0.5 * p.eps_star(), p.params()).N >= mode_count(scan, p.eps_star(), p.params()).N);
    CHECK_THROWS_AS(mode_count(p, p.eps_star(), log_grid(p.eps_star(), p.lambda_max(), 8), 4), DomainError);
}

TEST_CASE("derivative identity for 1/gamma_n on the bump profile") {
    const auto& p = bump_problem();
    const double lam = 0.5 * p.lambda_max();
    const auto d = gamma_derivative_check(p, 1, lam, 1e-3 * lam);
    CHECK(d.relative_error <= 1e-3);
    CHECK(d.analytic > 0.0);
    CHECK(d.finite_difference > 0.0);

    // central-difference order in the step-dominated regime
    const auto d1 = gamma_derivative_check(p, 1, lam, 0.2 * lam);
    const auto d2 = gamma_derivative_check(p, 1, lam, 0.1 * lam);
    const double ratio = std::abs(d1.finite_difference - d1.analytic) / std::abs(d2.finite_difference - d2.analytic);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));

    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd c(p.space().dim());
        for (auto& v : c) v = nd(rng);
        CHECK(derivative_rhs(p, c, lam) > 0.0);
    }
    try {
        gamma_derivative_check(p, 1, lam, 1e-14 * lam);
        FAIL("expected a step-size error");
    } catch (const DomainError& e) {
        CHECK(e.tag() == "step_size");
    }
}

TEST_CASE("mesh refinement: Cauchy differences shrink by at least 8 per doubling") {
    SolverOptions o;
    o.n_elements = 8;
    const ReducedProblem p8(make_bump({1.0, 3.0, 1.0}), unit, o);
    const double floor = 4.0 * o.tol * p8.lambda_max();
    std::vector<double> l1;
    for (int n : {8, 16, 32, 64}) l1.push_back(solve_dispersion(p8.refined(n), 1).front().lambda_n);
    for (std::size_t i = 2; i < l1.size(); ++i) {
        const double a = std::abs(l1[i - 2] - l1[i - 1]), b = std::abs(l1[i - 1] - l1[i]);
        if (b > floor) CHECK(a / b >= 8.0);
    }
}
