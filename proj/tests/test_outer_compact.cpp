#include <cmath>
#include <random>

#include <doctest.h>

#include "rtv/errors.hpp"
#include "rtv/outer_compact.hpp"

using namespace rtv;

namespace {

CompactOuterBasis basis_k_tau(double k, double tau_minus, double tau_plus) {
    CompactOuterBasis b;
    b.k = k;
    b.tau_minus = tau_minus;
    b.tau_plus = tau_plus;
    b.lambda = 1.0;
    b.x_minus = -1.0;
    b.x_plus = 1.0;
    return b;
}

}  // namespace

TEST_CASE("decay rates tau") {
    const auto params = PhysicalParams::make(1.0, 1.0, 1.0);
    const auto b = compact_outer_basis(make_bump({0.5, 1.0, 1.0}), params, 3.0);
    CHECK(b.tau_plus == doctest::Approx(2.0).epsilon(1e-15));
    const auto b2 = compact_outer_basis(make_bump({5.0, 6.0, 1.0}), PhysicalParams::make(1.0, 1.0, 2.0), 1.0);
    CHECK(b2.tau_minus == doctest::Approx(3.0).epsilon(1e-15));
    const auto b3 = compact_outer_basis(make_bump({1.0, 3.0, 1.0}), params, 1e-12);
    CHECK(b3.tau_minus == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(b3.tau_plus == doctest::Approx(1.0).epsilon(1e-11));
    CHECK_THROWS_AS(compact_outer_basis(make_bump({1.0, 3.0, 1.0}), params, 0.0), DomainError);
    CHECK_THROWS_AS(compact_outer_basis(make_tanh({1.0, 3.0, 1.0}), params, 0.1), DomainError);
}

TEST_CASE("property: tau^2 - k^2 = lambda nu and tau > k") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.01, 5.0);
    for (int i = 0; i < 200; ++i) {
        const double rm = u(rng), k = u(rng), lam = u(rng), mu = u(rng);
        const auto b = compact_outer_basis(make_bump({rm, rm + u(rng), 1.0}), PhysicalParams::make(1.0, mu, k), lam);
        CHECK(b.tau_minus > k);
        CHECK(b.tau_plus > b.tau_minus);
        CHECK(b.tau_plus * b.tau_plus - k * k == doctest::Approx(lam * b.nu_plus).epsilon(1e-12));
        CHECK(b.tau_minus * b.tau_minus - k * k == doctest::Approx(lam * b.nu_minus).epsilon(1e-12));
    }
}

TEST_CASE("boundary coefficients for k = 1, tau = 2") {
    const auto bc = compact_bc_coeffs(basis_k_tau(1.0, 2.0, 2.0));
    CHECK(bc.right.n11 == 2.0);
    CHECK(bc.right.n12 == 3.0);
    CHECK(bc.right.n21 == -6.0);
    CHECK(bc.right.n22 == -7.0);
    CHECK(bc.left.n11 == 2.0);
    CHECK(bc.left.n12 == -3.0);
    CHECK(bc.left.n21 == 6.0);
    CHECK(bc.left.n22 == -7.0);
}

TEST_CASE("property: boundary relations annihilate both decaying exponentials") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0), pos(0.1, 4.0);
    for (int i = 0; i < 200; ++i) {
        const double k = pos(rng);
        const auto b = basis_k_tau(k, k + pos(rng), k + pos(rng));
        const auto bc = compact_bc_coeffs(b);
        const double A1 = u(rng), A2 = u(rng);
        for (auto [side, c] : {std::pair{End::Right, bc.right}, std::pair{End::Left, bc.left}}) {
            const auto s = eval_outer(A1, A2, b, side, b.x_end(side));
            const double scale = std::abs(s[3]) + std::abs(c.n21 * s[0]) + std::abs(c.n22 * s[1]) + 1e-300;
            CHECK(std::abs(c.n11 * s[0] + c.n12 * s[1] + s[2]) <= 1e-12 * scale);
            CHECK(std::abs(c.n21 * s[0] + c.n22 * s[1] + s[3]) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("extension coefficients match value and slope exactly") {
    const auto b = basis_k_tau(1.0, 2.0, 2.0);
    // pure k-tail
    auto [a1, a2] = extension_coeffs(1.0, -1.0, b, End::Right);
    CHECK(a1 == doctest::Approx(1.0));
    CHECK(a2 == doctest::Approx(0.0));
    // pure tau-tail
    std::tie(a1, a2) = extension_coeffs(1.0, -2.0, b, End::Right);
    CHECK(a1 == doctest::Approx(0.0));
    CHECK(a2 == doctest::Approx(1.0));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const double phi = u(rng), dphi = u(rng);
        for (End side : {End::Left, End::Right}) {
            const auto [A1, A2] = extension_coeffs(phi, dphi, b, side);
            const auto s = eval_outer(A1, A2, b, side, b.x_end(side));
            CHECK(std::abs(s[0] - phi) <= 1e-12 * (std::abs(phi) + std::abs(dphi)));
            CHECK(std::abs(s[1] - dphi) <= 1e-12 * (std::abs(phi) + std::abs(dphi)));
        }
    }
}

TEST_CASE("degenerate outer basis is rejected") {
    const auto b = basis_k_tau(1.0, 1.0 + 1e-10, 1.0 + 1e-10);
    CHECK_THROWS_AS(extension_coeffs(1.0, 0.0, b, End::Right), NumericalError);
}

TEST_CASE("outer evaluation at the support ends") {
    const auto b = basis_k_tau(1.5, 2.0, 2.5);
    const auto r = eval_outer(1.0, 0.0, b, End::Right, b.x_plus);
    CHECK(r[0] == 1.0);
    CHECK(r[1] == doctest::Approx(-1.5));
    CHECK(r[2] == doctest::Approx(2.25));
    CHECK(r[3] == doctest::Approx(-3.375));
    const auto l = eval_outer(0.0, 1.0, basis_k_tau(1.0, 2.0, 2.0), End::Left, -1.0);
    CHECK(l[0] == 1.0);
    CHECK(l[1] == 2.0);
    CHECK(l[2] == 4.0);
    CHECK(l[3] == 8.0);
    CHECK_THROWS_AS(eval_outer(1.0, 1.0, b, End::Right, 0.0), DomainError);
    CHECK_THROWS_AS(eval_outer(1.0, 1.0, b, End::Left, 0.0), DomainError);
}

TEST_CASE("property: outer solutions solve the constant-coefficient equation") {
    // -lambda nu (k^2 phi - phi'') - (phi'''' - 2k^2 phi'' + k^4 phi) = 0, phi'''' from the exponentials
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.05, 2.0);
    const auto prof = make_bump({1.0, 3.0, 1.0});
    for (int i = 0; i < 100; ++i) {
        const double k = pos(rng), lam = pos(rng), mu = pos(rng);
        const auto b = compact_outer_basis(prof, PhysicalParams::make(1.0, mu, k), lam);
        const double A1 = u(rng), A2 = u(rng);
        for (End side : {End::Left, End::Right}) {
            const double nu = side == End::Left ? b.nu_minus : b.nu_plus;
            const double tau = b.tau(side);
            for (double d : {0.0, 0.3, 1.7, 4.0}) {
                const double x = side == End::Right ? b.x_plus + d : b.x_minus - d;
                const auto s = eval_outer(A1, A2, b, side, x);
                const double dist = std::abs(x - b.x_end(side));
                const double e1 = A1 * std::exp(-k * dist), e2 = A2 * std::exp(-tau * dist);
                const double d4 = std::pow(k, 4) * e1 + std::pow(tau, 4) * e2;
                const double res = -lam * nu * (k * k * s[0] - s[2]) - (d4 - 2 * k * k * s[2] + std::pow(k, 4) * s[0]);
                const double scale = std::abs(d4) + 2 * k * k * std::abs(s[2]) + std::pow(k, 4) * std::abs(s[0]) +
                                     lam * nu * (k * k * std::abs(s[0]) + std::abs(s[2]));
                CHECK(std::abs(res) <= 1e-10 * scale);
                CHECK(std::abs(s[0]) <= std::abs(A1) + std::abs(A2) + 1e-15);
            }
        }
    }
}
