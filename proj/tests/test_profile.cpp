#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include "rtv/errors.hpp"
#include "rtv/profile.hpp"

using namespace rtv;

namespace {

// golden-section maximisation of f on [a, b]
template <class F>
double golden_max(F f, double a, double b) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    for (int i = 0; i < 200; ++i) {
        if (f(c) > f(d)) b = d; else a = c;
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    return f(0.5 * (a + b));
}

}  // namespace

TEST_CASE("tanh profile: midpoint, limits and sup of rho'/rho") {
    const auto p = make_tanh({1.0, 3.0, 1.0});
    CHECK(p.rho(0.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(p.rho(40.0) == doctest::Approx(3.0));
    CHECK(p.rho(-40.0) == doctest::Approx(1.0));

    // fine grid followed by golden-section refinement of sech^2(x) / (2 + tanh x)
    auto ratio = [](double x) { const double c = 1.0 / std::cosh(x); return c * c / (2.0 + std::tanh(x)); };
    double best = -10.0;
    for (int i = 0; i <= 20000; ++i) {
        const double x = -10.0 + 20.0 * i / 20000;
        if (ratio(x) > ratio(best)) best = x;
    }
    const double sup = golden_max(ratio, best - 1e-3, best + 1e-3);
    CHECK(sup == doctest::Approx(4.0 - 2.0 * std::sqrt(3.0)).epsilon(1e-12));

    const auto b = profile_bounds(p, PhysicalParams::make(1.0, 1.0, 1.0));
    CHECK(1.0 / b.L0 == doctest::Approx(sup).epsilon(1e-10));
    CHECK(b.lambda_max * b.lambda_max * b.L0 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(b.rho_m == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("bump profile: derivative at the support ends and the centre") {
    const BumpParams bp{1.0, 3.0, 1.0};
    const auto p = make_bump(bp);
    CHECK(p.drho(1.0) == 0.0);
    CHECK(p.drho(-1.0) == 0.0);
    CHECK(p.drho(1.5) == 0.0);
    CHECK(p.rho(-1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.rho(1.0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(p.compact());

    auto bump = [](double x) { return std::exp(-1.0 / (1.0 - x * x)); };
    const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(bump, -1.0, 1.0, 15, 1e-14);
    const double C = 2.0 / mass;
    CHECK(p.drho(0.0) == doctest::Approx(C * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("bump profile: sup of rho'/rho lies inside the support") {
    const auto p = make_bump({1.0, 3.0, 1.0});
    const auto b = profile_bounds(p, PhysicalParams::make(1.0, 1.0, 1.0));
    CHECK(std::abs(b.argmax_ratio) < 1.0);
    CHECK(b.lambda_max == doctest::Approx(0.999314).epsilon(1e-5));
}

TEST_CASE("tabulated profile: non-monotone samples are rejected with the index") {
    TabulatedParams t{{-1.0, 0.0, 1.0}, {1.0, 2.0, 1.5}, ProfileKind::CompactGradient};
    try {
        make_tabulated(t);
        FAIL("expected rejection");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("index 2") != std::string::npos);
    }
}

TEST_CASE("rho_minus >= rho_plus is rejected") {
    CHECK_THROWS_AS(make_tanh({3.0, 1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(make_bump({2.0, 2.0, 1.0}), DomainError);
}

TEST_CASE("physical parameter validation names the field") {
    PhysicalParams p;
    p.mu = -1.0;
    try {
        p.validate();
        FAIL("expected rejection");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("physical.mu") != std::string::npos);
    }
    p = PhysicalParams::make(1.0, 1.0, 1.0);
    p.k1 = 0.6;
    p.k2 = 0.8;
    CHECK_NOTHROW(p.validate());
    p.k2 = 0.7;
    CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("validate: tanh passes, mislabelled bump fails") {
    const auto t = validate(make_tanh({1.0, 3.0, 1.0}), 2001);
    CHECK(t.pass);
    CHECK(t.min_drho > 0.0);
    const auto b = validate(make_bump({1.0, 3.0, 1.0}).relabeled(ProfileKind::StrictlyIncreasing), 2001);
    CHECK_FALSE(b.pass);
    CHECK(validate(make_bump({1.0, 3.0, 1.0}), 2001).pass);
}

TEST_CASE("property: range, sign and finite-difference consistency of rho'") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-6.0, 6.0);
    const TabulatedParams tab{{-2.0, -1.0, 0.0, 0.5, 1.0, 2.0}, {1.0, 1.2, 1.9, 2.5, 2.9, 3.0},
                              ProfileKind::CompactGradient};
    for (const auto& p : {make_tanh({1.0, 3.0, 1.0}), make_tanh({0.5, 4.0, 0.3}), make_bump({1.0, 3.0, 1.0}),
                          make_bump({2.0, 2.5, 3.0}), make_tabulated(tab)}) {
        for (int i = 0; i < 400; ++i) {
            const double x = ux(rng);
            const double r = p.rho(x);
            CHECK(r >= p.rho_minus() * (1.0 - 1e-14));
            CHECK(r <= p.rho_plus() * (1.0 + 1e-14));
            CHECK(p.drho(x) >= 0.0);
            const double h = 1e-4 * std::max(1.0, std::abs(x));
            const double fd = (p.rho(x + h) - p.rho(x - h)) / (2.0 * h);
            // relative to sup rho' so that values near the support ends stay meaningful
            const double scale = profile_bounds(p, PhysicalParams::make(1.0, 1.0, 1.0)).rho_m;
            if (p.family() != "tabulated") CHECK(std::abs(fd - p.drho(x)) <= 1e-6 * scale);
        }
    }
}

TEST_CASE("profile_bounds: lambda_max scales with sqrt(g)") {
    const auto p = make_tanh({1.0, 3.0, 1.0});
    const double l1 = profile_bounds(p, PhysicalParams::make(1.0, 1.0, 1.0)).lambda_max;
    const double l2 = profile_bounds(p, PhysicalParams::make(2.0, 1.0, 1.0)).lambda_max;
    CHECK(l2 / l1 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("profile_bounds: translation invariance of tabulated profiles") {
    TabulatedParams t{{-2.0, -1.0, 0.0, 0.5, 1.0, 2.0}, {1.0, 1.2, 1.9, 2.5, 2.9, 3.0}, ProfileKind::CompactGradient};
    const auto params = PhysicalParams::make(1.0, 1.0, 1.0);
    const double L0 = profile_bounds(make_tabulated(t), params).L0;
    for (double dx : {-3.7, 0.25, 11.0}) {
        auto s = t;
        for (auto& x : s.x) x += dx;
        CHECK(profile_bounds(make_tabulated(s), params).L0 == doctest::Approx(L0).epsilon(1e-10));
    }
}
