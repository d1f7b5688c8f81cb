#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "rtv/errors.hpp"
#include "rtv/modes.hpp"

using namespace rtv;

namespace {

const PhysicalParams unit = PhysicalParams::make(1.0, 1.0, 1.0);

struct Fixture {
    ReducedProblem problem;
    std::vector<DispersionPoint> roots;
    std::vector<GlobalMode> modes;

    Fixture(DensityProfile profile, PhysicalParams params, int n_modes)
        : problem(std::move(profile), params) {
        roots = solve_dispersion(problem, n_modes);
        for (const auto& r : roots) modes.push_back(glue_mode(problem, r));
    }
};

const Fixture& bump() {
    static const Fixture f(make_bump({1.0, 3.0, 1.0}), unit, 3);
    return f;
}

const Fixture& tanh_fx() {
    static const Fixture f(make_tanh({1.0, 3.0, 1.0}), unit, 3);
    return f;
}

const Fixture& split() {
    PhysicalParams p{.g = 1.0, .mu = 1.0, .k = 1.0, .k1 = 0.6, .k2 = 0.8};
    static const Fixture f(make_tanh({1.0, 3.0, 1.0}), p, 1);
    return f;
}

// dense sampling, then golden-section refinement around every local peak
double sup_phi(const GlobalMode& m) {
    const auto xs = mode_sample_grid(m, 16, 256);
    auto f = [&](double x) { return std::abs(eval_mode(m, x)[0]); };
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
        if (f(xs[i]) < f(xs[i - 1]) || f(xs[i]) < f(xs[i + 1])) continue;
        double a = xs[i - 1], b = xs[i + 1];
        const double r = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 80; ++it) {
            const double c = b - r * (b - a), d = a + r * (b - a);
            if (f(c) > f(d)) b = d; else a = c;
        }
        s = std::max({s, f(xs[i]), f(0.5 * (a + b))});
    }
    return s;
}

}  // namespace

TEST_CASE("gluing jumps of phi..phi''' stay below 1e-6 relative") {
    for (const Fixture* f : {&bump(), &tanh_fx()}) {
        REQUIRE(f->modes.size() == 3);
        for (const auto& m : f->modes) {
            const auto g = gluing_jumps(m);
            CAPTURE(m.n);
            CAPTURE(g.worst());
            CHECK(g.worst() <= 1e-6);
        }
    }
}

TEST_CASE("inner phi'' at the right end satisfies the natural boundary relation") {
    for (const Fixture* f : {&bump(), &tanh_fx()}) {
        const auto& m = f->modes.front();
        const auto& bc = m.outer.bc.right;
        const auto& t = m.trace_right;
        const double scale = gluing_jumps(m).scale[2];
        CAPTURE(t[2] + bc.n11 * t[0] + bc.n12 * t[1]);
        CHECK(std::abs(t[2] + bc.n11 * t[0] + bc.n12 * t[1]) <= 1e-6 * scale);
    }
}

TEST_CASE("normalisation: sup |phi| = 1 and phi >= 0 at the steepest gradient") {
    for (const Fixture* f : {&bump(), &tanh_fx()}) {
        for (const auto& m : f->modes) {
            CHECK(sup_phi(m) == doctest::Approx(1.0).epsilon(1e-8));
            CHECK(sup_phi(m) <= 1.0 + 1e-10);
            CHECK(eval_mode(m, m.profile.center())[0] >= 0.0);
        }
    }
}

TEST_CASE("compact outer formula ten lengths beyond the support") {
    const auto& m = bump().modes.front();
    const double x = m.x_plus + 10.0;
    const double tau = m.outer.basis->tau_plus, k = m.params.k;
    const double expect = m.coeff_right[0] * std::exp(-10.0 * k) + m.coeff_right[1] * std::exp(-10.0 * tau);
    CHECK(eval_mode(m, x)[0] == doctest::Approx(expect).epsilon(1e-12));
    const double xl = m.x_minus - 10.0;
    const double tl = m.outer.basis->tau_minus;
    const double expl = m.coeff_left[0] * std::exp(-10.0 * k) + m.coeff_left[1] * std::exp(-10.0 * tl);
    CHECK(eval_mode(m, xl)[0] == doctest::Approx(expl).epsilon(1e-12));
}

TEST_CASE("outer coefficients reproduce the inner (phi, phi') at both ends") {
    for (const Fixture* f : {&bump(), &tanh_fx()}) {
        for (const auto& m : f->modes) {
            for (double x : {m.x_minus, m.x_plus}) {
                const auto in = m.space->eval(m.dofs, x);
                const auto out = eval_outer_mode(m, x);
                CHECK(out[0] == doctest::Approx(in[0]).epsilon(1e-12).scale(1.0));
                CHECK(out[1] == doctest::Approx(in[1]).epsilon(1e-10).scale(1.0));
            }
            const bool nonzero_l = m.coeff_left[0] != 0.0 || m.coeff_left[1] != 0.0;
            const bool nonzero_r = m.coeff_right[0] != 0.0 || m.coeff_right[1] != 0.0;
            CHECK(nonzero_l);
            CHECK(nonzero_r);
        }
    }
}

TEST_CASE("residuals: outer closed forms exact, weak residual small for the first three modes") {
    for (const auto& m : bump().modes) {
        const auto r = ode_residual(m);
        CAPTURE(m.n);
        CHECK(r.outer <= 1e-10);
        CHECK(r.weak <= 1e-4);
    }
    for (const auto& m : tanh_fx().modes) {
        const auto r = ode_residual(m);
        CAPTURE(m.n);
        CAPTURE(r.outer);
        CHECK(r.weak <= 1e-4);
    }
}

TEST_CASE("enriched residual converges with order at least 2 under mesh doubling") {
    const auto coarse = bump().problem.refined(64);
    const auto fine = bump().problem.refined(128);
    const auto mc = glue_mode(coarse, solve_dispersion(coarse, 1).front());
    const auto mf = glue_mode(fine, solve_dispersion(fine, 1).front());
    const double rc = ode_residual(mc).enriched, rf = ode_residual(mf).enriched;
    CAPTURE(rc);
    CAPTURE(rf);
    CHECK(std::log2(rc / rf) >= 2.0);
}

TEST_CASE("field reconstruction: divergence-free with a split wavevector") {
    const auto& m = split().modes.front();
    const auto f = reconstruct_fields(m, mode_sample_grid(m));
    CHECK(divergence_defect(f, m.params) <= 1e-10);
    for (std::size_t i = 0; i < f.x.size(); ++i) {
        CHECK(f.theta[i] == doctest::Approx(f.psi[i] * 0.8 / 0.6).epsilon(1e-12).scale(1e-300));
    }
}

TEST_CASE("field reconstruction: horizontal momentum balance holds") {
    for (const Fixture* fx : {&bump(), &split()}) {
        const auto& m = fx->modes.front();
        const auto f = reconstruct_fields(m, mode_sample_grid(m));
        const double k1 = m.params.k1, kk = m.params.k * m.params.k, lam = m.lambda, mu = m.params.mu;
        double worst = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < f.x.size(); ++i) {
            const double rho = m.profile.rho(f.x[i]);
            const double d2psi = -k1 * f.d3phi[i] / kk;
            const double a = lam * rho * f.psi[i], b = k1 * f.q[i], c = mu * (kk * f.psi[i] - d2psi);
            worst = std::max(worst, std::abs(a - b + c));
            scale = std::max({scale, std::abs(a), std::abs(b), std::abs(c)});
        }
        CHECK(worst <= 1e-8 * scale);
    }
}

TEST_CASE("field reconstruction: zeta opposes phi where the gradient is positive") {
    for (const Fixture* fx : {&bump(), &tanh_fx()}) {
        for (const auto& m : fx->modes) {
            const auto f = reconstruct_fields(m, mode_sample_grid(m));
            for (std::size_t i = 0; i < f.x.size(); ++i) {
                if (m.profile.drho(f.x[i]) > 0.0 && f.phi[i] != 0.0) CHECK(f.zeta[i] * f.phi[i] < 0.0);
            }
        }
    }
}

TEST_CASE("background pressure: P0(0) = 0 and P0' = -g rho0") {
    const auto& m = tanh_fx().modes.front();
    const double h = 1e-4;
    std::vector<double> xs{0.0};
    for (double x : {-3.0, -0.7, 0.2, 1.5, 4.0}) {
        xs.push_back(x - h);
        xs.push_back(x + h);
    }
    const auto f = reconstruct_fields(m, xs);
    CHECK(f.P0[0] == 0.0);
    for (std::size_t i = 1; i < xs.size(); i += 2) {
        const double x = 0.5 * (xs[i] + xs[i + 1]);
        const double d = (f.P0[i + 1] - f.P0[i]) / (2.0 * h);
        CHECK(d == doctest::Approx(-m.params.g * m.profile.rho(x)).epsilon(1e-7));
    }
}

TEST_CASE("compact outer decay bound on both sides") {
    for (const auto& m : bump().modes) {
        const double k = m.params.k;
        const auto gb = gamma_bounds(m.profile.relabeled(ProfileKind::StrictlyIncreasing), m.params,
                                     1e-2 * bump().problem.lambda_max());
        const double delta = gb.delta_eps;
        for (int i = 1; i <= 200; ++i) {
            const double s = 0.1 * i;
            const auto& cr = m.coeff_right;
            const auto& cl = m.coeff_left;
            const double br = 2.0 * std::max(std::abs(cr[0]) * std::exp(-k * s), std::abs(cr[1]) * std::exp(-delta * s));
            const double bl = 2.0 * std::max(std::abs(cl[0]) * std::exp(-k * s), std::abs(cl[1]) * std::exp(-delta * s));
            CHECK(std::abs(eval_mode(m, m.x_plus + s)[0]) <= br);
            CHECK(std::abs(eval_mode(m, m.x_minus - s)[0]) <= bl);
        }
    }
}

TEST_CASE("general modes vanish at the truncation ends and refuse to extrapolate") {
    const auto& m = tanh_fx().modes.front();
    const auto& s = *m.outer.solutions;
    CHECK(std::abs(eval_mode(m, s.u1->x_hi())[0]) <= 1e-3);
    CHECK(std::abs(eval_mode(m, s.u3->x_lo())[0]) <= 1e-3);
    try {
        eval_mode(m, s.u1->x_hi() + 1.0);
        FAIL("expected an extrapolation error");
    } catch (const DomainError& e) {
        CHECK(e.tag() == "extrapolation");
    }
}

TEST_CASE("trivial inner solution is rejected") {
    DispersionPoint p;
    p.n = 1;
    p.lambda_n = 0.3;
    p.inner_dofs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bump().problem.space().dim()));
    try {
        glue_mode(bump().problem, p);
        FAIL("expected rejection");
    } catch (const DomainError& e) {
        CHECK(e.tag() == "trivial_mode");
    }
}
