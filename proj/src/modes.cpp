#include "rtv/modes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "rtv/errors.hpp"
#include "rtv/quadrature.hpp"

namespace rtv {

namespace {

/// Element contributions of the interior form and of the rho0' term for test shape a on element e.
template <std::size_t N>
std::pair<double, double> element_pair(const GlobalMode& m, const Eigen::VectorXd& c, std::size_t e, int a) {
    const auto& mesh = m.space->mesh();
    const auto& r = GaussRule<N>::get();
    const double h = mesh.width(e), x0 = mesh.nodes[e];
    const double lam = m.lambda, mu = m.params.mu, k2 = m.params.k * m.params.k;
    double b = 0.0, rr = 0.0;
    for (std::size_t q = 0; q < N; ++q) {
        const double t = 0.5 * (r.x[q] + 1.0), x = x0 + h * t, w = 0.5 * h * r.w[q];
        const auto d = HermiteSpace::shape(t, h);
        double p0 = 0.0, p1 = 0.0, p2 = 0.0;
        for (int s = 0; s < 4; ++s) {
            p0 += d[0][s] * c[2 * e + s];
            p1 += d[1][s] * c[2 * e + s];
            p2 += d[2][s] * c[2 * e + s];
        }
        const double rho = m.profile.rho(x);
        b += w * (lam * rho * (k2 * p0 * d[0][a] + p1 * d[1][a]) +
                  mu * (p2 * d[2][a] + 2.0 * k2 * p1 * d[1][a] + k2 * k2 * p0 * d[0][a]));
        rr += w * m.profile.drho(x) * p0 * d[0][a];
    }
    return {b, rr};
}

State4 recover_trace(const GlobalMode& m, const Eigen::VectorXd& c, End side) {
    const auto& sp = *m.space;
    const double mu = m.params.mu, k2 = m.params.k * m.params.k, lam = m.lambda;
    const double coef = m.params.g * k2 / lam;
    const std::size_t e = side == End::Right ? sp.mesh().elements() - 1 : 0;
    const int av = side == End::Right ? 2 : 0;
    const double x = side == End::Right ? sp.mesh().x_plus() : sp.mesh().x_minus();
    const auto val = sp.eval_on(c, e, x);
    const auto [bv, rv] = element_pair<5>(m, c, e, av);
    const auto [bs, rs] = element_pair<5>(m, c, e, av + 1);
    const double flux = (lam * m.profile.rho(x) + 2.0 * mu * k2) * val[1];
    State4 t{val[0], val[1], 0.0, 0.0};
    if (side == End::Right) {
        t[3] = (coef * rv - bv + flux) / mu;
        t[2] = (bs - coef * rs) / mu;
    } else {
        t[3] = (bv - coef * rv + flux) / mu;
        t[2] = (coef * rs - bs) / mu;
    }
    return t;
}

std::array<double, 2> glue_general(const DecayingSolution& a, const DecayingSolution& b, double x, double phi,
                                   double dphi) {
    const Vec4 u = a.U(x), v = b.U(x);
    const double det = u[0] * v[1] - u[1] * v[0];
    const double scale = std::hypot(u[0], u[1]) * std::hypot(v[0], v[1]);
    if (!(std::abs(det) >= 1e-10 * scale)) {
        std::ostringstream os;
        os << "singular gluing system at x=" << x;
        throw NumericalError(os.str(), "endpoint");
    }
    return {(phi * v[1] - dphi * v[0]) / det, (u[0] * dphi - u[1] * phi) / det};
}

double outer_extent(const GlobalMode& m, End side) {
    const double len = 8.0 * std::max(1.0 / m.params.k, m.profile.scale());
    if (m.compact()) return len;
    const auto& s = *m.outer.solutions;
    return side == End::Right ? std::min(len, s.u1->x_hi() - m.x_plus) : std::min(len, m.x_minus - s.u3->x_lo());
}

}  // namespace

GlobalMode glue_mode(const ReducedProblem& problem, const DispersionPoint& point) {
    if (point.inner_dofs.size() == 0 || point.inner_dofs.lpNorm<Eigen::Infinity>() == 0.0)
        throw DomainError("trivial inner solution is not a mode", "trivial_mode");
    GlobalMode m{.n = point.n,
                 .lambda = point.lambda_n,
                 .gamma = point.gamma,
                 .profile = problem.profile(),
                 .params = problem.params(),
                 .space = problem.space_ptr(),
                 .dofs = point.inner_dofs,
                 .outer = problem.outer(point.lambda_n),
                 .coeff_left = {},
                 .coeff_right = {},
                 .trace_left = {},
                 .trace_right = {},
                 .x_minus = problem.x_minus(),
                 .x_plus = problem.x_plus(),
                 .scale = 1.0};

    // provisional outer coefficients for the sup-norm search
    auto set_outer = [&] {
        const auto l = m.space->eval(m.dofs, m.x_minus), r = m.space->eval(m.dofs, m.x_plus);
        if (m.compact()) {
            const auto [a1, a2] = extension_coeffs(l[0], l[1], *m.outer.basis, End::Left);
            const auto [b1, b2] = extension_coeffs(r[0], r[1], *m.outer.basis, End::Right);
            m.coeff_left = {a1, a2};
            m.coeff_right = {b1, b2};
        } else {
            const auto& s = *m.outer.solutions;
            m.coeff_left = glue_general(*s.u3, *s.u4, m.x_minus, l[0], l[1]);
            m.coeff_right = glue_general(*s.u1, *s.u2, m.x_plus, r[0], r[1]);
        }
    };
    set_outer();
    const auto xs = mode_sample_grid(m);
    std::size_t ip = 0;
    double peak = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double v = std::abs(eval_mode(m, xs[i])[0]);
        if (v > peak) peak = v, ip = i;
    }
    if (ip > 0 && ip + 1 < xs.size()) {
        const auto [xm, neg] = boost::math::tools::brent_find_minima(
            [&](double x) { return -std::abs(eval_mode(m, x)[0]); }, xs[ip - 1], xs[ip + 1], 40);
        peak = std::max(peak, -neg);
    }
    double s = 1.0 / peak;
    const double xc = std::clamp(m.profile.center(), m.x_minus, m.x_plus);
    double ref = eval_mode(m, xc)[0];
    if (std::abs(ref) < 1e-6 * peak) {
        for (double x : mode_sample_grid(m)) {
            const double v = eval_mode(m, x)[0];
            if (std::abs(v) > 1e-3 * peak) {
                ref = v;
                break;
            }
        }
    }
    if (ref < 0.0) s = -s;
    m.scale = s;
    m.dofs *= s;
    set_outer();
    m.trace_left = recover_trace(m, m.dofs, End::Left);
    m.trace_right = recover_trace(m, m.dofs, End::Right);
    return m;
}

State4 eval_outer_mode(const GlobalMode& m, double x) {
    const End side = x <= m.x_minus ? End::Left : End::Right;
    if (x > m.x_minus && x < m.x_plus) throw DomainError("eval_outer_mode called inside the interval");
    const auto& c = side == End::Left ? m.coeff_left : m.coeff_right;
    if (m.compact()) {
        // the compact outer basis is anchored at the interval ends
        CompactOuterBasis b = *m.outer.basis;
        b.x_minus = m.x_minus;
        b.x_plus = m.x_plus;
        return eval_outer(c[0], c[1], b, side, x);
    }
    const auto& s = *m.outer.solutions;
    const Vec4 u = side == End::Left ? s.u3->U(x) : s.u1->U(x);
    const Vec4 v = side == End::Left ? s.u4->U(x) : s.u2->U(x);
    State4 out{};
    for (int j = 0; j < 4; ++j) out[j] = c[0] * u[j] + c[1] * v[j];
    return out;
}

State4 eval_mode(const GlobalMode& m, double x) {
    if (x < m.x_minus || x > m.x_plus) return eval_outer_mode(m, x);
    return m.space->eval(m.dofs, x);
}

double GluingReport::worst() const {
    double w = 0.0;
    for (int j = 0; j < 4; ++j) w = std::max({w, left[j], right[j]});
    return w;
}

GluingReport gluing_jumps(const GlobalMode& m) {
    GluingReport g;
    for (double x : mode_sample_grid(m)) {
        const auto v = eval_mode(m, x);
        for (int j = 0; j < 4; ++j) g.scale[j] = std::max(g.scale[j], std::abs(v[j]));
    }
    const auto ol = eval_outer_mode(m, m.x_minus), orr = eval_outer_mode(m, m.x_plus);
    for (int j = 0; j < 4; ++j) {
        g.scale[j] = std::max({g.scale[j], std::abs(m.trace_left[j]), std::abs(m.trace_right[j])});
        g.left[j] = std::abs(m.trace_left[j] - ol[j]) / g.scale[j];
        g.right[j] = std::abs(m.trace_right[j] - orr[j]) / g.scale[j];
    }
    return g;
}

ResidualReport ode_residual(const GlobalMode& m, int outer_samples) {
    ResidualReport rep;
    const auto& mesh = m.space->mesh();
    const double g = m.params.g, k = m.params.k, k2 = k * k, mu = m.params.mu, lam = m.lambda;
    const double coef = g * k2 / lam;
    const double rho_m = profile_bounds(m.profile, m.params).rho_m;
    double peak = 0.0;
    for (double x : mode_sample_grid(m)) peak = std::max(peak, std::abs(eval_mode(m, x)[0]));
    const double norm = g * k2 * rho_m * peak;
    const std::size_t ne = mesh.elements();
    const auto& r8 = GaussRule<8>::get();

    // nodal test functions
    const auto bvl = endpoint_block(m.outer.bc.left, m.params, lam, m.profile.rho(m.x_minus));
    const auto bvr = endpoint_block(m.outer.bc.right, m.params, lam, m.profile.rho(m.x_plus));
    const auto vl = m.space->eval(m.dofs, m.x_minus), vr = m.space->eval(m.dofs, m.x_plus);
    for (std::size_t node = 0; node <= ne; ++node) {
        for (int kind = 0; kind < 2; ++kind) {
            double res = 0.0, l1 = 0.0;
            for (int side = 0; side < 2; ++side) {
                if (side == 0 && node == 0) continue;
                if (side == 1 && node == ne) continue;
                const std::size_t e = side == 0 ? node - 1 : node;
                const int a = (side == 0 ? 2 : 0) + kind;
                const auto [b, rr] = element_pair<8>(m, m.dofs, e, a);
                res += b - coef * rr;
                const double h = mesh.width(e);
                for (int q = 0; q < 8; ++q)
                    l1 += 0.5 * h * r8.w[q] * std::abs(HermiteSpace::shape(0.5 * (r8.x[q] + 1.0), h)[0][a]);
            }
            if (node == 0) res += bvl(kind, 0) * vl[0] + bvl(kind, 1) * vl[1];
            if (node == ne) res += bvr(kind, 0) * vr[0] + bvr(kind, 1) * vr[1];
            rep.weak = std::max(rep.weak, std::abs(res) / norm);
            rep.weak_per_mass = std::max(rep.weak_per_mass, std::abs(res) / (norm * l1));
        }
    }

    // midpoint functions of the refined mesh, supported on one coarse element
    for (std::size_t e = 0; e < ne; ++e) {
        const double x0 = mesh.nodes[e], h = mesh.width(e), hh = 0.5 * h;
        for (int kind = 0; kind < 2; ++kind) {
            double res = 0.0, h2 = 0.0;
            for (int half = 0; half < 2; ++half) {
                const double a0 = x0 + half * hh;
                const int a = (half == 0 ? 2 : 0) + kind;
                for (int q = 0; q < 8; ++q) {
                    const double t = 0.5 * (r8.x[q] + 1.0), x = a0 + hh * t, w = 0.5 * hh * r8.w[q];
                    const auto d = HermiteSpace::shape(t, hh);
                    const auto p = m.space->eval_on(m.dofs, e, x);
                    const double rho = m.profile.rho(x);
                    res += w * (lam * rho * (k2 * p[0] * d[0][a] + p[1] * d[1][a]) +
                                mu * (p[2] * d[2][a] + 2.0 * k2 * p[1] * d[1][a] + k2 * k2 * p[0] * d[0][a]) -
                                coef * m.profile.drho(x) * p[0] * d[0][a]);
                    h2 += w * (d[0][a] * d[0][a] + d[1][a] * d[1][a] + d[2][a] * d[2][a]);
                }
            }
            rep.enriched = std::max(rep.enriched, std::abs(res) / (norm * std::sqrt(h2)));
        }
    }

    // outer regions
    for (End side : {End::Left, End::Right}) {
        const double len = outer_extent(m, side);
        for (int i = 1; i <= outer_samples; ++i) {
            const double s = len * i / outer_samples;
            const double x = side == End::Right ? m.x_plus + s : m.x_minus - s;
            double res = 0.0;
            if (m.compact()) {
                const auto& b = *m.outer.basis;
                const double tau = b.tau(side), sg = side == End::Right ? -1.0 : 1.0;
                const auto& c = side == End::Left ? m.coeff_left : m.coeff_right;
                const double ek = c[0] * std::exp(sg * k * (x - (side == End::Right ? m.x_plus : m.x_minus)));
                const double et = c[1] * std::exp(sg * tau * (x - (side == End::Right ? m.x_plus : m.x_minus)));
                const auto v = eval_outer_mode(m, x);
                const double d4 = ek * k2 * k2 + et * tau * tau * tau * tau;
                const double rho = m.profile.rho(x);
                res = -lam * lam * rho * (k2 * v[0] - v[2]) - lam * mu * (d4 - 2.0 * k2 * v[2] + k2 * k2 * v[0]) +
                      g * k2 * m.profile.drho(x) * v[0];
            } else {
                // fourth derivative by central differences of the third
                const double hstep = 1e-3 * std::max(1.0 / k, m.profile.scale());
                const double xs = std::clamp(x, (side == End::Right ? m.x_plus : m.x_minus - len) + hstep,
                                             (side == End::Right ? m.x_plus + len : m.x_minus) - hstep);
                const auto v = eval_outer_mode(m, xs);
                const double d4 = (eval_outer_mode(m, xs + hstep)[3] - eval_outer_mode(m, xs - hstep)[3]) / (2.0 * hstep);
                const double rho = m.profile.rho(xs), drho = m.profile.drho(xs);
                res = -lam * lam * (rho * k2 * v[0] - rho * v[2] - drho * v[1]) -
                      lam * mu * (d4 - 2.0 * k2 * v[2] + k2 * k2 * v[0]) + g * k2 * drho * v[0];
            }
            rep.outer = std::max(rep.outer, std::abs(res) / norm);
        }
    }
    return rep;
}

PerturbationField reconstruct_fields(const GlobalMode& m, const std::vector<double>& xs) {
    if (!(m.lambda > 0.0)) throw DomainError("field reconstruction requires lambda > 0");
    const double k1 = m.params.k1, k2c = m.params.k2, kk = m.params.k * m.params.k;
    const double lam = m.lambda, mu = m.params.mu, g = m.params.g;
    PerturbationField f;
    for (double x : xs) {
        const auto v = eval_mode(m, x);
        const double rho = m.profile.rho(x);
        f.x.push_back(x);
        f.phi.push_back(v[0]);
        f.dphi.push_back(v[1]);
        f.d2phi.push_back(v[2]);
        f.d3phi.push_back(v[3]);
        f.zeta.push_back(-m.profile.drho(x) * v[0] / lam);
        f.psi.push_back(-k1 * v[1] / kk);
        f.theta.push_back(-k2c * v[1] / kk);
        f.q.push_back((mu * v[3] - (lam * rho + mu * kk) * v[1]) / kk);
        const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(x) / 0.25)));
        double integral = 0.0;
        for (int i = 0; i < panels; ++i)
            integral += gauss_integrate<8>([&](double t) { return m.profile.rho(t); }, x * i / panels,
                                           x * (i + 1) / panels);
        f.P0.push_back(-g * integral);
    }
    return f;
}

double divergence_defect(const PerturbationField& f, const PhysicalParams& params) {
    double d = 0.0;
    for (std::size_t i = 0; i < f.x.size(); ++i)
        d = std::max(d, std::abs(params.k1 * f.psi[i] + params.k2 * f.theta[i] + f.dphi[i]));
    return d;
}

std::vector<double> mode_sample_grid(const GlobalMode& m, int per_element, int outer_points) {
    std::vector<double> xs;
    const double ll = outer_extent(m, End::Left), lr = outer_extent(m, End::Right);
    for (int i = outer_points; i >= 1; --i) xs.push_back(m.x_minus - ll * i / outer_points);
    const auto& nodes = m.space->mesh().nodes;
    for (std::size_t e = 0; e + 1 < nodes.size(); ++e)
        for (int i = 0; i < per_element; ++i) xs.push_back(nodes[e] + (nodes[e + 1] - nodes[e]) * i / per_element);
    xs.push_back(nodes.back());
    for (int i = 1; i <= outer_points; ++i) xs.push_back(m.x_plus + lr * i / outer_points);
    return xs;
}

}  // namespace rtv
