#include "rtv/identity.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rtv/quadrature.hpp"

namespace rtv {

IdentityCheck whole_line_identity_check(const GlobalMode& m, const TestFunctionSpec& spec) {
    const auto& inner = m.space->mesh().nodes;
    double width = spec.outer_width > 0.0 ? spec.outer_width : 4.0 * std::max(1.0 / m.params.k, m.profile.scale());
    double wl = width, wr = width;
    if (!m.compact()) {
        wl = std::min(width, m.x_minus - m.outer.solutions->u3->x_lo());
        wr = std::min(width, m.outer.solutions->u1->x_hi() - m.x_plus);
    }
    const int no = std::max(1, spec.outer_elements);
    std::vector<double> nodes;
    for (int i = no; i >= 1; --i) nodes.push_back(m.x_minus - wl * i / no);
    const std::size_t first_inner = nodes.size();
    nodes.insert(nodes.end(), inner.begin(), inner.end());
    const std::size_t last_inner = nodes.size() - 1;
    for (int i = 1; i <= no; ++i) nodes.push_back(m.x_plus + wr * i / no);

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd theta(2 * nodes.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = u(rng);
    theta.head<2>().setZero();
    theta.tail<2>().setZero();
    if (spec.inner_only) {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (i <= first_inner || i >= last_inner) {
                theta[2 * i] = 0.0;
                theta[2 * i + 1] = 0.0;
            }
        }
    }

    const double lam = m.lambda, mu = m.params.mu, k2 = m.params.k * m.params.k;
    const double coef = m.params.g * k2 / lam;
    const auto& r = GaussRule<8>::get();
    double inner_vol = 0.0, outer_vol = 0.0, outer_rho = 0.0;
    for (std::size_t e = 0; e + 1 < nodes.size(); ++e) {
        const double x0 = nodes[e], h = nodes[e + 1] - x0;
        const bool is_inner = e >= first_inner && e < last_inner;
        const std::size_t ie = e - first_inner;
        for (int q = 0; q < 8; ++q) {
            const double t = 0.5 * (r.x[q] + 1.0), x = x0 + h * t, w = 0.5 * h * r.w[q];
            const auto d = HermiteSpace::shape(t, h);
            double th[3] = {0.0, 0.0, 0.0};
            for (int j = 0; j < 3; ++j)
                for (int a = 0; a < 4; ++a) th[j] += d[j][a] * theta[2 * e + a];
            const State4 p = is_inner ? m.space->eval_on(m.dofs, ie, x) : eval_outer_mode(m, x);
            const double rho = m.profile.rho(x);
            const double vol = lam * rho * (k2 * p[0] * th[0] + p[1] * th[1]) +
                               mu * (p[2] * th[2] + 2.0 * k2 * p[1] * th[1] + k2 * k2 * p[0] * th[0]);
            if (is_inner) {
                inner_vol += w * vol;
            } else {
                outer_vol += w * vol;
                outer_rho += w * coef * m.profile.drho(x) * p[0] * th[0];
            }
        }
    }
    const auto bvl = endpoint_block(m.outer.bc.left, m.params, lam, m.profile.rho(m.x_minus));
    const auto bvr = endpoint_block(m.outer.bc.right, m.params, lam, m.profile.rho(m.x_plus));
    const Eigen::Vector2d pl(m.dofs[0], m.dofs[1]);
    const Eigen::Vector2d pr(m.dofs[m.dofs.size() - 2], m.dofs[m.dofs.size() - 1]);
    const Eigen::Vector2d tl(theta[2 * first_inner], theta[2 * first_inner + 1]);
    const Eigen::Vector2d tr(theta[2 * last_inner], theta[2 * last_inner + 1]);
    const double bv = tl.dot(bvl * pl) + tr.dot(bvr * pr);

    IdentityCheck c;
    c.lhs = inner_vol + outer_vol;
    c.outer_correction = outer_rho;
    c.rhs = inner_vol + bv + outer_rho;
    c.defect = std::abs(c.lhs - c.rhs) / std::abs(c.lhs);
    return c;
}

}  // namespace rtv
