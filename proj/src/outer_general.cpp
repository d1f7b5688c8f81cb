#include "rtv/outer_general.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rtv/errors.hpp"
#include "rtv/quadrature.hpp"

namespace rtv {

namespace {

constexpr int kNodes = 5;

// Integrals of the Lagrange basis on the 5 Gauss nodes over [-1, xi].
std::array<double, kNodes> lagrange_cumulative(double xi) {
    const auto& r = GaussRule<kNodes>::get();
    std::array<double, kNodes> out{};
    const double c = 0.5 * (xi - 1.0), h = 0.5 * (xi + 1.0);
    for (int m = 0; m < kNodes; ++m) {
        const double t = c + h * r.x[m];
        for (int q = 0; q < kNodes; ++q) {
            double l = 1.0;
            for (int s = 0; s < kNodes; ++s)
                if (s != q) l *= (t - r.x[s]) / (r.x[q] - r.x[s]);
            out[q] += h * r.w[m] * l;
        }
    }
    return out;
}

const std::array<std::array<double, kNodes>, kNodes>& node_cumulative() {
    static const auto table = [] {
        std::array<std::array<double, kNodes>, kNodes> t{};
        const auto& r = GaussRule<kNodes>::get();
        for (int i = 0; i < kNodes; ++i) t[i] = lagrange_cumulative(r.x[i]);
        return t;
    }();
    return table;
}

std::vector<double> graded_edges(double a, double b, bool cluster_at_a, double h0, double growth, double cap) {
    std::vector<double> widths;
    double total = 0.0, w = h0;
    const double len = b - a;
    while (total < len) {
        widths.push_back(std::min(w, cap));
        total += widths.back();
        w *= growth;
    }
    // absorb the overshoot into the last panel, merging if it becomes tiny
    widths.back() -= total - len;
    if (widths.size() > 1 && widths.back() < 0.5 * widths[widths.size() - 2]) {
        const double last = widths.back();
        widths.pop_back();
        widths.back() += last;
    }
    if (!cluster_at_a) std::reverse(widths.begin(), widths.end());
    std::vector<double> edges{a};
    for (double wi : widths) edges.push_back(edges.back() + wi);
    edges.back() = b;
    return edges;
}

PicardGrid make_grid(const DensityProfile& profile, std::vector<double> edges) {
    PicardGrid g;
    g.edges = std::move(edges);
    const auto& r = GaussRule<kNodes>::get();
    for (std::size_t p = 0; p + 1 < g.edges.size(); ++p) {
        const double c = 0.5 * (g.edges[p] + g.edges[p + 1]), h = 0.5 * (g.edges[p + 1] - g.edges[p]);
        for (int q = 0; q < kNodes; ++q) {
            const double x = c + h * r.x[q];
            g.nodes.push_back(x);
            g.rho_nodes.push_back(profile.rho(x));
            g.drho_nodes.push_back(profile.drho(x));
        }
    }
    return g;
}

// Smallest x (searching in direction dir) with gamma * gap(x) <= target.
double solve_gap(const auto& gap, double center, double scale, double gamma, double target, double dir) {
    double inside = center, outside = center;
    double step = scale;
    const double limit = 1e6 * scale;
    if (gamma * gap(center) <= target) {
        // move inward until violated
        while (gamma * gap(inside) <= target) {
            inside = center - dir * step;
            step *= 2.0;
            if (step > limit) return center - dir * limit;
        }
    } else {
        while (gamma * gap(outside) > target) {
            inside = outside;
            outside = center + dir * step;
            step *= 2.0;
            if (step > limit) {
                std::ostringstream os;
                os << "profile approaches its limits too slowly: tail bound " << target
                   << " not reached within 1e6 length scales; use a faster-decaying profile";
                throw NumericalError(os.str(), "truncation");
            }
        }
    }
    if (gamma * gap(center) <= target) {
        outside = center;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (inside + outside);
        if (mid == inside || mid == outside) break;
        if (gamma * gap(mid) > target) inside = mid; else outside = mid;
    }
    return outside;
}

}  // namespace

SystemMatrices system_matrices_at(double rho, const PhysicalParams& prm, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("system matrices require lambda > 0 (degenerate spectrum)");
    const double k = prm.k, mu = prm.mu, g = prm.g;
    const double k2 = k * k, k3 = k2 * k;
    const double s2 = k2 + lambda * rho / mu, s = std::sqrt(s2), s3 = s2 * s;
    SystemMatrices m;
    m.sigma0 = s;
    m.L.setZero();
    m.L(0, 1) = m.L(1, 2) = m.L(2, 3) = 1.0;
    m.L(3, 0) = -lambda * k2 * rho / mu - k2 * k2;
    m.L(3, 2) = lambda * rho / mu + 2.0 * k2;
    m.R.setZero();
    m.R(3, 0) = g * k2 / (lambda * mu);
    m.R(3, 1) = lambda / mu;
    m.D = Vec4(-k, -s, k, s).asDiagonal();
    m.P << -1.0 / k3, -1.0 / s3, 1.0 / k3, 1.0 / s3,
            1.0 / k2, 1.0 / s2, 1.0 / k2, 1.0 / s2,
           -1.0 / k, -1.0 / s, 1.0 / k, 1.0 / s,
            1.0, 1.0, 1.0, 1.0;
    m.Pinv << -k3 * s2, k2 * s2, k3, -k2,
               k2 * s3, -k2 * s2, -s3, s2,
               k3 * s2, k2 * s2, -k3, -k2,
              -k2 * s3, -k2 * s2, s3, s2;
    m.Pinv *= mu / (2.0 * lambda * rho);
    const double s4 = s2 * s2;
    m.dP.setZero();
    m.dP.col(1) << 3.0 / s4, -2.0 / s3, 1.0 / s2, 0.0;
    m.dP.col(3) << -3.0 / s4, -2.0 / s3, -1.0 / s2, 0.0;
    m.M = m.Pinv * m.R * m.P - (lambda / (2.0 * mu * s)) * (m.Pinv * m.dP);
    return m;
}

SystemMatrices system_matrices(const DensityProfile& profile, const PhysicalParams& params, double x, double lambda) {
    return system_matrices_at(profile.rho(x), params, lambda);
}

GammaBounds gamma_bounds(const DensityProfile& profile, const PhysicalParams& params, double eps_star) {
    return gamma_bounds(profile, params, profile_bounds(profile, params), eps_star);
}

GammaBounds gamma_bounds(const DensityProfile& profile, const PhysicalParams& prm, const ProfileBounds& pb,
                         double eps_star) {
    if (!(eps_star > 0.0) || !(eps_star < pb.lambda_max)) {
        std::ostringstream os;
        os << "eps_star=" << eps_star << " outside (0, " << pb.lambda_max << ")";
        throw DomainError(os.str(), "eps_star_range");
    }
    const double k = prm.k, g = prm.g, mu = prm.mu, L0 = pb.L0;
    GammaBounds b;
    b.eps_star = eps_star;
    b.L0 = L0;
    b.lambda_max = pb.lambda_max;
    b.delta_eps = std::sqrt(k * k + eps_star * profile.rho_minus() / mu);
    b.delta_s = std::sqrt(k * k + pb.lambda_max * profile.rho_plus() / mu);
    b.Gamma_p = std::max({1.0, 1.0 / k, 1.0 / (k * k), 1.0 / (k * k * k)});
    const double d = b.delta_eps, ds = b.delta_s;
    const double first = std::max(g * (k + 1.0 / L0), g * (k * k / d + 1.0 / L0)) /
                         (profile.rho_minus() * eps_star * eps_star);
    const double second = std::sqrt(g / L0) / (4.0 * d) *
                          std::max({2.0 * k * k / (d * d) * (k + ds), 5.0 * k * k / d + ds, k * k / d + ds});
    b.Gamma_m = first + second;
    return b;
}

PicardSetup truncation_points(const DensityProfile& profile, const PhysicalParams& params, const GammaBounds& bounds,
                              double margin) {
    if (!(margin > 0.0 && margin < 0.5)) throw DomainError("truncation margin must lie in (0, 1/2)");
    PicardSetup s;
    s.bounds = bounds;
    s.margin = margin;
    const double gm = bounds.Gamma_m, c = profile.center(), sc = profile.scale();
    auto gp = [&](double x) { return profile.gap_plus(x); };
    auto gmn = [&](double x) { return profile.gap_minus(x); };
    s.x_tilde_plus = solve_gap(gp, c, sc, gm, margin, 1.0);
    s.x_tilde_minus = solve_gap(gmn, c, sc, gm, margin, -1.0);
    s.X_max = solve_gap(gp, c, sc, gm, 1e-10, 1.0);
    s.X_min = solve_gap(gmn, c, sc, gm, 1e-10, -1.0);
    const double cap = 0.5 / std::max(bounds.delta_s, 1.0 / sc);
    const double h0 = 0.1 * cap;
    s.plus = make_grid(profile, graded_edges(s.x_tilde_plus, s.X_max, true, h0, 1.15, cap));
    s.minus = make_grid(profile, graded_edges(s.X_min, s.x_tilde_minus, false, h0, 1.15, cap));
    (void)params;
    return s;
}

struct SideContext {
    End side = End::Right;
    double lambda = 0.0;
    PhysicalParams params;
    PicardGrid grid;
    double anchor = 0.0;
    double sigma_limit = 0.0;
    std::vector<double> sigma_nodes;
    std::vector<Mat4> M_nodes;
    std::vector<double> B_nodes, B_edges;
    DensityProfile profile;

    SideContext(const DensityProfile& prof, const PhysicalParams& prm, double lam, const PicardGrid& g, End e)
        : side(e), lambda(lam), params(prm), grid(g), profile(prof) {
        const std::size_t np = grid.panels();
        anchor = side == End::Right ? grid.edges.front() : grid.edges.back();
        const double rho_lim = side == End::Right ? prof.rho_plus() : prof.rho_minus();
        sigma_limit = std::sqrt(prm.k * prm.k + lam * rho_lim / prm.mu);
        sigma_nodes.resize(grid.nodes.size());
        M_nodes.resize(grid.nodes.size());
        for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
            const auto sm = system_matrices_at(grid.rho_nodes[i], prm, lam);
            sigma_nodes[i] = sm.sigma0;
            M_nodes[i] = sm.M;
        }
        const auto& r = GaussRule<kNodes>::get();
        std::vector<double> panel_int(np);
        for (std::size_t p = 0; p < np; ++p) {
            const double h = grid.edges[p + 1] - grid.edges[p];
            double s = 0.0;
            for (int q = 0; q < kNodes; ++q) s += r.w[q] * sigma_nodes[kNodes * p + q];
            panel_int[p] = 0.5 * h * s;
        }
        B_edges.assign(np + 1, 0.0);
        if (side == End::Right) {
            for (std::size_t p = 0; p < np; ++p) B_edges[p + 1] = B_edges[p] + panel_int[p];
        } else {
            for (std::size_t p = np; p-- > 0;) B_edges[p] = B_edges[p + 1] - panel_int[p];
        }
        B_nodes.resize(grid.nodes.size());
        const auto& Q = node_cumulative();
        for (std::size_t p = 0; p < np; ++p) {
            const double h = grid.edges[p + 1] - grid.edges[p];
            for (int i = 0; i < kNodes; ++i) {
                double s = 0.0;
                for (int q = 0; q < kNodes; ++q) s += Q[i][q] * sigma_nodes[kNodes * p + q];
                B_nodes[kNodes * p + i] = B_edges[p] + 0.5 * h * s;
            }
        }
    }

    std::size_t panel_of(double x) const {
        const auto it = std::upper_bound(grid.edges.begin(), grid.edges.end(), x);
        const std::ptrdiff_t idx = (it - grid.edges.begin()) - 1;
        return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(grid.panels()) - 1));
    }

    double B_at(double x, std::size_t p, const std::array<double, kNodes>& Qx) const {
        const double h = grid.edges[p + 1] - grid.edges[p];
        double s = 0.0;
        for (int q = 0; q < kNodes; ++q) s += Qx[q] * sigma_nodes[kNodes * p + q];
        (void)x;
        return B_edges[p] + 0.5 * h * s;
    }
};

namespace {

constexpr std::array<double, 4> kA{-1.0, 0.0, 1.0, 0.0};
constexpr std::array<double, 4> kB{0.0, -1.0, 0.0, 1.0};

int target_index(Which w) {
    switch (w) {
        case Which::U1plus: return 0;
        case Which::U2plus: return 1;
        case Which::U3minus: return 2;
        case Which::U4minus: return 3;
    }
    return 0;
}

}  // namespace

DecayingSolution::DecayingSolution(std::shared_ptr<const SideContext> ctx, Which which)
    : ctx_(std::move(ctx)), which_(which), h_(target_index(which)) {
    // components whose relative rate is negative are integrated from the left end of the domain
    if (ctx_->side == End::Right) {
        forward_ = {false, h_ == 0, false, false};
    } else {
        forward_ = {true, true, true, h_ == 3};
    }
    solve();
}

double DecayingSolution::lambda() const { return ctx_->lambda; }
double DecayingSolution::x_lo() const { return ctx_->grid.edges.front(); }
double DecayingSolution::x_hi() const { return ctx_->grid.edges.back(); }

double DecayingSolution::exponent(int j, double x, double b) const {
    return (kA[j] - kA[h_]) * ctx_->params.k * (x - ctx_->anchor) + (kB[j] - kB[h_]) * b;
}

void DecayingSolution::sweep(const std::vector<Vec4>& f, std::vector<Vec4>& w_nodes, std::vector<Vec4>& w_edges,
                             std::vector<Vec4>& fwd_edges, std::vector<Vec4>& bwd_edges) const {
    const auto& g = ctx_->grid;
    const std::size_t np = g.panels();
    const auto& r = GaussRule<kNodes>::get();
    const auto& Q = node_cumulative();
    Vec4 eh = Vec4::Zero();
    eh[h_] = 1.0;
    w_nodes.assign(g.nodes.size(), eh);
    w_edges.assign(np + 1, eh);
    fwd_edges.assign(np + 1, Vec4::Zero());
    bwd_edges.assign(np + 1, Vec4::Zero());
    std::array<double, kNodes> gq{}, sq{};
    for (int j = 0; j < 4; ++j) {
        if (forward_[j]) {
            double F = 0.0;
            for (std::size_t p = 0; p < np; ++p) {
                const double h = g.edges[p + 1] - g.edges[p];
                const double sa = exponent(j, g.edges[p], ctx_->B_edges[p]);
                for (int q = 0; q < kNodes; ++q) {
                    const std::size_t n = kNodes * p + q;
                    sq[q] = exponent(j, g.nodes[n], ctx_->B_nodes[n]);
                    gq[q] = std::exp(sa - sq[q]) * f[n][j];
                }
                for (int i = 0; i < kNodes; ++i) {
                    double v = F;
                    for (int q = 0; q < kNodes; ++q) v += 0.5 * h * Q[i][q] * gq[q];
                    w_nodes[kNodes * p + i][j] += std::exp(sq[i] - sa) * v;
                }
                double tot = F;
                for (int q = 0; q < kNodes; ++q) tot += 0.5 * h * r.w[q] * gq[q];
                F = std::exp(exponent(j, g.edges[p + 1], ctx_->B_edges[p + 1]) - sa) * tot;
                fwd_edges[p + 1][j] = F;
                w_edges[p + 1][j] += F;
            }
        } else {
            double Bk = 0.0;
            for (std::size_t p = np; p-- > 0;) {
                const double h = g.edges[p + 1] - g.edges[p];
                const double sb = exponent(j, g.edges[p + 1], ctx_->B_edges[p + 1]);
                for (int q = 0; q < kNodes; ++q) {
                    const std::size_t n = kNodes * p + q;
                    sq[q] = exponent(j, g.nodes[n], ctx_->B_nodes[n]);
                    gq[q] = std::exp(sb - sq[q]) * f[n][j];
                }
                for (int i = 0; i < kNodes; ++i) {
                    double v = Bk;
                    for (int q = 0; q < kNodes; ++q) v += 0.5 * h * (r.w[q] - Q[i][q]) * gq[q];
                    w_nodes[kNodes * p + i][j] -= std::exp(sq[i] - sb) * v;
                }
                double tot = Bk;
                for (int q = 0; q < kNodes; ++q) tot += 0.5 * h * r.w[q] * gq[q];
                Bk = std::exp(exponent(j, g.edges[p], ctx_->B_edges[p]) - sb) * tot;
                bwd_edges[p][j] = Bk;
                w_edges[p][j] -= Bk;
            }
        }
    }
}

void DecayingSolution::solve() {
    const auto& g = ctx_->grid;
    const std::size_t nn = g.nodes.size();
    std::vector<Vec4> w_nodes(nn, Vec4::Zero()), w_edges(g.panels() + 1, Vec4::Zero());
    std::vector<Vec4> f(nn, Vec4::Zero());
    std::vector<Vec4> nw_nodes, nw_edges, fwd, bwd;
    constexpr int kMaxIter = 64;
    for (int it = 0; it < kMaxIter; ++it) {
        sweep(f, nw_nodes, nw_edges, fwd, bwd);
        double upd = 0.0;
        for (std::size_t i = 0; i < nn; ++i) upd = std::max(upd, (nw_nodes[i] - w_nodes[i]).norm());
        for (std::size_t i = 0; i < nw_edges.size(); ++i) upd = std::max(upd, (nw_edges[i] - w_edges[i]).norm());
        if (!updates_.empty() && updates_.back() > 1e-13) ratios_.push_back(upd / updates_.back());
        updates_.push_back(upd);
        f_nodes_ = f;
        w_nodes = nw_nodes;
        w_edges = nw_edges;
        fwd_edges_ = fwd;
        bwd_edges_ = bwd;
        if (!ratios_.empty() && ratios_.back() > 0.5 + 1e-6) {
            std::ostringstream os;
            os << "Picard contraction ratio " << ratios_.back() << " exceeds 1/2 at lambda=" << ctx_->lambda
               << "; truncation point misplaced";
            throw NumericalError(os.str(), "setup_violation");
        }
        if (it > 0 && upd <= 1e-12) {
            w_nodes_ = w_nodes;
            w_edges_ = w_edges;
            return;
        }
        for (std::size_t i = 0; i < nn; ++i) f[i] = g.drho_nodes[i] * (ctx_->M_nodes[i] * w_nodes[i]);
    }
    std::ostringstream os;
    os << "Picard iteration did not converge in " << kMaxIter << " iterations at lambda=" << ctx_->lambda;
    throw NumericalError(os.str(), "picard_nonconvergence");
}

Vec4 DecayingSolution::W(double x) const {
    const auto& g = ctx_->grid;
    const double span = g.edges.back() - g.edges.front();
    if (x < g.edges.front() - 1e-12 * span || x > g.edges.back() + 1e-12 * span) {
        std::ostringstream os;
        os << "decaying solution evaluated at x=" << x << " outside [" << g.edges.front() << ", " << g.edges.back()
           << "]";
        throw DomainError(os.str(), "extrapolation");
    }
    const std::size_t p = ctx_->panel_of(x);
    const double h = g.edges[p + 1] - g.edges[p];
    const double xi = 2.0 * (x - g.edges[p]) / h - 1.0;
    const auto Qx = lagrange_cumulative(xi);
    const double bx = ctx_->B_at(x, p, Qx);
    const auto& r = GaussRule<kNodes>::get();
    Vec4 out = Vec4::Zero();
    out[h_] = 1.0;
    for (int j = 0; j < 4; ++j) {
        const double sx = exponent(j, x, bx);
        if (forward_[j]) {
            const double sa = exponent(j, g.edges[p], ctx_->B_edges[p]);
            double v = fwd_edges_[p][j];
            for (int q = 0; q < kNodes; ++q) {
                const std::size_t n = kNodes * p + q;
                v += 0.5 * h * Qx[q] * std::exp(sa - exponent(j, g.nodes[n], ctx_->B_nodes[n])) * f_nodes_[n][j];
            }
            out[j] += std::exp(sx - sa) * v;
        } else {
            const double sb = exponent(j, g.edges[p + 1], ctx_->B_edges[p + 1]);
            double v = bwd_edges_[p + 1][j];
            for (int q = 0; q < kNodes; ++q) {
                const std::size_t n = kNodes * p + q;
                v += 0.5 * h * (r.w[q] - Qx[q]) * std::exp(sb - exponent(j, g.nodes[n], ctx_->B_nodes[n])) *
                     f_nodes_[n][j];
            }
            out[j] -= std::exp(sx - sb) * v;
        }
    }
    return out;
}

Vec4 DecayingSolution::normalized(double x) const {
    const auto sm = system_matrices_at(ctx_->profile.rho(x), ctx_->params, ctx_->lambda);
    return sm.P * W(x);
}

double DecayingSolution::phase(double x) const {
    const double k = ctx_->params.k;
    if (which_ == Which::U1plus || which_ == Which::U3minus) {
        const double a = k * (x - ctx_->anchor);
        return which_ == Which::U1plus ? a : -a;
    }
    const auto& g = ctx_->grid;
    const std::size_t p = ctx_->panel_of(x);
    const double h = g.edges[p + 1] - g.edges[p];
    const auto Qx = lagrange_cumulative(2.0 * (x - g.edges[p]) / h - 1.0);
    const double b = ctx_->B_at(x, p, Qx);
    return which_ == Which::U2plus ? b : -b;
}

Vec4 DecayingSolution::U(double x) const { return std::exp(-phase(x)) * normalized(x); }

Vec4 DecayingSolution::limit() const {
    const double k = ctx_->params.k, s = ctx_->sigma_limit;
    switch (which_) {
        case Which::U1plus: return Vec4(-1.0 / (k * k * k), 1.0 / (k * k), -1.0 / k, 1.0);
        case Which::U2plus: return Vec4(-1.0 / (s * s * s), 1.0 / (s * s), -1.0 / s, 1.0);
        case Which::U3minus: return Vec4(1.0 / (k * k * k), 1.0 / (k * k), 1.0 / k, 1.0);
        case Which::U4minus: return Vec4(1.0 / (s * s * s), 1.0 / (s * s), 1.0 / s, 1.0);
    }
    return Vec4::Zero();
}

std::vector<double> DecayingSolution::grid() const {
    std::vector<double> x = ctx_->grid.edges;
    x.insert(x.end(), ctx_->grid.nodes.begin(), ctx_->grid.nodes.end());
    std::sort(x.begin(), x.end());
    return x;
}

DecayingSolutions picard_decaying_solutions(const DensityProfile& profile, const PhysicalParams& params,
                                            double lambda, const PicardSetup& setup) {
    const double lo = setup.bounds.eps_star, hi = setup.bounds.lambda_max;
    if (lambda < lo * (1.0 - 1e-12) || lambda > hi * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "lambda=" << lambda << " outside [eps_star, lambda_max] = [" << lo << ", " << hi << "]";
        throw DomainError(os.str(), "lambda_range");
    }
    auto right = std::make_shared<const SideContext>(profile, params, lambda, setup.plus, End::Right);
    auto left = std::make_shared<const SideContext>(profile, params, lambda, setup.minus, End::Left);
    DecayingSolutions s;
    s.lambda = lambda;
    s.u1 = std::make_shared<const DecayingSolution>(right, Which::U1plus);
    s.u2 = std::make_shared<const DecayingSolution>(right, Which::U2plus);
    s.u3 = std::make_shared<const DecayingSolution>(left, Which::U3minus);
    s.u4 = std::make_shared<const DecayingSolution>(left, Which::U4minus);
    return s;
}

BoundaryCoeffs boundary_coeffs_general(const DecayingSolutions& sols, double x_end, End end) {
    const auto& a = end == End::Right ? *sols.u1 : *sols.u3;
    const auto& b = end == End::Right ? *sols.u2 : *sols.u4;
    const Vec4 u = a.normalized(x_end), v = b.normalized(x_end);
    const double det = u[0] * v[1] - u[1] * v[0];
    const double scale = std::hypot(u[0], u[1]) * std::hypot(v[0], v[1]);
    if (!(std::abs(det) >= 1e-10 * scale)) {
        std::ostringstream os;
        os << "boundary system near-singular at x_end=" << x_end << "; move the endpoint outward";
        throw NumericalError(os.str(), "endpoint_too_far_inside");
    }
    BoundaryCoeffs bc;
    bc.end = end;
    // rows: n11 u0 + n12 u1 = -u2 and the same for v
    bc.n11 = (-u[2] * v[1] + v[2] * u[1]) / det;
    bc.n12 = (-u[0] * v[2] + v[0] * u[2]) / det;
    bc.n21 = (-u[3] * v[1] + v[3] * u[1]) / det;
    bc.n22 = (-u[0] * v[3] + v[0] * u[3]) / det;
    return bc;
}

DecayEnvelopes::DecayEnvelopes(DensityProfile profile, PhysicalParams params, PicardSetup setup)
    : profile_(std::move(profile)), params_(params), setup_(std::move(setup)) {
    const auto& b = setup_.bounds;
    const double d = b.delta_eps, ds = b.delta_s, mu = params_.mu;
    const double d10 = std::pow(d, 10), d12 = std::pow(d, 12), d16 = std::pow(d, 16);
    c2_ = std::sqrt(params_.g * (4.0 * d10 + 16.0 * d12 + 9.0 * std::pow(ds, 4)) / (16.0 * b.L0 * mu * mu * d16)) +
          2.0 * b.Gamma_p * b.Gamma_m;
}

double DecayEnvelopes::convolution(double x, End side) const {
    const double rate = setup_.bounds.delta_eps - params_.k;
    const double a = side == End::Right ? setup_.x_tilde_plus : x;
    const double bnd = side == End::Right ? x : setup_.x_tilde_minus;
    if (bnd <= a) return 0.0;
    const int n = std::max(1, static_cast<int>(std::ceil((bnd - a) / 0.25)));
    const double w = (bnd - a) / n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s += gauss_integrate<8>(
            [&](double t) { return profile_.rho(t) * std::exp(-rate * std::abs(x - t)); }, a + i * w, a + (i + 1) * w);
    }
    return s;
}

double DecayEnvelopes::u1(double x) const {
    const auto& b = setup_.bounds;
    const double rate = b.delta_eps - params_.k;
    const double xt = setup_.x_tilde_plus;
    return 2.0 * b.Gamma_p * b.Gamma_m *
           (profile_.gap_plus(x) + profile_.rho(xt) * std::exp(-rate * (x - xt)) +
            std::abs(profile_.rho(x) - rate * convolution(x, End::Right)));
}

double DecayEnvelopes::u2(double x) const { return c2_ * profile_.gap_plus(x); }

double DecayEnvelopes::u3(double x) const {
    const auto& b = setup_.bounds;
    const double rate = b.delta_eps - params_.k;
    const double xt = setup_.x_tilde_minus;
    return 2.0 * b.Gamma_p * b.Gamma_m *
           (profile_.gap_minus(x) + profile_.rho(xt) * std::exp(-rate * (xt - x)) +
            std::abs(profile_.rho(x) - rate * convolution(x, End::Left)));
}

double DecayEnvelopes::u4(double x) const { return c2_ * profile_.gap_minus(x); }

DecayEnvelopes decay_envelopes(const DensityProfile& profile, const PhysicalParams& params, const PicardSetup& setup) {
    return DecayEnvelopes(profile, params, setup);
}

EndpointTest endpoint_test(const BoundaryCoeffs& bc, double k, double sigma0) {
    EndpointTest t;
    const double c = bc.n11 - bc.n22 - k * k - sigma0 * sigma0;
    t.disc = c * c + 4.0 * bc.n12 * bc.n21;
    t.asym = bc.n11 + bc.n22 + k * k + sigma0 * sigma0;
    if (bc.end == End::Right) {
        t.q_vv = -bc.n21;
        t.q_ss = bc.n12;
    } else {
        t.q_vv = bc.n21;
        t.q_ss = -bc.n12;
    }
    t.printed_signs = bc.n12 >= 0.0 && bc.n21 <= 0.0;
    t.mirrored_signs = bc.n12 <= 0.0 && bc.n21 >= 0.0;
    t.psd = t.q_vv >= 0.0 && t.q_ss >= 0.0 && t.disc <= 0.0;
    return t;
}

CoerciveWindow coercive_window(const DensityProfile& profile, const PhysicalParams& params, const PicardSetup& setup,
                               const std::vector<double>& lambda_grid) {
    const auto& ep = setup.plus.edges;
    const auto& em = setup.minus.edges;
    const std::size_t np = ep.size(), nm = em.size();
    std::vector<bool> ok_plus(np, true), ok_minus(nm, true);
    std::vector<double> margin_plus(np, std::numeric_limits<double>::infinity());
    std::vector<double> margin_minus(nm, std::numeric_limits<double>::infinity());
    std::vector<bool> mirrored(nm, true), printed(nm, true);
    auto margin_of = [](const EndpointTest& t) { return std::min({t.q_vv, t.q_ss, -t.disc}); };
    for (double lam : lambda_grid) {
        const auto sols = picard_decaying_solutions(profile, params, lam, setup);
        for (std::size_t i = 0; i < np; ++i) {
            const double s0 = system_matrices(profile, params, ep[i], lam).sigma0;
            const auto t = endpoint_test(boundary_coeffs_general(sols, ep[i], End::Right), params.k, s0);
            ok_plus[i] = ok_plus[i] && t.psd;
            margin_plus[i] = std::min(margin_plus[i], margin_of(t));
        }
        for (std::size_t i = 0; i < nm; ++i) {
            const double s0 = system_matrices(profile, params, em[i], lam).sigma0;
            const auto t = endpoint_test(boundary_coeffs_general(sols, em[i], End::Left), params.k, s0);
            ok_minus[i] = ok_minus[i] && t.psd;
            margin_minus[i] = std::min(margin_minus[i], margin_of(t));
            mirrored[i] = mirrored[i] && t.mirrored_signs;
            printed[i] = printed[i] && t.printed_signs;
        }
    }
    CoerciveWindow w;
    w.lambdas = lambda_grid;
    std::size_t ip = np, im = nm;
    for (std::size_t i = 0; i < np; ++i)
        if (ok_plus[i]) { ip = i; break; }
    for (std::size_t i = nm; i-- > 0;)
        if (ok_minus[i]) { im = i; break; }
    if (ip == np || im == nm) {
        std::ostringstream os;
        os << "no coercive window within [X_min, X_max]; best margins: right "
           << *std::max_element(margin_plus.begin(), margin_plus.end()) << ", left "
           << *std::max_element(margin_minus.begin(), margin_minus.end());
        throw NumericalError(os.str(), "coercivity_search");
    }
    w.x_plus = ep[ip];
    w.x_minus = em[im];
    w.worst_margin_plus = margin_plus[ip];
    w.worst_margin_minus = margin_minus[im];
    w.left_sign_pattern = mirrored[im] ? "mirrored" : (printed[im] ? "printed" : "mixed");
    return w;
}

}  // namespace rtv
