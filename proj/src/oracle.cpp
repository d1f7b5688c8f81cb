#include "rtv/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "rtv/errors.hpp"

namespace rtv {

namespace {

using Plane = std::array<double, 6>;  // coordinates on e12, e13, e14, e23, e24, e34

constexpr int kPair[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};

double coord(const Plane& y, int a, int b) {
    if (a == b) return 0.0;
    return a < b ? y[kPair[a][b]] : -y[kPair[b][a]];
}

Plane wedge(const std::array<double, 4>& u, const std::array<double, 4>& v) {
    Plane y{};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) y[kPair[i][j]] = u[i] * v[j] - u[j] * v[i];
    return y;
}

double pairing(const Plane& a, const Plane& b) {
    return a[0] * b[5] - a[1] * b[4] + a[2] * b[3] + a[3] * b[2] - a[4] * b[1] + a[5] * b[0];
}

double norm(const Plane& y) {
    double s = 0.0;
    for (double v : y) s += v * v;
    return std::sqrt(s);
}

struct CompoundSystem {
    const DensityProfile& profile;
    PhysicalParams params;
    double lambda;

    void operator()(const Plane& y, Plane& dy, double x) const {
        const double k2 = params.k * params.k, mu = params.mu;
        const double rho = profile.rho(x), drho = profile.drho(x);
        double A[4][4] = {{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {0, 0, 0, 0}};
        A[3][0] = -k2 * k2 - lambda * k2 * rho / mu + drho * params.g * k2 / (lambda * mu);
        A[3][1] = drho * lambda / mu;
        A[3][2] = 2.0 * k2 + lambda * rho / mu;
        for (int i = 0; i < 4; ++i) {
            for (int j = i + 1; j < 4; ++j) {
                double s = 0.0;
                for (int m = 0; m < 4; ++m) s += A[i][m] * coord(y, m, j) + A[j][m] * coord(y, i, m);
                dy[kPair[i][j]] = s;
            }
        }
    }
};

/// Integrates y from x0 to x1 with renormalisation, returning the accumulated log scale.
double propagate(const CompoundSystem& sys, Plane& y, double x0, double x1, double rtol) {
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_controlled(1e-300, rtol, odeint::runge_kutta_dopri5<Plane>());
    double log_scale = 0.0;
    const double len = std::abs(x1 - x0);
    const int chunks = std::max(1, static_cast<int>(std::ceil(len / 0.25)));
    const double dir = x1 > x0 ? 1.0 : -1.0;
    for (int c = 0; c < chunks; ++c) {
        const double a = x0 + (x1 - x0) * c / chunks, b = x0 + (x1 - x0) * (c + 1) / chunks;
        try {
            odeint::integrate_adaptive(stepper, sys, y, a, b, dir * 1e-3);
        } catch (const odeint::step_adjustment_error& e) {
            std::ostringstream os;
            os << "compound integration failed near x=" << a << " at lambda=" << sys.lambda
               << "; reduce the initial step or tighten the tolerance";
            throw NumericalError(os.str(), "stiffness");
        }
        const double n = norm(y);
        if (!std::isfinite(n)) throw NumericalError("compound integration overflowed", "stiffness");
        if (n > 1e6 || n < 1e-6) {
            for (double& v : y) v /= n;
            log_scale += std::log(n);
        }
    }
    return log_scale;
}

std::pair<double, double> default_ends(const DensityProfile& profile, double tol) {
    if (profile.compact()) return {profile.support_lo(), profile.support_hi()};
    return profile.effective_range(tol);
}

}  // namespace

double EvansSample::log_magnitude() const { return std::log(std::abs(value)) + scale_exponent; }

EvansSample evans_function(const DensityProfile& profile, const PhysicalParams& params, double lambda,
                           const EvansOptions& opt) {
    if (!(lambda > 0.0)) throw DomainError("Evans function requires lambda > 0");
    const auto ends = default_ends(profile, opt.far_field_tol);
    const double xm = opt.x_minus.value_or(ends.first), xp = opt.x_plus.value_or(ends.second);
    if (!(xm < xp)) throw DomainError("Evans endpoints must satisfy x_minus < x_plus");
    const double xc = opt.x_match.value_or(0.5 * (xm + xp));
    if (xc < xm || xc > xp) throw DomainError("matching point outside the integration interval");

    const double k = params.k, mu = params.mu;
    // frozen-coefficient decaying directions at the start points
    const double sm = std::sqrt(k * k + lambda * profile.rho(xm) / mu);
    const double sp = std::sqrt(k * k + lambda * profile.rho(xp) / mu);
    auto expo = [](double r) { return std::array<double, 4>{1.0, r, r * r, r * r * r}; };
    Plane ym = wedge(expo(k), expo(sm)), yp = wedge(expo(-k), expo(-sp));
    for (double& v : ym) v *= opt.initial_scale;
    for (double& v : yp) v *= opt.initial_scale;

    CompoundSystem sys{profile, params, lambda};
    double log_scale = propagate(sys, ym, xm, xc, opt.rtol);
    log_scale += propagate(sys, yp, xp, xc, opt.rtol);
    const double nm = norm(ym), np = norm(yp);
    EvansSample s;
    s.lambda = lambda;
    s.x_match = xc;
    s.value = pairing(ym, yp) / (nm * np);
    s.scale_exponent = log_scale + std::log(nm) + std::log(np);
    return s;
}

std::vector<double> find_roots(const DensityProfile& profile, const PhysicalParams& params,
                               const std::vector<double>& grid, double tol, const EvansOptions& options) {
    std::vector<double> roots;
    std::vector<int> signs;
    for (double lam : grid) signs.push_back(evans_function(profile, params, lam, options).sign());
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (signs[i] == 0) {
            roots.push_back(grid[i]);
            continue;
        }
        if (signs[i + 1] == 0 || signs[i] == signs[i + 1]) continue;
        double lo = grid[i], hi = grid[i + 1];
        const int slo = signs[i];
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            const int s = evans_function(profile, params, mid, options).sign();
            if (s == 0) {
                lo = hi = mid;
                break;
            }
            if (s == slo) lo = mid; else hi = mid;
        }
        roots.push_back(0.5 * (lo + hi));
    }
    if (!signs.empty() && signs.back() == 0) roots.push_back(grid.back());
    std::sort(roots.begin(), roots.end(), std::greater<>());
    return roots;
}

}  // namespace rtv
