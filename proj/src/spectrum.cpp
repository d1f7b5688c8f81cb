#include "rtv/spectrum.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <sstream>

#include "rtv/errors.hpp"

namespace rtv {

SpectrumSlice gamma_spectrum(const DiscreteForms& forms, int n_max, bool vectors) {
    const int n = static_cast<int>(forms.K.size());
    if (n_max < 1 || n_max > n) throw DomainError("n_max outside [1, number of DOFs]");
    const auto eig = band_generalized_eigen(forms.M_rho, forms.K, n - n_max + 1, n, vectors);
    const int m = static_cast<int>(eig.values.size());
    SpectrumSlice s;
    s.lambda = forms.lambda;
    const double top = eig.values[m - 1];
    if (!(top > 0.0) || eig.values[0] <= 1e-12 * top) {
        // count the numerically nonzero part of the pencil
        int rank = 0;
        for (int i = 0; i < m; ++i)
            if (eig.values[i] > 1e-12 * std::max(top, 0.0)) ++rank;
        std::ostringstream os;
        os << "n_max=" << n_max << " exceeds the numerical rank of M_rho (" << rank << " of the requested "
           << n_max << " eigenvalues are positive)";
        throw NumericalError(os.str(), "rank");
    }
    if (vectors) s.eigvecs.resize(n, m);
    for (int i = 0; i < m; ++i) {
        const int src = m - 1 - i;
        const double g = eig.values[src];
        s.gammas.push_back(g);
        // dsbgvx normalises c^T K c = 1, so c^T M_rho c = gamma
        if (vectors) s.eigvecs.col(i) = eig.vectors.col(src) / std::sqrt(g);
    }
    return s;
}

SpectrumSlice spectrum_at(const ReducedProblem& problem, double lambda, int n_max, bool vectors,
                          const FormsObserver& observer) {
    const auto f = problem.forms(lambda);
    if (observer) observer(f);
    return gamma_spectrum(f, n_max, vectors);
}

namespace {

double gk2(const ReducedProblem& p) { return p.params().g * p.params().k * p.params().k; }

double f_value(const ReducedProblem& p, int n, double lambda, const FormsObserver& obs) {
    const auto s = spectrum_at(p, lambda, n, false, obs);
    return gk2(p) * s.gammas[n - 1] - lambda;
}

DispersionPoint finish(const ReducedProblem& p, int n, double lambda, int evals, const FormsObserver& obs) {
    // re-assemble at the root with freshly computed boundary coefficients
    const auto s = spectrum_at(p, lambda, n, true, obs);
    DispersionPoint d;
    d.n = n;
    d.lambda_n = lambda;
    d.gamma = s.gammas[n - 1];
    d.residual = std::abs(gk2(p) * d.gamma - lambda);
    d.inner_dofs = s.eigvecs.col(n - 1);
    d.evaluations = evals + 1;
    return d;
}

/// Bisection on a bracket with f(lo) of sign `sign_lo`; stops once the bracket is below 0.25 tol
/// and the best evaluated |f| is below the residual target, returning that best point.
double bisect(const ReducedProblem& p, int n, double lo, double hi, double tol, int sign_lo, int& evals,
              const FormsObserver& obs) {
    const double target = p.options().tol * gk2(p);
    double best = 0.5 * (lo + hi), best_f = std::numeric_limits<double>::infinity();
    while (hi - lo > 0.25 * tol || best_f > target) {
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
        const double mid = 0.5 * (lo + hi);
        const double f = f_value(p, n, mid, obs);
        ++evals;
        if (std::abs(f) < best_f) {
            best_f = std::abs(f);
            best = mid;
        }
        if ((f > 0.0) == (sign_lo > 0)) lo = mid; else hi = mid;
    }
    return best;
}

}  // namespace

DispersionScan dispersion_scan(const ReducedProblem& problem, const std::vector<double>& grid, int n_max,
                               const FormsObserver& observer) {
    DispersionScan s;
    s.lambdas = grid;
    for (double lam : grid) {
        const auto sl = spectrum_at(problem, lam, n_max, false, observer);
        std::vector<double> row;
        for (double g : sl.gammas) row.push_back(gk2(problem) * g - lam);
        s.f.push_back(std::move(row));
    }
    return s;
}

DispersionPoint solve_compact(const ReducedProblem& problem, int n, double lo, double hi, double tol,
                              const FormsObserver& observer) {
    if (!problem.compact()) throw DomainError("solve_compact needs a compact-gradient profile");
    if (!(lo > 0.0) || hi > problem.lambda_max() * (1.0 + 1e-12) || !(lo < hi))
        throw DomainError("bracket must lie inside (0, lambda_max]", "bracket");
    const double flo = f_value(problem, n, lo, observer), fhi = f_value(problem, n, hi, observer);
    if (!(flo > 0.0)) {
        std::ostringstream os;
        os << "f_" << n << "(lambda_lo=" << lo << ") = " << flo << " is not positive; lower the bracket";
        throw NumericalError(os.str(), "bracket");
    }
    if (fhi >= 0.0) {
        std::ostringstream os;
        os << "f_" << n << "(lambda_hi=" << hi << ") = " << fhi << " is not negative; widen toward lambda_max";
        throw NumericalError(os.str(), "bracket");
    }
    int evals = 2;
    const double root = bisect(problem, n, lo, hi, tol, 1, evals, observer);
    return finish(problem, n, root, evals, observer);
}

std::vector<DispersionPoint> solve_general(const ReducedProblem& problem, int n, const DispersionScan& scan,
                                           double tol, const FormsObserver& observer) {
    std::vector<DispersionPoint> out;
    for (std::size_t i = 0; i + 1 < scan.lambdas.size(); ++i) {
        const double a = scan.f[i][n - 1], b = scan.f[i + 1][n - 1];
        if ((a > 0.0) == (b > 0.0)) continue;
        int evals = 0;
        double lo = scan.lambdas[i], hi = scan.lambdas[i + 1];
        const double root = bisect(problem, n, lo, hi, tol, a > 0.0 ? 1 : -1, evals, observer);
        out.push_back(finish(problem, n, root, evals, observer));
    }
    // descending in lambda
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.lambda_n > y.lambda_n; });
    return out;
}

std::vector<DispersionPoint> solve_dispersion(const ReducedProblem& problem, int n_modes,
                                              const FormsObserver& observer) {
    const double lmax = problem.lambda_max();
    const double tol = problem.options().tol * lmax;
    std::vector<DispersionPoint> out;
    if (problem.compact()) {
        const double k = problem.params().k;
        // tau - k stays above the degeneracy threshold with a factor 10 to spare
        const double lo_min = 2e-7 * k * k * problem.params().mu / problem.profile().rho_minus();
        double lo = problem.lambda_floor();
        for (int n = 1; n <= n_modes; ++n) {
            while (f_value(problem, n, lo, observer) <= 0.0) {
                if (lo / 10.0 < lo_min) {
                    std::ostringstream os;
                    os << "f_" << n << " is not positive above lambda=" << lo
                       << "; the root lies in the degenerate-basis region";
                    throw NumericalError(os.str(), "bracket");
                }
                lo /= 10.0;
            }
            const double tol_n = std::min(tol, 1e-8 * lo * 1e4);
            out.push_back(solve_compact(problem, n, lo, lmax, tol_n, observer));
        }
        return out;
    }
    const auto grid = log_grid(problem.eps_star(), lmax, problem.options().lambda_grid_points);
    const auto scan = dispersion_scan(problem, grid, n_modes, observer);
    const auto count = mode_count(scan, problem.eps_star(), problem.params());
    for (int n = 1; n <= n_modes; ++n) {
        auto roots = solve_general(problem, n, scan, tol, observer);
        if (roots.empty() && n <= count.N) {
            std::ostringstream os;
            os << "no sign change of f_" << n << " on the " << grid.size()
               << "-point scan although N(eps_star)=" << count.N << "; refine the scan grid";
            throw NumericalError(os.str(), "grid_too_coarse");
        }
        out.insert(out.end(), roots.begin(), roots.end());
    }
    return out;
}

int count_sign_changes(const DispersionScan& scan, int n) {
    int c = 0;
    for (std::size_t i = 0; i + 1 < scan.f.size(); ++i)
        if ((scan.f[i][n - 1] > 0.0) != (scan.f[i + 1][n - 1] > 0.0)) ++c;
    return c;
}

ModeCount mode_count(const DispersionScan& scan, double eps_star, const PhysicalParams& params) {
    ModeCount m;
    m.eps_star = eps_star;
    const double c = params.g * params.k * params.k;
    const std::size_t nmax = scan.f.empty() ? 0 : scan.f.front().size();
    for (std::size_t n = 0; n < nmax; ++n) {
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < scan.f.size(); ++i) b = std::min(b, (scan.f[i][n] + scan.lambdas[i]) / c);
        m.b.push_back(b);
    }
    const double threshold = eps_star / c;
    for (std::size_t n = 0; n < m.b.size(); ++n)
        if (m.b[n] > threshold) m.N = static_cast<int>(n + 1);
    return m;
}

ModeCount mode_count(const ReducedProblem& problem, double eps_star, const std::vector<double>& grid, int n_max,
                     const FormsObserver& observer) {
    if (grid.size() < 16) throw DomainError("mode_count needs at least 16 grid points");
    return mode_count(dispersion_scan(problem, grid, n_max, observer), eps_star, problem.params());
}

double derivative_rhs(const ReducedProblem& problem, const Eigen::VectorXd& c, double lambda) {
    const auto& prof = problem.profile();
    const double k = problem.params().k;
    const auto basis = compact_outer_basis(prof, problem.params(), lambda);
    const std::size_t last = problem.space().dim() - 2;
    const double vl = c[0], sl = c[1], vr = c[last], sr = c[last + 1];
    const double rm = prof.rho_minus(), rp = prof.rho_plus();
    const double left = k * rm * vl * vl + rm / (2.0 * basis.tau_minus) * (sl - k * vl) * (sl - k * vl);
    const double right = k * rp * vr * vr + rp / (2.0 * basis.tau_plus) * (sr + k * vr) * (sr + k * vr);
    return problem.volume().Krho.quadratic(c) + left + right;
}

DerivativeCheck gamma_derivative_check(const ReducedProblem& problem, int n, double lambda, double h) {
    if (!problem.compact()) throw DomainError("derivative check applies to compact-gradient profiles");
    if (!(lambda - h > 0.0) || lambda + h > problem.lambda_max())
        throw DomainError("lambda +- h must lie inside (0, lambda_max]");
    const double gp = spectrum_at(problem, lambda + h, n).gammas[n - 1];
    const double gm = spectrum_at(problem, lambda - h, n).gammas[n - 1];
    DerivativeCheck d;
    d.finite_difference = (1.0 / gp - 1.0 / gm) / (2.0 * h);
    if (std::abs(1.0 / gp - 1.0 / gm) < 1e-9 * std::abs(1.0 / gp)) {
        std::ostringstream os;
        os << "step h=" << h << " gives a difference below the eigensolver noise floor";
        throw DomainError(os.str(), "step_size");
    }
    const auto s = spectrum_at(problem, lambda, n, true);
    const Eigen::VectorXd c = s.eigvecs.col(n - 1);
    // c is M_rho-normalised, so int rho0' phi^2 = 1
    d.analytic = derivative_rhs(problem, c, lambda) / problem.volume().Mrho.quadratic(c);
    d.relative_error = std::abs(d.finite_difference - d.analytic) / std::abs(d.analytic);
    return d;
}

}  // namespace rtv
