#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "rtv/assembly.hpp"
#include "rtv/problem.hpp"

namespace rtv {

struct SpectrumSlice {
    double lambda = 0.0;
    std::vector<double> gammas;  ///< descending
    Eigen::MatrixXd eigvecs;     ///< columns M_rho-orthonormal, same order as gammas
};

/// Largest n_max eigenvalues of M_rho c = gamma K c.
SpectrumSlice gamma_spectrum(const DiscreteForms& forms, int n_max, bool vectors = true);

/// Called with every assembled pencil a solver visits.
using FormsObserver = std::function<void(const DiscreteForms&)>;

/// gamma_n(lambda) at one lambda from a fresh reduction.
SpectrumSlice spectrum_at(const ReducedProblem& problem, double lambda, int n_max, bool vectors = false,
                          const FormsObserver& observer = {});

struct DispersionPoint {
    int n = 0;
    double lambda_n = 0.0;
    double gamma = 0.0;
    double residual = 0.0;  ///< |g k^2 gamma_n(lambda_n) - lambda_n|
    Eigen::VectorXd inner_dofs;
    int evaluations = 0;
};

/// Values of f_n(lambda) = g k^2 gamma_n(lambda) - lambda on a lambda grid.
struct DispersionScan {
    std::vector<double> lambdas;
    std::vector<std::vector<double>> f;  ///< f[i][n-1]
};

DispersionScan dispersion_scan(const ReducedProblem& problem, const std::vector<double>& grid, int n_max,
                               const FormsObserver& observer = {});

/// Compact kind: the unique root of f_n in [lo, hi] by bisection.
DispersionPoint solve_compact(const ReducedProblem& problem, int n, double lo, double hi, double tol,
                              const FormsObserver& observer = {});

/// Strictly increasing kind: every sign change of f_n on the scan, refined by bisection.
std::vector<DispersionPoint> solve_general(const ReducedProblem& problem, int n, const DispersionScan& scan,
                                           double tol, const FormsObserver& observer = {});

/// Roots for modes 1..n_modes with the defaults of the problem's options.
std::vector<DispersionPoint> solve_dispersion(const ReducedProblem& problem, int n_modes,
                                              const FormsObserver& observer = {});

int count_sign_changes(const DispersionScan& scan, int n);

struct ModeCount {
    double eps_star = 0.0;
    std::vector<double> b;  ///< b_n = min over the grid of gamma_n
    int N = 0;
};

ModeCount mode_count(const ReducedProblem& problem, double eps_star, const std::vector<double>& grid, int n_max,
                     const FormsObserver& observer = {});
ModeCount mode_count(const DispersionScan& scan, double eps_star, const PhysicalParams& params);

struct DerivativeCheck {
    double finite_difference = 0.0;
    double analytic = 0.0;
    double relative_error = 0.0;
};

/// Central difference of 1/gamma_n against the closed-form derivative (compact kind).
DerivativeCheck gamma_derivative_check(const ReducedProblem& problem, int n, double lambda, double h);

/// Closed-form d(1/gamma)/dlambda * int rho0' phi^2 for a coefficient vector at lambda (compact kind).
double derivative_rhs(const ReducedProblem& problem, const Eigen::VectorXd& c, double lambda);

}  // namespace rtv
