#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "rtv/problem.hpp"
#include "rtv/spectrum.hpp"

namespace rtv {

/// A characteristic pair extended to the whole line.
struct GlobalMode {
    int n = 0;
    double lambda = 0.0;
    double gamma = 0.0;
    DensityProfile profile;
    PhysicalParams params;
    std::shared_ptr<const HermiteSpace> space;
    Eigen::VectorXd dofs;  ///< normalised inner coefficients
    OuterData outer;
    /// Compact kind: (A1, A2) of the k- and tau-exponentials.
    /// Strictly increasing kind: coefficients of (U3, U4) on the left and (U1, U2) on the right.
    std::array<double, 2> coeff_left{};
    std::array<double, 2> coeff_right{};
    State4 trace_left{};   ///< inner one-sided (phi, phi', phi'', phi''') at x_minus
    State4 trace_right{};  ///< inner one-sided values at x_plus
    double x_minus = 0.0;
    double x_plus = 0.0;
    double scale = 1.0;  ///< factor applied to the raw eigenvector

    bool compact() const { return outer.basis.has_value(); }
};

GlobalMode glue_mode(const ReducedProblem& problem, const DispersionPoint& point);

/// (phi, phi', phi'', phi''') anywhere on the line; cubic derivatives inside the interval.
State4 eval_mode(const GlobalMode& mode, double x);
/// Outer solution only (x outside the interval or at an endpoint).
State4 eval_outer_mode(const GlobalMode& mode, double x);

struct GluingReport {
    std::array<double, 4> left{};   ///< |inner - outer| / max|phi^(j)| at x_minus
    std::array<double, 4> right{};  ///< same at x_plus
    std::array<double, 4> scale{};  ///< max|phi^(j)| used for normalisation
    double worst() const;
};

GluingReport gluing_jumps(const GlobalMode& mode);

struct ResidualReport {
    double weak = 0.0;           ///< max over nodal Hermite test functions, fresh quadrature
    double weak_per_mass = 0.0;  ///< same, each divided by the L1 norm of its test function
    double enriched = 0.0;       ///< midpoint functions of the refined mesh, divided by their H2 norm
    double outer = 0.0;          ///< pointwise, outer regions
};

/// Scaled residuals of the fourth-order equation, normalised by g k^2 rho_m max|phi|.
ResidualReport ode_residual(const GlobalMode& mode, int outer_samples = 64);

struct PerturbationField {
    std::vector<double> x;
    std::vector<double> zeta;
    std::vector<double> psi;
    std::vector<double> theta;
    std::vector<double> phi;
    std::vector<double> dphi;
    std::vector<double> d2phi;
    std::vector<double> d3phi;
    std::vector<double> q;
    std::vector<double> P0;  ///< background pressure with P0(0) = 0
};

PerturbationField reconstruct_fields(const GlobalMode& mode, const std::vector<double>& x);

/// max |k1 psi + k2 theta + phi'| over the samples.
double divergence_defect(const PerturbationField& f, const PhysicalParams& params);

/// Sample abscissas covering the interval and a decay length on both sides.
std::vector<double> mode_sample_grid(const GlobalMode& mode, int per_element = 4, int outer_points = 64);

}  // namespace rtv
