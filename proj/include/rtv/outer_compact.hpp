#pragma once

#include <array>
#include <utility>

#include "rtv/profile.hpp"

namespace rtv {

enum class End { Left, Right };

using State4 = std::array<double, 4>;  ///< (phi, phi', phi'', phi''')

/// Closed-form decaying solutions beyond the support of rho0'.
struct CompactOuterBasis {
    double k = 0.0;
    double lambda = 0.0;
    double nu_minus = 0.0;
    double nu_plus = 0.0;
    double tau_minus = 0.0;
    double tau_plus = 0.0;
    double x_minus = 0.0;  ///< left end of the support
    double x_plus = 0.0;   ///< right end of the support

    double tau(End e) const { return e == End::Left ? tau_minus : tau_plus; }
    double x_end(End e) const { return e == End::Left ? x_minus : x_plus; }
};

/// n11 phi + n12 phi' + phi'' = 0 and n21 phi + n22 phi' + phi''' = 0 at an endpoint.
struct BoundaryCoeffs {
    End end = End::Right;
    double n11 = 0.0;
    double n12 = 0.0;
    double n21 = 0.0;
    double n22 = 0.0;
};

struct BoundaryPair {
    BoundaryCoeffs left;
    BoundaryCoeffs right;
};

CompactOuterBasis compact_outer_basis(const DensityProfile& profile, const PhysicalParams& params, double lambda);

BoundaryPair compact_bc_coeffs(const CompactOuterBasis& basis);

/// Coefficients of the k- and tau-exponentials matching (phi, phi') at the endpoint.
std::pair<double, double> extension_coeffs(double phi_end, double dphi_end, const CompactOuterBasis& basis, End side);

State4 eval_outer(double A1, double A2, const CompactOuterBasis& basis, End side, double x);

}  // namespace rtv
