#include "rtv/outer_compact.hpp"

#include <cmath>
#include <sstream>

#include "rtv/errors.hpp"

namespace rtv {

CompactOuterBasis compact_outer_basis(const DensityProfile& profile, const PhysicalParams& params, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("outer basis requires lambda > 0");
    if (!profile.compact()) throw DomainError("closed-form outer basis requires a compact-gradient profile");
    CompactOuterBasis b;
    b.k = params.k;
    b.lambda = lambda;
    b.nu_minus = profile.rho_minus() / params.mu;
    b.nu_plus = profile.rho_plus() / params.mu;
    b.tau_minus = std::sqrt(params.k * params.k + lambda * b.nu_minus);
    b.tau_plus = std::sqrt(params.k * params.k + lambda * b.nu_plus);
    b.x_minus = profile.support_lo();
    b.x_plus = profile.support_hi();
    return b;
}

BoundaryPair compact_bc_coeffs(const CompactOuterBasis& b) {
    const double k = b.k;
    BoundaryPair bc;
    const double tp = b.tau_plus;
    bc.right = {End::Right, k * tp, k + tp, -k * tp * (k + tp), -(k * k + k * tp + tp * tp)};
    const double tm = b.tau_minus;
    bc.left = {End::Left, k * tm, -(k + tm), k * tm * (k + tm), -(k * k + k * tm + tm * tm)};
    return bc;
}

std::pair<double, double> extension_coeffs(double phi, double dphi, const CompactOuterBasis& b, End side) {
    const double k = b.k, tau = b.tau(side);
    if (tau - k < 1e-8 * k) {
        std::ostringstream os;
        os << "degenerate outer basis (tau - k below threshold) at lambda=" << b.lambda;
        throw NumericalError(os.str(), "degenerate_basis");
    }
    if (side == End::Right) {
        // phi = A1 + A2, phi' = -k A1 - tau A2
        return {(tau * phi + dphi) / (tau - k), -(dphi + k * phi) / (tau - k)};
    }
    // phi = A1 + A2, phi' = k A1 + tau A2
    return {(tau * phi - dphi) / (tau - k), (dphi - k * phi) / (tau - k)};
}

State4 eval_outer(double A1, double A2, const CompactOuterBasis& b, End side, double x) {
    const double k = b.k, tau = b.tau(side);
    if (side == End::Right) {
        if (x < b.x_plus) throw DomainError("right outer solution evaluated inside the support");
        const double e1 = A1 * std::exp(-k * (x - b.x_plus));
        const double e2 = A2 * std::exp(-tau * (x - b.x_plus));
        return {e1 + e2, -k * e1 - tau * e2, k * k * e1 + tau * tau * e2, -k * k * k * e1 - tau * tau * tau * e2};
    }
    if (x > b.x_minus) throw DomainError("left outer solution evaluated inside the support");
    const double e1 = A1 * std::exp(k * (x - b.x_minus));
    const double e2 = A2 * std::exp(tau * (x - b.x_minus));
    return {e1 + e2, k * e1 + tau * e2, k * k * e1 + tau * tau * e2, k * k * k * e1 + tau * tau * tau * e2};
}

}  // namespace rtv
