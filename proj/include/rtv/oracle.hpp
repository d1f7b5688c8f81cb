#pragma once

#include <optional>
#include <vector>

#include "rtv/profile.hpp"

namespace rtv {

/// Signed pairing of the two decaying 2-planes (compound-matrix Evans function).
struct EvansSample {
    double lambda = 0.0;
    double value = 0.0;           ///< pairing divided by the norms of both planes at the match point
    double scale_exponent = 0.0;  ///< log of the removed normalisation
    double x_match = 0.0;

    int sign() const { return value > 0.0 ? 1 : (value < 0.0 ? -1 : 0); }
    /// log |D(lambda)|, independent of the matching point.
    double log_magnitude() const;
};

struct EvansOptions {
    std::optional<double> x_minus;  ///< left start (default: support end or far field)
    std::optional<double> x_plus;   ///< right start
    std::optional<double> x_match;  ///< default: midpoint
    double rtol = 1e-10;
    double initial_scale = 1.0;  ///< multiplies both initial representatives
    double far_field_tol = 1e-12;
};

EvansSample evans_function(const DensityProfile& profile, const PhysicalParams& params, double lambda,
                           const EvansOptions& options = {});

/// Sign changes of the Evans function on the grid, refined by bisection to tol; descending order.
std::vector<double> find_roots(const DensityProfile& profile, const PhysicalParams& params,
                               const std::vector<double>& grid, double tol, const EvansOptions& options = {});

}  // namespace rtv
