#pragma once

#include <cstdint>

#include "rtv/modes.hpp"

namespace rtv {

struct IdentityCheck {
    double lhs = 0.0;               ///< whole-line form
    double rhs = 0.0;               ///< reduced form plus outer rho0' correction
    double outer_correction = 0.0;  ///< int outside [x-, x+] of (g k^2 rho0'/lambda) phi theta
    double defect = 0.0;            ///< |lhs - rhs| / |lhs|
};

struct TestFunctionSpec {
    std::uint64_t seed = 1;
    int outer_elements = 8;
    double outer_width = 0.0;  ///< 0 selects a default decay length, clipped to the Picard range
    bool inner_only = false;   ///< zero DOFs at and beyond the interval ends
};

/// Compares the whole-line form against the reduced form for a random compactly supported
/// Hermite test function built on the mode's mesh extended by outer elements.
IdentityCheck whole_line_identity_check(const GlobalMode& mode, const TestFunctionSpec& spec = {});

}  // namespace rtv
