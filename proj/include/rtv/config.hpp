#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rtv/problem.hpp"
#include "rtv/profile.hpp"

namespace rtv {

struct ProfileConfig {
    std::string family;  ///< tanh | bump | tabulated
    ProfileKind kind = ProfileKind::StrictlyIncreasing;
    double rho_minus = 0.0;
    double rho_plus = 0.0;
    double ell = 0.0;
    double a = 0.0;
    std::string path;  ///< tabulated samples, resolved against the config directory
};

struct RunConfig {
    ProfileConfig profile;
    double g = 0.0;
    double mu = 0.0;
    std::vector<double> k_values;
    std::optional<double> k1;
    std::optional<double> k2;
    SolverOptions numerical;
    std::string out_dir = "rtvisc_out";
    std::vector<std::string> formats{"csv"};

    DensityProfile make_profile() const;
    PhysicalParams physical(double k) const;
};

/// Parses sectioned key = value text ([profile], [physical], [numerical], [output]).
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

}  // namespace rtv
