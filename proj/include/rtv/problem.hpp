#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "rtv/assembly.hpp"
#include "rtv/outer_compact.hpp"
#include "rtv/outer_general.hpp"
#include "rtv/profile.hpp"

namespace rtv {

struct SolverOptions {
    int n_elements = 256;
    Grading grading = Grading::Geometric;
    double grading_ratio = 3.0;
    double eps_star = 0.0;  ///< 0 selects 1e-2 lambda_max
    double tol = 1e-8;      ///< relative to lambda_max
    int n_modes = 8;
    int lambda_grid_points = 64;
    int window_grid_points = 16;
    double truncation_margin = 0.49;
    bool check_coercivity = true;
};

/// Outer data at one lambda: boundary coefficients plus what is needed to extend a mode.
struct OuterData {
    double lambda = 0.0;
    BoundaryPair bc;
    std::optional<CompactOuterBasis> basis;        ///< compact kind
    std::optional<DecayingSolutions> solutions;  ///< strictly increasing kind
};

/// The whole-line problem reduced to a finite interval with a fixed Hermite space.
class ReducedProblem {
public:
    ReducedProblem(DensityProfile profile, PhysicalParams params, SolverOptions options = {});

    const DensityProfile& profile() const { return profile_; }
    const PhysicalParams& params() const { return params_; }
    const SolverOptions& options() const { return options_; }
    const ProfileBounds& bounds() const { return bounds_; }
    bool compact() const { return profile_.compact(); }

    double lambda_max() const { return bounds_.lambda_max; }
    double eps_star() const { return eps_star_; }
    /// Smallest lambda the root finders may visit.
    double lambda_floor() const;

    double x_minus() const { return space_->mesh().x_minus(); }
    double x_plus() const { return space_->mesh().x_plus(); }
    const HermiteSpace& space() const { return *space_; }
    std::shared_ptr<const HermiteSpace> space_ptr() const { return space_; }
    const VolumeForms& volume() const { return *volume_; }

    /// Strictly increasing kind only.
    const PicardSetup& setup() const;
    const CoerciveWindow& window() const;

    OuterData outer(double lambda) const;
    DiscreteForms forms(const OuterData& outer) const;
    DiscreteForms forms(double lambda) const { return forms(outer(lambda)); }

    /// Same reduction with a different element count.
    ReducedProblem refined(int n_elements) const;

private:
    ReducedProblem(const ReducedProblem& base, int n_elements);
    void build_space();

    DensityProfile profile_;
    PhysicalParams params_;
    SolverOptions options_;
    ProfileBounds bounds_;
    double eps_star_ = 0.0;
    std::shared_ptr<const PicardSetup> setup_;
    std::shared_ptr<const CoerciveWindow> window_;
    std::shared_ptr<const HermiteSpace> space_;
    std::shared_ptr<const VolumeForms> volume_;
};

/// Log-spaced grid of n points on [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace rtv
