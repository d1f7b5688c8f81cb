#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace rtv {

/// Gravity, viscosity and transverse wavenumber of the normal mode.
struct PhysicalParams {
    double g = 1.0;
    double mu = 1.0;
    double k = 1.0;
    double k1 = 1.0;
    double k2 = 0.0;

    /// Builds parameters with the wavenumber carried entirely by k1.
    static PhysicalParams make(double g, double mu, double k);
    void validate() const;
};

enum class ProfileKind { CompactGradient, StrictlyIncreasing };

/// Evaluation backend of a density profile.
class ProfileModel {
public:
    virtual ~ProfileModel() = default;
    virtual double rho(double x) const = 0;
    virtual double drho(double x) const = 0;
    /// rho_plus - rho(x), evaluated without cancellation where possible.
    virtual double gap_plus(double x) const = 0;
    /// rho(x) - rho_minus, evaluated without cancellation where possible.
    virtual double gap_minus(double x) const = 0;
    /// Abscissas where the second derivative may jump (spline knots).
    virtual std::vector<double> kinks() const { return {}; }
};

/// Equilibrium density rho0 with its derivative and limits at -inf / +inf.
class DensityProfile {
public:
    struct Info {
        ProfileKind kind = ProfileKind::StrictlyIncreasing;
        std::string family;
        double rho_minus = 0.0;
        double rho_plus = 0.0;
        double support_lo = 0.0;  ///< compact kind: left end of supp rho0'
        double support_hi = 0.0;  ///< compact kind: right end of supp rho0'
        double center = 0.0;      ///< location of the steepest gradient
        double scale = 1.0;       ///< characteristic length
    };

    DensityProfile(std::shared_ptr<const ProfileModel> model, Info info);

    double rho(double x) const { return model_->rho(x); }
    double drho(double x) const { return model_->drho(x); }
    double gap_plus(double x) const { return model_->gap_plus(x); }
    double gap_minus(double x) const { return model_->gap_minus(x); }

    ProfileKind kind() const { return info_.kind; }
    bool compact() const { return info_.kind == ProfileKind::CompactGradient; }
    const std::string& family() const { return info_.family; }
    double rho_minus() const { return info_.rho_minus; }
    double rho_plus() const { return info_.rho_plus; }
    double support_lo() const { return info_.support_lo; }
    double support_hi() const { return info_.support_hi; }
    double half_width() const { return 0.5 * (info_.support_hi - info_.support_lo); }
    double center() const { return info_.center; }
    double scale() const { return info_.scale; }
    std::vector<double> kinks() const { return model_->kinks(); }

    /// Same profile with a different declared kind (no reclassification logic).
    DensityProfile relabeled(ProfileKind kind) const;

    /// Interval outside of which both gaps fall below tol * (rho_plus - rho_minus).
    std::pair<double, double> effective_range(double tol = 1e-8) const;

private:
    std::shared_ptr<const ProfileModel> model_;
    Info info_;
};

struct TanhParams {
    double rho_minus = 1.0;
    double rho_plus = 3.0;
    double ell = 1.0;
};

struct BumpParams {
    double rho_minus = 1.0;
    double rho_plus = 3.0;
    double a = 1.0;
};

struct TabulatedParams {
    std::vector<double> x;
    std::vector<double> rho;
    ProfileKind kind = ProfileKind::CompactGradient;
};

using ProfileSpec = std::variant<TanhParams, BumpParams, TabulatedParams>;

DensityProfile make_profile(const ProfileSpec& spec);
DensityProfile make_tanh(const TanhParams& p);
DensityProfile make_bump(const BumpParams& p);
DensityProfile make_tabulated(const TabulatedParams& p);

/// Reads a two-column CSV (x, rho); a header line is skipped if present.
TabulatedParams read_tabulated_csv(const std::string& path, ProfileKind kind);

struct ProfileBounds {
    double L0 = 0.0;          ///< 1 / sup(rho0'/rho0)
    double rho_m = 0.0;       ///< sup rho0'
    double lambda_max = 0.0;  ///< sqrt(g / L0)
    double argmax_ratio = 0.0;
};

ProfileBounds profile_bounds(const DensityProfile& profile, const PhysicalParams& params);

struct ValidationReport {
    bool pass = true;
    double min_drho = 0.0;
    double worst_range_violation = 0.0;
    double worst_fd_error = 0.0;
    double worst_fd_x = 0.0;
    std::vector<std::string> failures;
};

ValidationReport validate(const DensityProfile& profile, int n_samples);

}  // namespace rtv
