#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rtv/outer_compact.hpp"
#include "rtv/profile.hpp"

namespace rtv {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

/// First-order form U' = (L + rho0' R) U and its diagonalisation at one point.
struct SystemMatrices {
    Mat4 L;
    Mat4 R;
    Mat4 D;
    Mat4 P;
    Mat4 Pinv;
    Mat4 dP;  ///< derivative of P with respect to sigma0
    Mat4 M;   ///< coupling: V' = (D + rho0' M) V
    double sigma0 = 0.0;
};

SystemMatrices system_matrices(const DensityProfile& profile, const PhysicalParams& params, double x, double lambda);
/// Same as above from the local density value.
SystemMatrices system_matrices_at(double rho, const PhysicalParams& params, double lambda);

struct GammaBounds {
    double eps_star = 0.0;
    double delta_eps = 0.0;
    double delta_s = 0.0;
    double Gamma_p = 0.0;
    double Gamma_m = 0.0;
    double L0 = 0.0;
    double lambda_max = 0.0;
};

GammaBounds gamma_bounds(const DensityProfile& profile, const PhysicalParams& params, double eps_star);
GammaBounds gamma_bounds(const DensityProfile& profile, const PhysicalParams& params, const ProfileBounds& pb,
                         double eps_star);

/// Panels with 5 Gauss nodes each, plus cached profile values at the nodes.
struct PicardGrid {
    std::vector<double> edges;
    std::vector<double> nodes;      ///< 5 per panel
    std::vector<double> rho_nodes;
    std::vector<double> drho_nodes;
    std::size_t panels() const { return edges.size() - 1; }
};

struct PicardSetup {
    double x_tilde_minus = 0.0;
    double x_tilde_plus = 0.0;
    double X_min = 0.0;
    double X_max = 0.0;
    double margin = 0.0;
    GammaBounds bounds;
    PicardGrid plus;   ///< [x_tilde_plus, X_max], clustered near x_tilde_plus
    PicardGrid minus;  ///< [X_min, x_tilde_minus], clustered near x_tilde_minus
};

PicardSetup truncation_points(const DensityProfile& profile, const PhysicalParams& params, const GammaBounds& bounds,
                              double margin = 0.49);

enum class Which { U1plus, U2plus, U3minus, U4minus };

struct SideContext;

/// A solution of U' = (L + rho0' R) U decaying at +inf (U1, U2) or -inf (U3, U4).
class DecayingSolution {
public:
    DecayingSolution(std::shared_ptr<const SideContext> ctx, Which which);

    Which which() const { return which_; }
    double lambda() const;
    double x_lo() const;
    double x_hi() const;

    /// Phase-normalised diagonal coordinates W = e^{phase} V.
    Vec4 W(double x) const;
    /// Phase-normalised solution e^{phase} U = P W.
    Vec4 normalized(double x) const;
    /// The solution itself, U = e^{-phase} P W.
    Vec4 U(double x) const;
    double phase(double x) const;
    /// Limit of the phase-normalised solution at the far end.
    Vec4 limit() const;

    /// Grid abscissas (panel edges and Gauss nodes, ascending).
    std::vector<double> grid() const;

    const std::vector<double>& updates() const { return updates_; }
    const std::vector<double>& ratios() const { return ratios_; }
    int iterations() const { return static_cast<int>(updates_.size()); }

private:
    void solve();
    void sweep(const std::vector<Vec4>& f, std::vector<Vec4>& w_nodes, std::vector<Vec4>& w_edges,
               std::vector<Vec4>& fwd_edges, std::vector<Vec4>& bwd_edges) const;
    double exponent(int j, double x, double b) const;

    std::shared_ptr<const SideContext> ctx_;
    Which which_;
    int h_ = 0;
    std::array<bool, 4> forward_{};
    std::vector<Vec4> w_nodes_, w_edges_, f_nodes_, fwd_edges_, bwd_edges_;
    std::vector<double> updates_, ratios_;
};

struct DecayingSolutions {
    double lambda = 0.0;
    std::shared_ptr<const DecayingSolution> u1, u2, u3, u4;
};

DecayingSolutions picard_decaying_solutions(const DensityProfile& profile, const PhysicalParams& params,
                                            double lambda, const PicardSetup& setup);

BoundaryCoeffs boundary_coeffs_general(const DecayingSolutions& sols, double x_end, End end);

/// Right-hand sides of the four decay estimates for the phase-normalised solutions.
class DecayEnvelopes {
public:
    DecayEnvelopes(DensityProfile profile, PhysicalParams params, PicardSetup setup);
    double u1(double x) const;
    double u2(double x) const;
    double u3(double x) const;
    double u4(double x) const;
    double z_plus(double x) const { return u1(x) + u2(x); }
    double z_minus(double x) const { return u3(x) + u4(x); }

private:
    double convolution(double x, End side) const;
    DensityProfile profile_;
    PhysicalParams params_;
    PicardSetup setup_;
    double c2_ = 0.0;
};

DecayEnvelopes decay_envelopes(const DensityProfile& profile, const PhysicalParams& params, const PicardSetup& setup);

/// Entries of the endpoint quadratic form and its positivity tests.
struct EndpointTest {
    double q_vv = 0.0;  ///< coefficient of theta^2 (divided by mu)
    double q_ss = 0.0;  ///< coefficient of theta'^2
    double disc = 0.0;  ///< (n11 - n22 - k^2 - sigma0^2)^2 + 4 n12 n21
    double asym = 0.0;  ///< n11 + n22 + k^2 + sigma0^2
    bool psd = false;
    bool printed_signs = false;   ///< n12 >= 0, n21 <= 0
    bool mirrored_signs = false;  ///< n12 <= 0, n21 >= 0
};

EndpointTest endpoint_test(const BoundaryCoeffs& bc, double k, double sigma0_end);

struct CoerciveWindow {
    double x_minus = 0.0;
    double x_plus = 0.0;
    double worst_margin_minus = 0.0;
    double worst_margin_plus = 0.0;
    std::string left_sign_pattern;
    std::vector<double> lambdas;
};

CoerciveWindow coercive_window(const DensityProfile& profile, const PhysicalParams& params, const PicardSetup& setup,
                               const std::vector<double>& lambda_grid);

}  // namespace rtv
