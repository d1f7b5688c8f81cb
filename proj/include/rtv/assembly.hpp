#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rtv/band.hpp"
#include "rtv/outer_compact.hpp"
#include "rtv/profile.hpp"

namespace rtv {

struct Mesh {
    std::vector<double> nodes;

    double x_minus() const { return nodes.front(); }
    double x_plus() const { return nodes.back(); }
    std::size_t elements() const { return nodes.size() - 1; }
    double width(std::size_t e) const { return nodes[e + 1] - nodes[e]; }
};

enum class Grading { Uniform, Geometric };

/// Partition of [x_minus, x_plus]. Geometric grading uses widest/narrowest = ratio,
/// with the narrowest elements at cluster (default: x_minus).
Mesh build_mesh(double x_minus, double x_plus, int n_elements, Grading grading = Grading::Uniform,
                double ratio = 1.0, std::optional<double> cluster = std::nullopt);

/// Cubic Hermite (C1) elements; DOFs ordered (value_0, slope_0, value_1, slope_1, ...).
class HermiteSpace {
public:
    explicit HermiteSpace(Mesh mesh);

    const Mesh& mesh() const { return mesh_; }
    std::size_t dim() const { return 2 * mesh_.nodes.size(); }
    std::size_t element_of(double x) const;

    /// d[m][a] = m-th derivative of local shape a at local coordinate t in [0, 1], element width h.
    static std::array<std::array<double, 4>, 4> shape(double t, double h);

    /// (phi, phi', phi'', phi''') of the expansion with coefficients c, derivatives taken element-wise.
    State4 eval(const Eigen::VectorXd& c, double x) const;
    /// Same, restricted to element e (one-sided at shared nodes).
    State4 eval_on(const Eigen::VectorXd& c, std::size_t e, double x) const;

private:
    Mesh mesh_;
};

/// lambda-independent pieces: K = lambda Krho + mu Kmu + BV.
struct VolumeForms {
    SymBand Krho;  ///< int rho0 (k^2 u v + u' v')
    SymBand Kmu;   ///< int (u'' v'' + 2k^2 u' v' + k^4 u v)
    SymBand Mrho;  ///< int rho0' u v
    SymBand G;     ///< int (u v + u' v' + u'' v'')
};

VolumeForms assemble_volume(const DensityProfile& profile, const PhysicalParams& params, const HermiteSpace& space);

/// Endpoint form as a 2x2 block: rows = test (value, slope), columns = trial (value, slope).
Eigen::Matrix2d endpoint_block(const BoundaryCoeffs& bc, const PhysicalParams& params, double lambda, double rho_end);

struct CoercivityReport {
    double lambda = 0.0;
    double min_eig = 0.0;    ///< smallest eigenvalue of the pencil (K, G)
    double threshold = 0.0;  ///< mu min(k^4, 2k^2, 1)
    double margin = 0.0;     ///< min_eig - threshold
    double tolerance = 0.0;  ///< 1e-8 ||K||_F
    bool pass = false;
};

struct DiscreteForms {
    double lambda = 0.0;
    SymBand K;
    SymBand M_rho;
    SymBand G;
    double asymmetry_norm = 0.0;  ///< ||K - K^T||_F before symmetrisation
    Eigen::Matrix2d bv_left = Eigen::Matrix2d::Zero();   ///< unsymmetrised
    Eigen::Matrix2d bv_right = Eigen::Matrix2d::Zero();  ///< unsymmetrised
    std::optional<CoercivityReport> coercivity;
};

DiscreteForms combine_forms(const VolumeForms& volume, const HermiteSpace& space, const PhysicalParams& params,
                            double lambda, const BoundaryPair& bc, double rho_left, double rho_right);

DiscreteForms assemble_forms(const DensityProfile& profile, const PhysicalParams& params, double lambda,
                             const BoundaryPair& bc, const HermiteSpace& space);

CoercivityReport coercivity_check(const DiscreteForms& forms, const PhysicalParams& params);
/// Throws NumericalError tagged "coercivity" when the check fails.
CoercivityReport require_coercive(const DiscreteForms& forms, const PhysicalParams& params);

}  // namespace rtv
