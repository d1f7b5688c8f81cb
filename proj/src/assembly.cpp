#include "rtv/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rtv/errors.hpp"
#include "rtv/quadrature.hpp"

namespace rtv {

namespace {

std::vector<double> graded_widths(int n, double ratio) {
    std::vector<double> w(static_cast<std::size_t>(n));
    const double q = n > 1 ? std::pow(ratio, 1.0 / (n - 1)) : 1.0;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        w[i] = std::pow(q, i);
        s += w[i];
    }
    for (double& v : w) v /= s;
    return w;
}

}  // namespace

Mesh build_mesh(double x_minus, double x_plus, int n_elements, Grading grading, double ratio,
                std::optional<double> cluster) {
    if (!(x_minus < x_plus)) throw DomainError("mesh interval must satisfy x_minus < x_plus", "mesh");
    if (n_elements < 4) throw DomainError("mesh needs at least 4 elements", "mesh");
    Mesh m;
    const double len = x_plus - x_minus;
    if (grading == Grading::Uniform || ratio == 1.0) {
        for (int i = 0; i <= n_elements; ++i) m.nodes.push_back(x_minus + len * i / n_elements);
        m.nodes.back() = x_plus;
        return m;
    }
    if (!(ratio >= 1.0)) throw DomainError("geometric grading ratio must be >= 1", "mesh");
    const double c = cluster.value_or(x_minus);
    if (c <= x_minus || c >= x_plus) {
        const auto w = graded_widths(n_elements, ratio);
        m.nodes.push_back(x_minus);
        if (c >= x_plus) {
            for (auto it = w.rbegin(); it != w.rend(); ++it) m.nodes.push_back(m.nodes.back() + len * *it);
        } else {
            for (double v : w) m.nodes.push_back(m.nodes.back() + len * v);
        }
        m.nodes.back() = x_plus;
        return m;
    }
    const double l1 = c - x_minus, l2 = x_plus - c;
    int n1 = static_cast<int>(std::lround(n_elements * l1 / len));
    n1 = std::clamp(n1, 1, n_elements - 1);
    const int n2 = n_elements - n1;
    const auto w1 = graded_widths(n1, ratio), w2 = graded_widths(n2, ratio);
    m.nodes.push_back(x_minus);
    for (auto it = w1.rbegin(); it != w1.rend(); ++it) m.nodes.push_back(m.nodes.back() + l1 * *it);
    m.nodes.back() = c;
    for (double v : w2) m.nodes.push_back(m.nodes.back() + l2 * v);
    m.nodes.back() = x_plus;
    return m;
}

HermiteSpace::HermiteSpace(Mesh mesh) : mesh_(std::move(mesh)) {
    if (mesh_.nodes.size() < 2) throw DomainError("empty mesh", "mesh");
    for (std::size_t i = 0; i + 1 < mesh_.nodes.size(); ++i)
        if (!(mesh_.nodes[i] < mesh_.nodes[i + 1])) throw DomainError("mesh nodes not strictly increasing", "mesh");
}

std::size_t HermiteSpace::element_of(double x) const {
    const auto& n = mesh_.nodes;
    const auto it = std::upper_bound(n.begin(), n.end(), x);
    const std::ptrdiff_t e = (it - n.begin()) - 1;
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(e, 0, static_cast<std::ptrdiff_t>(mesh_.elements()) - 1));
}

std::array<std::array<double, 4>, 4> HermiteSpace::shape(double t, double h) {
    std::array<std::array<double, 4>, 4> d{};
    const double t2 = t * t, t3 = t2 * t;
    d[0] = {1.0 - 3.0 * t2 + 2.0 * t3, h * (t - 2.0 * t2 + t3), 3.0 * t2 - 2.0 * t3, h * (t3 - t2)};
    d[1] = {(-6.0 * t + 6.0 * t2) / h, 1.0 - 4.0 * t + 3.0 * t2, (6.0 * t - 6.0 * t2) / h, 3.0 * t2 - 2.0 * t};
    d[2] = {(-6.0 + 12.0 * t) / (h * h), (-4.0 + 6.0 * t) / h, (6.0 - 12.0 * t) / (h * h), (6.0 * t - 2.0) / h};
    d[3] = {12.0 / (h * h * h), 6.0 / (h * h), -12.0 / (h * h * h), 6.0 / (h * h)};
    return d;
}

State4 HermiteSpace::eval_on(const Eigen::VectorXd& c, std::size_t e, double x) const {
    const double h = mesh_.width(e);
    const auto d = shape((x - mesh_.nodes[e]) / h, h);
    State4 out{};
    for (int m = 0; m < 4; ++m)
        for (int a = 0; a < 4; ++a) out[m] += d[m][a] * c[2 * e + a];
    return out;
}

State4 HermiteSpace::eval(const Eigen::VectorXd& c, double x) const { return eval_on(c, element_of(x), x); }

VolumeForms assemble_volume(const DensityProfile& profile, const PhysicalParams& params, const HermiteSpace& space) {
    const std::size_t n = space.dim();
    VolumeForms v{SymBand(n, 3), SymBand(n, 3), SymBand(n, 3), SymBand(n, 3)};
    const auto& r = GaussRule<5>::get();
    const double k2 = params.k * params.k, k4 = k2 * k2;
    const auto& mesh = space.mesh();
    for (std::size_t e = 0; e < mesh.elements(); ++e) {
        const double h = mesh.width(e), x0 = mesh.nodes[e];
        for (int q = 0; q < 5; ++q) {
            const double t = 0.5 * (r.x[q] + 1.0), x = x0 + h * t, wq = 0.5 * h * r.w[q];
            const double rho = profile.rho(x), drho = profile.drho(x);
            const auto d = HermiteSpace::shape(t, h);
            for (int a = 0; a < 4; ++a) {
                for (int b = a; b < 4; ++b) {
                    const std::size_t i = 2 * e + a, j = 2 * e + b;
                    const double uv = d[0][a] * d[0][b], du = d[1][a] * d[1][b], dd = d[2][a] * d[2][b];
                    v.Krho.add(i, j, wq * rho * (k2 * uv + du));
                    v.Kmu.add(i, j, wq * (dd + 2.0 * k2 * du + k4 * uv));
                    v.Mrho.add(i, j, wq * drho * uv);
                    v.G.add(i, j, wq * (uv + du + dd));
                }
            }
        }
    }
    return v;
}

Eigen::Matrix2d endpoint_block(const BoundaryCoeffs& bc, const PhysicalParams& params, double lambda, double rho_end) {
    const double mu = params.mu, k2 = params.k * params.k;
    const double s2 = k2 + lambda * rho_end / mu;
    Eigen::Matrix2d b;
    b << -bc.n21, -(bc.n22 + k2 + s2), bc.n11, bc.n12;
    b *= mu;
    return bc.end == End::Right ? b : Eigen::Matrix2d(-b);
}

DiscreteForms combine_forms(const VolumeForms& volume, const HermiteSpace& space, const PhysicalParams& params,
                            double lambda, const BoundaryPair& bc, double rho_left, double rho_right) {
    DiscreteForms f;
    f.lambda = lambda;
    f.K = lambda * volume.Krho + params.mu * volume.Kmu;
    f.M_rho = volume.Mrho;
    f.G = volume.G;
    f.bv_left = endpoint_block(bc.left, params, lambda, rho_left);
    f.bv_right = endpoint_block(bc.right, params, lambda, rho_right);
    const std::size_t last = space.dim() - 2;
    const auto place = [&](const Eigen::Matrix2d& b, std::size_t off) {
        const Eigen::Matrix2d s = 0.5 * (b + b.transpose());
        f.K.add(off, off, s(0, 0));
        f.K.add(off, off + 1, s(0, 1));
        f.K.add(off + 1, off + 1, s(1, 1));
    };
    place(f.bv_left, 0);
    place(f.bv_right, last);
    const double dl = f.bv_left(0, 1) - f.bv_left(1, 0), dr = f.bv_right(0, 1) - f.bv_right(1, 0);
    f.asymmetry_norm = std::sqrt(2.0 * (dl * dl + dr * dr));
    return f;
}

DiscreteForms assemble_forms(const DensityProfile& profile, const PhysicalParams& params, double lambda,
                             const BoundaryPair& bc, const HermiteSpace& space) {
    const auto volume = assemble_volume(profile, params, space);
    const auto& m = space.mesh();
    return combine_forms(volume, space, params, lambda, bc, profile.rho(m.x_minus()), profile.rho(m.x_plus()));
}

CoercivityReport coercivity_check(const DiscreteForms& forms, const PhysicalParams& params) {
    CoercivityReport r;
    r.lambda = forms.lambda;
    const double k2 = params.k * params.k;
    r.threshold = params.mu * std::min({k2 * k2, 2.0 * k2, 1.0});
    r.tolerance = 1e-8 * forms.K.frobenius();
    const auto eig = band_generalized_eigen(forms.K, forms.G, 1, 1, false);
    r.min_eig = eig.values[0];
    r.margin = r.min_eig - r.threshold;
    r.pass = r.margin >= -r.tolerance;
    return r;
}

CoercivityReport require_coercive(const DiscreteForms& forms, const PhysicalParams& params) {
    auto r = coercivity_check(forms, params);
    if (!r.pass) {
        std::ostringstream os;
        os << "coercivity violated at lambda=" << r.lambda << ": smallest (K,G) eigenvalue " << r.min_eig
           << " below threshold " << r.threshold << " (endpoint blocks: left q_vv=" << forms.bv_left(0, 0)
           << " q_ss=" << forms.bv_left(1, 1) << ", right q_vv=" << forms.bv_right(0, 0)
           << " q_ss=" << forms.bv_right(1, 1) << ")";
        throw NumericalError(os.str(), "coercivity");
    }
    return r;
}

}  // namespace rtv
