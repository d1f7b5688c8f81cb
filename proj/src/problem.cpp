#include "rtv/problem.hpp"

#include <cmath>
#include <sstream>

#include "rtv/errors.hpp"

namespace rtv {

std::vector<double> log_grid(double lo, double hi, int n) {
    if (n < 2 || !(lo > 0.0) || !(hi > lo)) throw DomainError("log grid needs n >= 2 and 0 < lo < hi");
    std::vector<double> g(static_cast<std::size_t>(n));
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / (n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

ReducedProblem::ReducedProblem(DensityProfile profile, PhysicalParams params, SolverOptions options)
    : profile_(std::move(profile)), params_(params), options_(options) {
    params_.validate();
    bounds_ = profile_bounds(profile_, params_);
    eps_star_ = options_.eps_star > 0.0 ? options_.eps_star : 1e-2 * bounds_.lambda_max;
    if (!profile_.compact()) {
        const auto gb = gamma_bounds(profile_, params_, bounds_, eps_star_);
        setup_ = std::make_shared<const PicardSetup>(
            truncation_points(profile_, params_, gb, options_.truncation_margin));
        const auto grid = log_grid(eps_star_, bounds_.lambda_max, options_.window_grid_points);
        window_ = std::make_shared<const CoerciveWindow>(coercive_window(profile_, params_, *setup_, grid));
    }
    build_space();
}

ReducedProblem::ReducedProblem(const ReducedProblem& base, int n_elements)
    : profile_(base.profile_),
      params_(base.params_),
      options_(base.options_),
      bounds_(base.bounds_),
      eps_star_(base.eps_star_),
      setup_(base.setup_),
      window_(base.window_) {
    options_.n_elements = n_elements;
    build_space();
}

ReducedProblem ReducedProblem::refined(int n_elements) const { return ReducedProblem(*this, n_elements); }

void ReducedProblem::build_space() {
    double lo = 0.0, hi = 0.0;
    if (profile_.compact()) {
        lo = profile_.support_lo();
        hi = profile_.support_hi();
    } else {
        lo = window_->x_minus;
        hi = window_->x_plus;
    }
    const double c = std::clamp(profile_.center(), lo, hi);
    auto mesh = build_mesh(lo, hi, options_.n_elements, options_.grading, options_.grading_ratio, c);
    space_ = std::make_shared<const HermiteSpace>(std::move(mesh));
    volume_ = std::make_shared<const VolumeForms>(assemble_volume(profile_, params_, *space_));
}

double ReducedProblem::lambda_floor() const {
    return profile_.compact() ? 1e-4 * bounds_.lambda_max : eps_star_;
}

const PicardSetup& ReducedProblem::setup() const {
    if (!setup_) throw DomainError("Picard setup exists only for strictly increasing profiles");
    return *setup_;
}

const CoerciveWindow& ReducedProblem::window() const {
    if (!window_) throw DomainError("coercive window exists only for strictly increasing profiles");
    return *window_;
}

OuterData ReducedProblem::outer(double lambda) const {
    OuterData o;
    o.lambda = lambda;
    if (profile_.compact()) {
        o.basis = compact_outer_basis(profile_, params_, lambda);
        o.bc = compact_bc_coeffs(*o.basis);
    } else {
        o.solutions = picard_decaying_solutions(profile_, params_, lambda, *setup_);
        o.bc.left = boundary_coeffs_general(*o.solutions, x_minus(), End::Left);
        o.bc.right = boundary_coeffs_general(*o.solutions, x_plus(), End::Right);
    }
    return o;
}

DiscreteForms ReducedProblem::forms(const OuterData& outer) const {
    auto f = combine_forms(*volume_, *space_, params_, outer.lambda, outer.bc, profile_.rho(x_minus()),
                           profile_.rho(x_plus()));
    if (options_.check_coercivity) f.coercivity = require_coercive(f, params_);
    return f;
}

}  // namespace rtv
