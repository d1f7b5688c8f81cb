#include "rtv/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/math/interpolators/cubic_hermite.hpp>

#include "rtv/errors.hpp"
#include "rtv/quadrature.hpp"

namespace rtv {

PhysicalParams PhysicalParams::make(double g, double mu, double k) {
    PhysicalParams p;
    p.g = g;
    p.mu = mu;
    p.k = k;
    p.k1 = k;
    p.k2 = 0.0;
    p.validate();
    return p;
}

void PhysicalParams::validate() const {
    if (!(g > 0.0)) throw DomainError("physical.g must be positive");
    if (!(mu > 0.0)) throw DomainError("physical.mu must be positive");
    if (!(k > 0.0)) throw DomainError("physical.k must be positive");
    if (std::abs(k1 * k1 + k2 * k2 - k * k) > 1e-12 * k * k)
        throw DomainError("physical.k1, physical.k2 inconsistent with k");
}

DensityProfile::DensityProfile(std::shared_ptr<const ProfileModel> model, Info info)
    : model_(std::move(model)), info_(std::move(info)) {
    if (!(info_.rho_minus > 0.0)) throw DomainError("rho_minus must be positive");
    if (!(info_.rho_minus < info_.rho_plus)) throw DomainError("rho_minus must be below rho_plus");
}

DensityProfile DensityProfile::relabeled(ProfileKind kind) const {
    Info info = info_;
    info.kind = kind;
    return DensityProfile(model_, info);
}

std::pair<double, double> DensityProfile::effective_range(double tol) const {
    if (compact()) return {info_.support_lo, info_.support_hi};
    const double thresh = tol * (info_.rho_plus - info_.rho_minus);
    const double limit = 1e6 * info_.scale;
    auto search = [&](double dir, auto gap) {
        double inner = info_.center;
        double step = info_.scale;
        double outer = inner + dir * step;
        while (gap(outer) > thresh) {
            inner = outer;
            step *= 2.0;
            outer = info_.center + dir * step;
            if (step > limit) throw NumericalError("profile does not reach its limits within 1e6 length scales", "truncation");
        }
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (inner + outer);
            if (gap(mid) > thresh) inner = mid; else outer = mid;
        }
        return outer;
    };
    const double hi = search(1.0, [&](double x) { return gap_plus(x); });
    const double lo = search(-1.0, [&](double x) { return gap_minus(x); });
    return {lo, hi};
}

namespace {

class TanhModel : public ProfileModel {
public:
    explicit TanhModel(const TanhParams& p)
        : mean_(0.5 * (p.rho_plus + p.rho_minus)), half_(0.5 * (p.rho_plus - p.rho_minus)), ell_(p.ell) {}

    double rho(double x) const override { return mean_ + half_ * std::tanh(x / ell_); }
    double drho(double x) const override {
        const double e = std::exp(-2.0 * std::abs(x / ell_));
        return half_ / ell_ * 4.0 * e / ((1.0 + e) * (1.0 + e));
    }
    double gap_plus(double x) const override { return 2.0 * half_ / (1.0 + std::exp(2.0 * x / ell_)); }
    double gap_minus(double x) const override { return 2.0 * half_ / (1.0 + std::exp(-2.0 * x / ell_)); }

private:
    double mean_, half_, ell_;
};

class BumpModel : public ProfileModel {
public:
    explicit BumpModel(const BumpParams& p) : rho_minus_(p.rho_minus), rho_plus_(p.rho_plus), a_(p.a) {
        cum_.assign(kPanels + 1, 0.0);
        for (int i = 0; i < kPanels; ++i)
            cum_[i + 1] = cum_[i] + gauss_integrate<15>(shape, node(i), node(i + 1));
        rev_.assign(kPanels + 1, 0.0);
        for (int i = kPanels - 1; i >= 0; --i)
            rev_[i] = rev_[i + 1] + gauss_integrate<15>(shape, node(i), node(i + 1));
        total_ = cum_[kPanels];
        c_ = (rho_plus_ - rho_minus_) / (a_ * total_);
    }

    double amplitude() const { return c_; }

    double rho(double x) const override {
        const double s = x / a_;
        if (s <= -1.0) return rho_minus_;
        if (s >= 1.0) return rho_plus_;
        if (s <= 0.0) return rho_minus_ + c_ * a_ * below(s);
        return rho_plus_ - c_ * a_ * above(s);
    }
    double drho(double x) const override { return c_ * shape(x / a_); }
    double gap_plus(double x) const override {
        const double s = x / a_;
        if (s >= 1.0) return 0.0;
        if (s <= -1.0) return rho_plus_ - rho_minus_;
        return c_ * a_ * above(s);
    }
    double gap_minus(double x) const override {
        const double s = x / a_;
        if (s <= -1.0) return 0.0;
        if (s >= 1.0) return rho_plus_ - rho_minus_;
        return c_ * a_ * below(s);
    }

private:
    static constexpr int kPanels = 512;

    static double shape(double s) {
        const double q = 1.0 - s * s;
        return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
    }
    static double node(int i) { return -1.0 + 2.0 * i / kPanels; }
    int panel(double s) const {
        return std::clamp(static_cast<int>(std::floor((s + 1.0) * 0.5 * kPanels)), 0, kPanels - 1);
    }
    // integral of the shape over [-1, s]
    double below(double s) const {
        const int i = panel(s);
        return cum_[i] + gauss_integrate<15>(shape, node(i), s);
    }
    // integral of the shape over [s, 1]
    double above(double s) const {
        const int i = panel(s);
        return rev_[i + 1] + gauss_integrate<15>(shape, s, node(i + 1));
    }

    double rho_minus_, rho_plus_, a_;
    double total_ = 0.0, c_ = 0.0;
    std::vector<double> cum_, rev_;
};

std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> h(n - 1), del(n - 1), d(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        del[i] = (y[i + 1] - y[i]) / h[i];
    }
    if (n == 2) {
        d[0] = d[1] = del[0];
        return d;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (del[i - 1] * del[i] <= 0.0) continue;
        const double w1 = 2.0 * h[i] + h[i - 1], w2 = h[i] + 2.0 * h[i - 1];
        d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (s * d0 <= 0.0) return 0.0;
        if (d0 * d1 <= 0.0 && std::abs(s) > std::abs(3.0 * d0)) return 3.0 * d0;
        return s;
    };
    d[0] = end_slope(h[0], h[1], del[0], del[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    return d;
}

class TabulatedModel : public ProfileModel {
public:
    explicit TabulatedModel(const TabulatedParams& p)
        : x_(p.x), lo_(p.x.front()), hi_(p.x.back()), rho_minus_(p.rho.front()), rho_plus_(p.rho.back()),
          spline_(std::vector<double>(p.x), std::vector<double>(p.rho), pchip_slopes(p.x, p.rho)) {}

    double rho(double x) const override {
        if (x <= lo_) return rho_minus_;
        if (x >= hi_) return rho_plus_;
        return std::clamp(spline_(x), rho_minus_, rho_plus_);
    }
    double drho(double x) const override {
        if (x <= lo_ || x >= hi_) return 0.0;
        return std::max(0.0, spline_.prime(x));
    }
    double gap_plus(double x) const override { return rho_plus_ - rho(x); }
    double gap_minus(double x) const override { return rho(x) - rho_minus_; }
    std::vector<double> kinks() const override { return x_; }

private:
    std::vector<double> x_;
    double lo_, hi_, rho_minus_, rho_plus_;
    boost::math::interpolators::cubic_hermite<std::vector<double>> spline_;
};

void check_limits(double rho_minus, double rho_plus) {
    if (!(rho_minus > 0.0)) throw DomainError("profile.rho_minus must be positive");
    if (!(rho_minus < rho_plus)) throw DomainError("profile requires rho_minus < rho_plus");
}

double golden_max(const auto& f, double a, double b) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Grid maximum refined by golden section; returns (argmax, max).
std::pair<double, double> grid_golden_max(const auto& f, double lo, double hi, int n) {
    const double dx = (hi - lo) / (n - 1);
    int best = 0;
    double fbest = f(lo);
    for (int i = 1; i < n; ++i) {
        const double v = f(lo + i * dx);
        if (v > fbest) {
            fbest = v;
            best = i;
        }
    }
    const double a = lo + std::max(0, best - 1) * dx;
    const double b = lo + std::min(n - 1, best + 1) * dx;
    const double xs = golden_max(f, a, b);
    const double fs = f(xs);
    if (fs >= fbest) return {xs, fs};
    return {lo + best * dx, fbest};
}

}  // namespace

DensityProfile make_tanh(const TanhParams& p) {
    check_limits(p.rho_minus, p.rho_plus);
    if (!(p.ell > 0.0)) throw DomainError("profile.ell must be positive");
    DensityProfile::Info info;
    info.kind = ProfileKind::StrictlyIncreasing;
    info.family = "tanh";
    info.rho_minus = p.rho_minus;
    info.rho_plus = p.rho_plus;
    info.center = 0.0;
    info.scale = p.ell;
    info.support_lo = -std::numeric_limits<double>::infinity();
    info.support_hi = std::numeric_limits<double>::infinity();
    return DensityProfile(std::make_shared<TanhModel>(p), info);
}

DensityProfile make_bump(const BumpParams& p) {
    check_limits(p.rho_minus, p.rho_plus);
    if (!(p.a > 0.0)) throw DomainError("profile.a must be positive");
    DensityProfile::Info info;
    info.kind = ProfileKind::CompactGradient;
    info.family = "bump";
    info.rho_minus = p.rho_minus;
    info.rho_plus = p.rho_plus;
    info.support_lo = -p.a;
    info.support_hi = p.a;
    info.center = 0.0;
    info.scale = p.a;
    return DensityProfile(std::make_shared<BumpModel>(p), info);
}

DensityProfile make_tabulated(const TabulatedParams& p) {
    if (p.x.size() != p.rho.size()) throw DomainError("tabulated profile: x and rho differ in length");
    if (p.x.size() < 2) throw DomainError("tabulated profile needs at least two samples");
    for (std::size_t i = 1; i < p.x.size(); ++i) {
        if (!(p.x[i] > p.x[i - 1]))
            throw DomainError("tabulated profile: abscissas not increasing at index " + std::to_string(i),
                              "non_monotone");
        if (p.rho[i] < p.rho[i - 1])
            throw DomainError("tabulated profile: non-monotone density at index " + std::to_string(i),
                              "non_monotone");
    }
    check_limits(p.rho.front(), p.rho.back());
    DensityProfile::Info info;
    info.kind = p.kind;
    info.family = "tabulated";
    info.rho_minus = p.rho.front();
    info.rho_plus = p.rho.back();
    info.support_lo = p.x.front();
    info.support_hi = p.x.back();
    info.scale = 0.5 * (p.x.back() - p.x.front());
    auto model = std::make_shared<TabulatedModel>(p);
    const auto [xc, fc] = grid_golden_max([&](double x) { return model->drho(x); }, p.x.front(), p.x.back(), 4096);
    (void)fc;
    info.center = xc;
    return DensityProfile(model, info);
}

DensityProfile make_profile(const ProfileSpec& spec) {
    return std::visit(
        [](const auto& p) -> DensityProfile {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TanhParams>) return make_tanh(p);
            else if constexpr (std::is_same_v<T, BumpParams>) return make_bump(p);
            else return make_tabulated(p);
        },
        spec);
}

TabulatedParams read_tabulated_csv(const std::string& path, ProfileKind kind) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open tabulated profile file " + path);
    TabulatedParams p;
    p.kind = kind;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x, r;
        if (!(ss >> x >> r)) {
            if (p.x.empty()) continue;  // header
            throw ConfigError("malformed line in " + path + ": " + line);
        }
        p.x.push_back(x);
        p.rho.push_back(r);
    }
    return p;
}

ProfileBounds profile_bounds(const DensityProfile& profile, const PhysicalParams& params) {
    const auto [lo, hi] = profile.effective_range(1e-8);
    const auto ratio = [&](double x) { return profile.drho(x) / profile.rho(x); };
    const auto [xr, sup_ratio] = grid_golden_max(ratio, lo, hi, 4096);
    const auto [xm, sup_drho] = grid_golden_max([&](double x) { return profile.drho(x); }, lo, hi, 4096);
    (void)xm;
    ProfileBounds b;
    b.L0 = 1.0 / sup_ratio;
    b.rho_m = sup_drho;
    b.lambda_max = std::sqrt(params.g * sup_ratio);
    b.argmax_ratio = xr;
    return b;
}

ValidationReport validate(const DensityProfile& profile, int n_samples) {
    ValidationReport rep;
    const auto [lo, hi] = profile.effective_range(1e-8);
    const double w = hi - lo;
    const double xa = lo - 0.25 * w, xb = hi + 0.25 * w;
    const double rm = profile.rho_minus(), rp = profile.rho_plus();
    const auto kinks = profile.kinks();
    double rho_m = 0.0;
    for (int i = 0; i < n_samples; ++i) rho_m = std::max(rho_m, profile.drho(xa + (xb - xa) * i / (n_samples - 1)));
    rep.min_drho = std::numeric_limits<double>::infinity();
    auto fail = [&](const std::string& msg) {
        if (rep.failures.size() < 8) rep.failures.push_back(msg);
        rep.pass = false;
    };
    for (int i = 0; i < n_samples; ++i) {
        const double x = xa + (xb - xa) * i / (n_samples - 1);
        const double r = profile.rho(x), d = profile.drho(x);
        rep.min_drho = std::min(rep.min_drho, d);
        const double viol = std::max({rm - r, r - rp, 0.0});
        rep.worst_range_violation = std::max(rep.worst_range_violation, viol);
        if (viol > 1e-12 * rp || !(r > 0.0)) fail("rho outside [rho_minus, rho_plus] at x=" + std::to_string(x));
        if (d < 0.0) fail("negative rho0' at x=" + std::to_string(x));
        const bool outside = x <= profile.support_lo() || x >= profile.support_hi();
        if (profile.kind() == ProfileKind::StrictlyIncreasing && !(d > 0.0))
            fail("rho0' not strictly positive at x=" + std::to_string(x));
        if (profile.compact() && outside) {
            if (d != 0.0) fail("rho0' nonzero outside the support at x=" + std::to_string(x));
            const double lim = x <= profile.support_lo() ? rm : rp;
            if (std::abs(r - lim) > 1e-12 * rp) fail("rho not at its limit outside the support");
        }
        const double h = 1e-4 * std::max(1.0, std::abs(x));
        bool near_kink = false;
        for (double kx : kinks) near_kink = near_kink || std::abs(x - kx) < 2.0 * h;
        if (near_kink) continue;
        const double fd = (profile.rho(x + h) - profile.rho(x - h)) / (2.0 * h);
        const double err = std::abs(d - fd) / std::max(std::abs(d), rho_m);
        if (err > rep.worst_fd_error) {
            rep.worst_fd_error = err;
            rep.worst_fd_x = x;
        }
    }
    if (rep.worst_fd_error > 1e-6) fail("finite-difference mismatch of rho0' at x=" + std::to_string(rep.worst_fd_x));
    return rep;
}

}  // namespace rtv
