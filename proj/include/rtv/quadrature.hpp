#pragma once

#include <array>
#include <cstddef>

#include <boost/math/quadrature/gauss.hpp>

namespace rtv {

/// Gauss-Legendre rule on [-1, 1] with N points, nodes ascending.
template <std::size_t N>
struct GaussRule {
    std::array<double, N> x{};
    std::array<double, N> w{};

    GaussRule() {
        using G = boost::math::quadrature::gauss<double, N>;
        const auto& a = G::abscissa();
        const auto& wt = G::weights();
        const std::size_t h = N / 2;
        for (std::size_t i = 0; i < a.size(); ++i) {
            // abscissa() lists the non-negative nodes, the centre first when N is odd
            const std::size_t hi = h + i;
            const std::size_t lo = (N % 2 == 1) ? h - i : h - 1 - i;
            x[hi] = a[i];
            w[hi] = wt[i];
            x[lo] = -a[i];
            w[lo] = wt[i];
        }
    }

    static const GaussRule& get() {
        static const GaussRule rule;
        return rule;
    }
};

/// Integrates f over [a, b] with an N-point Gauss-Legendre rule.
template <std::size_t N, class F>
double gauss_integrate(F&& f, double a, double b) {
    const auto& r = GaussRule<N>::get();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += r.w[i] * f(c + h * r.x[i]);
    return s * h;
}

}  // namespace rtv
