#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cstddef>

namespace kinkflux::quad {

/// Composite 20-point Gauss-Legendre rule on `panels` equal panels of [a, b].
template <class F>
double panels(F&& f, double a, double b, std::size_t panels) {
    using rule = boost::math::quadrature::gauss<double, 20>;
    const double h = (b - a) / static_cast<double>(panels);
    double sum = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + h * static_cast<double>(p);
        sum += rule::integrate(f, lo, lo + h);
    }
    return sum;
}

/// Adaptive 61-point Gauss-Kronrod; `error` receives the Kronrod estimate.
template <class F>
double adaptive(F&& f, double a, double b, double rel_tol, double* error = nullptr, unsigned max_depth = 15) {
    using rule = boost::math::quadrature::gauss_kronrod<double, 61>;
    double err = 0.0;
    const double v = rule::integrate(f, a, b, max_depth, rel_tol, &err);
    if (error) *error = err;
    return v;
}

}  // namespace kinkflux::quad
