#include "kinkflux/front.hpp"

#include "kinkflux/error.hpp"
#include "kinkflux/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace kinkflux {

namespace {

constexpr double far_field = 17.0;

double sech2(double z) {
    const double c = std::cosh(z);
    return 1.0 / (c * c);
}

// Calls f(i, x_i - c) for nodes with |x - c| <= far_field.
template <class F>
void near_nodes(const GridProfile& u, double c, F&& f) {
    const auto& g = u.grid;
    const double dx = g.dx();
    const double lo = std::max(-g.half_length, c - far_field);
    const double hi = std::min(g.half_length - dx, c + far_field);
    if (lo > hi) return;
    auto i0 = static_cast<std::size_t>(std::max(0.0, std::floor((lo + g.half_length) / dx)));
    auto i1 = std::min(g.points - 1, static_cast<std::size_t>(std::ceil((hi + g.half_length) / dx)));
    for (std::size_t i = i0; i <= i1; ++i) f(i, g.x(i) - c);
}

double steepest_point(const GridProfile& u) {
    const auto& g = u.grid;
    const std::size_t n = g.points;
    double best = 0.0;
    std::size_t arg = n;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double d = std::abs(u.values[i + 1] - u.values[i - 1]);
        if (d > best) {
            best = d;
            arg = i;
        }
    }
    return arg == n ? 0.0 : g.x(arg);
}

void check_edges(const GridProfile& u, double tol) {
    if (u.values.empty()) throw NotNearFrontError("center: empty profile");
    const double left = u.values.front(), right = u.values.back();
    if (std::abs(left + 1.0) > tol || std::abs(right - 1.0) > tol)
        throw NotNearFrontError("center: profile does not reach -1/+1 at the domain edges");
}

}  // namespace

std::string to_string(CenterMethod m) { return m == CenterMethod::newton ? "newton" : "bisection"; }

double center_residual(const GridProfile& u, double c) {
    double s = 0.0;
    near_nodes(u, c, [&](std::size_t i, double z) { s += (u.values[i] - std::tanh(z)) * sech2(z); });
    return s * u.grid.dx();
}

double center_residual_derivative(const GridProfile& u, double c) {
    double s = 0.0;
    near_nodes(u, c, [&](std::size_t i, double z) {
        const double q = sech2(z), t = std::tanh(z);
        s += q * q + 2.0 * (u.values[i] - t) * q * t;
    });
    return s * u.grid.dx();
}

double sup_distance(const GridProfile& u, double c) {
    double m = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) m = std::max(m, std::abs(u.values[i] - std::tanh(u.grid.x(i) - c)));
    return m;
}

double manifold_distance(const GridProfile& u, double seed) {
    constexpr double ratio = 0.6180339887498949;
    double a = seed - 1.0, b = seed + 1.0;
    double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
    double f1 = sup_distance(u, x1), f2 = sup_distance(u, x2);
    while (b - a > 1e-10) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = sup_distance(u, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = sup_distance(u, x2);
        }
    }
    return std::min({f1, f2, sup_distance(u, seed)});
}

double manifold_distance(const GridProfile& u) { return manifold_distance(u, steepest_point(u)); }

CenterResult center(const GridProfile& u, const CenterOptions& opts) {
    check_edges(u, opts.edge_tolerance);
    const double seed = steepest_point(u);
    CenterResult r;
    double c = seed;
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
        const double f = center_residual(u, c);
        r.iterations = it + 1;
        if (std::abs(f) <= opts.tolerance) {
            ok = true;
            break;
        }
        const double d = center_residual_derivative(u, c);
        if (!(d > 0.0)) break;
        c -= f / d;
        if (std::abs(c - seed) > 2.0) break;
    }
    if (ok) {
        r.method = CenterMethod::newton;
    } else {
        double lo = seed - 2.0, hi = seed + 2.0;
        double flo = center_residual(u, lo), fhi = center_residual(u, hi);
        if (flo * fhi > 0.0) throw NotNearFrontError("center: orthogonality residual has no sign change on the bracket");
        r.method = CenterMethod::bisection;
        for (int it = 0; it < 200; ++it) {
            c = 0.5 * (lo + hi);
            const double f = center_residual(u, c);
            r.iterations = it + 1;
            if (std::abs(f) <= opts.tolerance || hi - lo < 1e-15) break;
            if ((f < 0.0) == (flo < 0.0)) {
                lo = c;
                flo = f;
            } else {
                hi = c;
            }
        }
    }
    r.center = c;
    r.residual = center_residual(u, c);
    r.manifold_distance = manifold_distance(u, c);
    if (opts.check_tube && r.manifold_distance > opts.delta0) throw OutOfTubeError(r.manifold_distance, opts.delta0);
    return r;
}

double center_approx(const GridProfile& u, int order, const CenterOptions& opts) {
    if (order != 1 && order != 2) throw ArgumentError("center_approx: order must be 1 or 2");
    check_edges(u, opts.edge_tolerance);
    if (opts.check_tube) {
        const double d = manifold_distance(u);
        if (d > opts.delta0) throw OutOfTubeError(d, opts.delta0);
    }
    double a = 0.0, b = 0.0;
    near_nodes(u, 0.0, [&](std::size_t i, double z) {
        const double w = u.values[i] - std::tanh(z);
        const double q = sech2(z);
        a += w * q;
        b += w * (-2.0 * q * std::tanh(z));
    });
    a *= u.grid.dx();
    b *= u.grid.dx();
    const double first = -0.75 * a;
    return order == 1 ? first : first - 9.0 / 16.0 * a * b;
}

GridProfile shift_profile(const GridProfile& u, double h) {
    const auto& g = u.grid;
    RealFft fft(g.points);
    std::vector<double> w(g.points);
    for (std::size_t i = 0; i < g.points; ++i) w[i] = u.values[i] - std::tanh(g.x(i));
    std::vector<std::complex<double>> s(g.modes());
    fft.forward(w, s);
    for (std::size_t k = 0; k < s.size(); ++k) {
        s[k] *= std::polar(1.0, -g.wavenumber(k) * h);
        if (k == g.points / 2) s[k] = s[k].real();
    }
    fft.inverse(s, w);
    GridProfile out(g);
    for (std::size_t i = 0; i < g.points; ++i) out.values[i] = w[i] + std::tanh(g.x(i) - h);
    return out;
}

}  // namespace kinkflux
