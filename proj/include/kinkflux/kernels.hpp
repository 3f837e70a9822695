#pragma once

#include "kinkflux/grid.hpp"

#include <array>
#include <complex>
#include <map>
#include <span>
#include <vector>

namespace kinkflux {

/// The kink tanh(x - center) and its derivatives.
struct FrontProfile {
    double center = 0.0;

    double value(double x) const noexcept;
    double d1(double x) const noexcept;
    double d2(double x) const noexcept;
    double d3(double x) const noexcept;
    /// V''(m) = 3m^2 - 1 evaluated on the profile.
    double potential_curvature(double x) const noexcept;

    GridProfile sample(const PeriodicGrid& g) const;
    GridProfile sample_d1(const PeriodicGrid& g) const;
    GridProfile sample_d2(const PeriodicGrid& g) const;

    /// <m', m'> = int sech^4 = 4/3.
    static constexpr double translation_norm2 = 4.0 / 3.0;
};

/// 1 - tanh|x|: even, equal to 1 at the origin.
double varphi(double x) noexcept;

/// sign with sign(0) = 0.
inline double sgn(double x) noexcept { return (x > 0.0) - (x < 0.0); }

/// Mollifier bump a(x) = exp(1 - 1/(1 - x^2)) on (-1, 1), zero outside.
double bump(double x) noexcept;

/// Noise cutoff a_eps(x) = a(x eps^beta).
///
/// `support_override > 0` replaces the half-width eps^-beta (desk-scale clamp to the
/// simulation box); `unit` gives a == 1.
struct CutoffFunction {
    double epsilon = 0.1;
    double beta = 2.5;
    double support_override = 0.0;
    bool unit = false;

    static CutoffFunction identity() { return CutoffFunction{0.1, 2.5, 0.0, true}; }
    static CutoffFunction clamped(double epsilon, double beta, double half_width) {
        return CutoffFunction{epsilon, beta, half_width, false};
    }

    double support() const noexcept;
    double operator()(double x) const noexcept;
    void validate() const;
};

double cutoff_eval(double x, double epsilon, double beta);

struct PhiValue {
    double value = 0.0;
    bool extrapolated = false;
};

/// Tabulated phi(x) = (1/2pi) int exp(-w^4/2) exp(iwx) dw and derivatives.
///
/// Built once from Gauss-Legendre panels on w in [-8, 8] at spacing 0.01 on |x| <= 30;
/// evaluation is cubic Hermite between nodes, using the next derivative's table as slope.
class PhiTable {
public:
    static constexpr int max_order = 3;
    static constexpr double range = 30.0;
    static constexpr double spacing = 0.01;

    static const PhiTable& instance();

    PhiValue eval(double x, int k) const;
    double operator()(double x, int k = 0) const { return eval(x, k).value; }
    /// c(lambda, k) with |phi^(k)(x)| <= c e^{-lambda |x|} on the table, lambda in {1, 2}.
    double envelope(int lambda, int k) const;
    /// Nodes x_j = j * spacing, j = 0..n-1 (non-negative half; parity gives the rest).
    std::span<const double> half_table(int k) const;
    /// Largest |imaginary part| seen while building the table.
    double max_imaginary() const noexcept { return max_imag_; }

private:
    PhiTable();

    std::size_t nodes_ = 0;
    std::array<std::vector<double>, max_order + 2> values_;
    std::array<std::array<double, 2>, max_order + 1> envelope_{};
    double max_imag_ = 0.0;
};

/// phi^(k)(x), k in {0, 1, 2}.
double phi_eval(double x, int k);
/// Direct quadrature of the Fourier integral at one point (no table), any k in 0..4.
double phi_direct(double x, int k);

/// G(x, y, t) = t^{-1/4} phi((x - y) t^{-1/4}); `dx_order` differentiates in x.
double green_G(double x, double y, double t, int dx_order = 0);

/// d_x^i d_y^j K_inf(z, t) with multiplier (iw)^i (-iw)^j exp(-t(w^4/2 + 2w^2)).
double kinf_eval(double z, double t, int i = 0, int j = 0);

/// Explicit long-time kernel K* and its derivatives (i, j in {0, 1}).
double kstar_eval(double x, double y, double t, int i = 0, int j = 0);

/// Green function of  d_t w = -d_x L d_x w,  L = (1/2)d_x^2 - V''(m),  on a periodic grid.
///
/// The linear part -(w^4/2 + 2w^2) is integrated exactly (ETDRK4 with contour-integral
/// coefficients); the bounded remainder -d_x(3 sech^2 d_x w) is explicit. An instance
/// owns FFT scratch buffers and is not shareable between threads.
class LinearizedSemigroup {
public:
    using Spectrum = std::vector<std::complex<double>>;

    explicit LinearizedSemigroup(PeriodicGrid grid, double dt = 0.005);

    const PeriodicGrid& grid() const noexcept { return grid_; }
    double dt() const noexcept { return dt_; }

    /// Spectrum of the band-limited delta at y (derivative = 1: of -d/dz delta(z - y)).
    Spectrum delta_spectrum(double y, int derivative = 0) const;
    /// Advance `w` by `duration` (whole steps, then one shorter step if needed).
    void evolve(Spectrum& w, double duration);
    /// Apply the explicit remainder -d_x(3 sech^2 d_x w) in spectral space.
    void remainder(const Spectrum& w, Spectrum& out);
    GridProfile to_profile(const Spectrum& w);

    /// x -> K(x, y, t); with derivative = 1, x -> d_y K(x, y, t).
    GridProfile column(double y, double t, int derivative = 0);

    /// Check grid resolution and box size for a column at y up to time t.
    static void validate(const PeriodicGrid& grid, double y, double t);

private:
    struct Coefficients {
        std::vector<double> e, e2, q, f1, f2, f3;
    };
    const Coefficients& coefficients(double h);
    void step(Spectrum& w, const Coefficients& c);

    PeriodicGrid grid_;
    double dt_;
    std::vector<double> omega_;
    std::vector<double> lambda_;
    std::vector<double> well_;  // 3 sech^2 on the grid
    std::map<double, Coefficients> cache_;
    RealFft fft_;
    std::vector<double> real_;
    Spectrum s0_, s1_, s2_, s3_, na_, nb_, nc_, nv_, tmp_;
};

/// Convenience wrapper: one column of K at (y, t) on `grid`.
GridProfile semigroup_K(double y, double t, const PeriodicGrid& grid);

/// Per-mode ETD weights phi_1(-lambda h) h etc. evaluated by a contour mean (stable near 0).
struct EtdWeights {
    double e = 1.0;   // exp(-lambda h)
    double p1 = 0.0;  // int_0^h exp(-lambda s) ds
    double p2 = 0.0;  // int_0^h exp(-lambda (h - s)) s / h ds
};
EtdWeights etd_weights(double lambda, double h);

}  // namespace kinkflux
