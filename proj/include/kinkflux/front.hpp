#pragma once

#include "kinkflux/grid.hpp"

#include <string>

namespace kinkflux {

enum class CenterMethod { newton, bisection };
std::string to_string(CenterMethod m);

struct CenterResult {
    double center = 0.0;
    double residual = 0.0;           ///< <u - m_c, m'_c> at the root
    double manifold_distance = 0.0;  ///< inf_c sup|u - m_c|
    CenterMethod method = CenterMethod::newton;
    int iterations = 0;
};

struct CenterOptions {
    double delta0 = 0.2;       ///< tube radius
    double tolerance = 1e-10;  ///< on |residual|
    double edge_tolerance = 0.05;
    bool check_tube = true;
};

/// R(c) = <u - tanh(. - c), sech^2(. - c)> by the periodic trapezoid rule.
///
/// Nodes with sech^2 < 1e-14 (|x - c| > 17) are skipped. R is increasing in c near
/// the root for profiles in the tube.
double center_residual(const GridProfile& u, double c);
double center_residual_derivative(const GridProfile& u, double c);

/// Root of R: Newton from the steepest point of u, bisection on a width-4 bracket as fallback.
CenterResult center(const GridProfile& u, const CenterOptions& opts = {});

/// First- or second-order expansion of the center about 0:
/// -3/4 A (order 1), -3/4 A - 9/16 A B (order 2), A = <u - m, m'>, B = <u - m, m''>.
double center_approx(const GridProfile& u, int order, const CenterOptions& opts = {});

/// sup|u - m_c| at one translate.
double sup_distance(const GridProfile& u, double c);

/// inf_c sup|u - m_c| by golden-section search on [seed - 1, seed + 1].
double manifold_distance(const GridProfile& u, double seed);
/// Seeded at the steepest point of u (or 0 when u is flat).
double manifold_distance(const GridProfile& u);

/// Shift a profile by h (spectral interpolation of u - m, kink translated exactly).
GridProfile shift_profile(const GridProfile& u, double h);

}  // namespace kinkflux
