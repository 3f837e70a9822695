#pragma once

#include "kinkflux/grid.hpp"
#include "kinkflux/kernels.hpp"
#include "kinkflux/limit.hpp"
#include "kinkflux/spde.hpp"
#include "kinkflux/stats.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kinkflux {

/// Two space-time points and the noise cutoff.
struct CovQuery {
    double x = 0.0, t = 0.0, xp = 0.0, tp = 0.0;
    CutoffFunction cutoff = CutoffFunction::identity();

    void validate() const;
};

/// E[Y(x,t) Y(x',t')] = int_0^{t^t'} ds int dy d_yG(x,y,t-s) d_yG(x',y,t'-s) a(y)^2.
///
/// Nested adaptive Gauss-Kronrod with the outer variable s -> w = (t^t' - s)^{1/4},
/// which removes the s^{-3/4} endpoint singularity. Throws PrecisionError when the
/// outer error estimate exceeds rel_tol.
double cov_Y(const CovQuery& q, double rel_tol = 1e-5);

/// E[(Y(x+h,t) - Y(x,t))^2] from the difference integrand.
double y_spatial_increment(double x, double h, double t, const CutoffFunction& a = CutoffFunction::identity(),
                           double rel_tol = 1e-6);
/// E[(Y(x,t+h) - Y(x,t))^2] from the difference integrand.
double y_temporal_increment(double x, double t, double h, const CutoffFunction& a = CutoffFunction::identity(),
                            double rel_tol = 1e-6);

/// 4 ||phi'||^2 = Gamma(3/4) / pi, so E Y(x,t)^2 = (Gamma(3/4)/pi) t^{1/4} when a == 1.
double y_variance_coefficient();

enum class KernelSource { explicit_longtime, numerical_k };
std::string to_string(KernelSource s);

struct CovHOptions {
    KernelSource source = KernelSource::explicit_longtime;
    double t0 = 1.0;          ///< lower time cut of the long-time route
    double rel_tol = 1e-5;    ///< long-time route
    double numerical_tol = 1e-3;
    double numerical_dx = 0.025;
    double numerical_dt = 0.01;
    double numerical_max_t = 50.0;
    /// Long-time route only: drop the -m'(x) h2 term of d_xK*, leaving the H1 covariance.
    bool drop_h2_term = false;
};

/// E[H(x,t) H(x',t')] with d_xK from the chosen source.
///
/// explicit_longtime integrates d_xK* over elapsed times tau >= t0 only; numerical_k uses
/// the ETDRK4 semigroup for tau above 10 dx^4 and the constant-coefficient kernel below.
double cov_H(const CovQuery& q, const CovHOptions& opts = {});

struct StitchedCovH {
    double value = 0.0;
    std::string source;
    double numerical = 0.0;  ///< NaN when out of range
    double longtime = 0.0;   ///< NaN when t^t' < stitch_low
    double relative_gap = 0.0;
    bool overlap = false;
};
/// numerical-K up to 50, K* from 10; on the overlap both are computed and compared.
StitchedCovH cov_H_stitched(const CovQuery& q, const CovHOptions& opts = {}, double stitch_low = 10.0,
                            double stitch_high = 50.0);

/// (8 pi)^{-1/2} (sqrt(t + t') - sqrt|t - t'|).
double h2_covariance(double t, double tp);

struct H2LatticeOptions {
    double cells_per_root = 8.0;  ///< dy = sqrt(t_min) / cells_per_root
    double box_roots = 12.0;      ///< box half-width = box_roots sqrt(t_max)
    std::size_t threads = 1;
};

struct H2Batch {
    GaussianPathBatch batch;    ///< column 0 is t = 0
    Matrix lattice_covariance;  ///< exact covariance of the lattice scheme (a == 1), n x n
    double max_lattice_deviation = 0.0;
    bool under_resolved = false;
    double dy = 0.0, half_width = 0.0;
};

/// h2(t) = 1/2 int_0^t int e^{-y^2/8(t-s)} / sqrt(2 pi (t-s)) sgn(y) a(y) dW(y,s).
///
/// Realized as z(0,t) for dz = 2 z_yy dt + sgn(y) a(y) dW on a periodic lattice (the heat
/// kernel with variance 4 tau is exactly the integrand). Time steps run between grid
/// times with the exact per-mode OU variance, so the time lattice adds no bias.
H2Batch sample_h2(const TimeGrid& grid, std::size_t paths, std::uint64_t seed,
                  const CutoffFunction& cutoff = CutoffFunction::identity(), const H2LatticeOptions& opts = {});

struct AsymptoticResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;  ///< |lhs - rhs| / |rhs| (absolute when rhs == 0)
};
/// lhs = eps^{gamma/2} cov_H(x, eps^-gamma t, x', eps^-gamma t'),
/// rhs = m'(x) m'(x') / (2 sqrt(2 pi)) (sqrt(t + t') - sqrt(t - t')).
AsymptoticResult asymptotic_check(double x, double xp, double t, double tp, double epsilon, double gamma,
                                  const CovHOptions& opts = {});

/// Replayed driving term Y on the stepper lattice: Y_{n+1} = E (Y_n + f_n), spectral.
struct YPath {
    PeriodicGrid grid;
    double dt = 0.0;
    std::vector<std::vector<std::complex<double>>> spectra;  ///< n = 0..M

    std::size_t steps() const noexcept { return spectra.empty() ? 0 : spectra.size() - 1; }
    GridProfile at(std::size_t n) const;
};
/// Y without the sqrt(eps) factor, from logged draws.
YPath replay_y(const SimulationConfig& cfg, const std::vector<NoiseIncrement>& forcing);

struct HFromYOptions {
    double tolerance = 1e-12;
    int max_iterations = 100;
    double window = 0.25;  ///< iterate on successive time windows of this length
};
struct HFromYResult {
    std::vector<GridProfile> path;  ///< H at n = 0..M
    std::vector<double> distances;
    int iterations = 0;
    double identity_residual = 0.0;  ///< sup |H - Y - G(V''(m) H)| re-evaluated at the fixed point
};
/// Solves H = Y + G(V''(m) H) by Picard iteration with the free-kernel operator G.
HFromYResult h_from_y(const YPath& y, const HFromYOptions& opts = {});

/// H built directly: the linearized stepper driven by the same draws (no sqrt(eps)).
std::vector<GridProfile> direct_h(const SimulationConfig& cfg, const std::vector<NoiseIncrement>& forcing);

/// Matched finite-eps prediction Var zeta(t) ~ (9/16) eps int_0^t dtau int psi(y,tau)^2 a(y)^2 dy,
/// psi(., tau) = e^{-tau d L d} m''; evaluated on the simulation grid at every requested time.
std::vector<double> matched_center_variance(const SimulationConfig& cfg, const std::vector<double>& times,
                                            double dt = 0.02);

}  // namespace kinkflux
