#pragma once

#include "kinkflux/stats.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kinkflux {

/// Strictly increasing positive evaluation times (t0 = 0 is implicit).
struct TimeGrid {
    std::vector<double> times;

    void validate() const;
    std::size_t size() const noexcept { return times.size(); }
    /// Index of t in the grid, or npos.
    std::size_t find(double t, double tol = 1e-12) const noexcept;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

enum class Representation { fbm_odd, heat, volterra, cholesky_reference, h2_lattice };
std::string to_string(Representation r);

/// Sample matrix with column 0 at t = 0 (identically zero) followed by the grid times.
struct GaussianPathBatch {
    std::vector<double> times;  ///< 0, t_1, ..., t_n
    Matrix samples;             ///< paths x (n + 1)
    Representation representation = Representation::cholesky_reference;
    std::uint64_t seed = 0;
    /// Exact covariance of the discrete scheme on the grid times (n x n).
    Matrix scheme_covariance;

    std::size_t paths() const noexcept { return samples.rows; }
    /// Drop the t = 0 column.
    Matrix positive_samples() const;
    std::vector<double> positive_times() const;
};

/// sqrt(t + s) - sqrt(|t - s|).
double cov_r(double t, double s);
Matrix cov_r_matrix(const std::vector<double>& times);

/// 1/2 (|t|^{2H} + |s|^{2H} - |t - s|^{2H}).
double fbm_cov(double t, double s, double hurst);

struct SamplerOptions {
    std::size_t threads = 1;
};

/// Two-sided fBM on arbitrary (distinct, nonzero) times by dense Cholesky.
Matrix sample_fbm(const std::vector<double>& times, std::size_t paths, std::uint64_t seed, double hurst,
                  const SamplerOptions& opts = {});

/// r = 2 * odd part of the two-sided fBM with Hurst 1/4, sampled jointly on +-grid.
GaussianPathBatch sample_fbm_odd(const TimeGrid& grid, std::size_t paths, std::uint64_t seed,
                                 const SamplerOptions& opts = {});

/// Reference sampler: Cholesky of cov_r itself.
GaussianPathBatch sample_cholesky_reference(const TimeGrid& grid, std::size_t paths, std::uint64_t seed,
                                            const SamplerOptions& opts = {});

struct HeatTorusConfig {
    double half_length = 0.0;  ///< 0: use 8 sqrt(max t)
    /// Cosine modes carried explicitly; modes decorrelated between grid times to double
    /// precision are lumped into one independent normal per time.
    std::size_t max_modes = 4096;
};

/// (2 pi)^{1/4} h(0, t) for d_t h = h_xx / 2 + W on a torus, exact per-mode OU updates.
GaussianPathBatch sample_heat_origin(const TimeGrid& grid, std::size_t paths, std::uint64_t seed,
                                     const HeatTorusConfig& torus = {}, const SamplerOptions& opts = {});

/// Exact covariance of (2 pi)^{1/4} h(0, .) for the torus scheme.
Matrix heat_scheme_covariance(const std::vector<double>& times, const HeatTorusConfig& torus);

/// c^2 = 2 / B(3/4, 3/4).
double volterra_c2();

/// Product-integration sub-grid and weights W(t_i, j) ~ int_{u_j}^{u_{j+1}} k(t_i, u) du.
///
/// The sub-grid is uniform (per_unit points per unit time) and graded geometrically toward
/// u = 0 and toward every grid time, where the kernel has its endpoint singularities.
struct VolterraScheme {
    std::vector<double> nodes;  ///< u_0 = 0 < u_1 < ... < u_M = max t
    Matrix weights;             ///< times x M
};
VolterraScheme volterra_scheme(const std::vector<double>& times, std::size_t per_unit);

/// r(t) = c int_0^t u^{1/4} (t^2 - u^2)^{-1/4} db(u), one Brownian path per sample.
GaussianPathBatch sample_volterra(const TimeGrid& grid, std::size_t paths, std::uint64_t seed,
                                  std::size_t per_unit = 1024, const SamplerOptions& opts = {});

/// c^2 int_0^{t'} u^{1/2} (t^2 - u^2)^{-1/4} (t'^2 - u^2)^{-1/4} du by tanh-sinh.
double volterra_kernel_covariance(double t, double tprime);

struct BetaIdentityResult {
    double lhs = 0.0;  ///< (t + t')^rho - (t - t')^rho
    double rhs = 0.0;  ///< integral (rho = 1/2) or hypergeometric route
    double residual = 0.0;
    std::string route;
};
BetaIdentityResult beta_identity_check(double t, double tprime, double rho);

/// 2F1(a, b; c; z) by its power series (|z| < 1) or Gauss's sum at z = 1.
double hypergeometric_2f1(double a, double b, double c, double z);

struct CovarianceComparison {
    std::vector<double> times;
    Matrix empirical, standard_error, target, z;
    double max_abs_z = 0.0;
};
/// Entrywise z-scores of the empirical covariance against `target` (positive times only).
CovarianceComparison compare_covariance(const GaussianPathBatch& batch, const Matrix& target, double prefactor = 1.0);

struct SelfSimilarityRow {
    double t = 0.0, s = 0.0;
    double scaled = 0.0;     ///< empirical Cov(r(at), r(as))
    double reference = 0.0;  ///< sqrt(a) empirical Cov(r(t), r(s))
    double z = 0.0;
};
struct SelfSimilarityReport {
    double a = 1.0;
    std::vector<SelfSimilarityRow> rows;
    double max_abs_z = 0.0;
};
/// Pairs (t, s) with t, s, a t, a s all on the grid; z from per-path differences.
SelfSimilarityReport self_similarity_check(const GaussianPathBatch& batch, double a);

struct RatioEstimate {
    double value = 0.0;
    double standard_error = 0.0;
};
/// Var r(t_num) / Var r(t_den) with a delta-method standard error.
RatioEstimate variance_ratio(const GaussianPathBatch& batch, double t_num, double t_den);

/// Mean of (r(t2) - r(t1)) (r(t4) - r(t3)) with its standard error.
RatioEstimate increment_covariance(const GaussianPathBatch& batch, double t1, double t2, double t3, double t4);

}  // namespace kinkflux
