#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace kinkflux {

/// Row-major dense matrix of doubles; small helper for sample batches and tables.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

enum class CovarianceSource { analytic, quadrature, empirical };
std::string to_string(CovarianceSource s);

/// Symmetric covariance matrix over an ordered time grid.
struct CovarianceTable {
    std::vector<double> times;
    Matrix values;
    Matrix standard_errors;  ///< empty unless source == empirical
    CovarianceSource source = CovarianceSource::analytic;
};

/// Empirical covariance of zero-mean samples (rows = paths, cols = times).
///
/// The processes here are centred by construction, so the estimator uses the known
/// zero mean: C_ij = (1/n) sum_p X_pi X_pj. The standard error of a product mean of
/// jointly Gaussian variables is sqrt((C_ii C_jj + C_ij^2) / n).
CovarianceTable empirical_covariance(const Matrix& samples, const std::vector<double>& times);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Least squares in log-log coordinates.
LinearFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

/// y ~ amplitude x^exponent + log_coefficient ln x + constant.
struct DominantFit {
    double exponent = 0.0;
    double amplitude = 0.0;
    double log_coefficient = 0.0;
    double constant = 0.0;
    double rms_residual = 0.0;
};

/// Leading power in the presence of logarithmic and constant corrections: for each trial
/// exponent the other three coefficients are linear least squares; the exponent minimizes
/// the residual (Brent, on [lo, hi]).
DominantFit fit_dominant_power(const std::vector<double>& x, const std::vector<double>& y, double lo = 0.05,
                               double hi = 2.0);

std::vector<double> logspace(double lo, double hi, std::size_t n);

}  // namespace kinkflux
