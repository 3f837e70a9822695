#include "kinkflux/stats.hpp"

#include "kinkflux/error.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include <cmath>

namespace kinkflux {

std::string to_string(CovarianceSource s) {
    switch (s) {
        case CovarianceSource::analytic: return "analytic";
        case CovarianceSource::quadrature: return "quadrature";
        case CovarianceSource::empirical: return "empirical";
    }
    return "unknown";
}

CovarianceTable empirical_covariance(const Matrix& samples, const std::vector<double>& times) {
    if (samples.cols != times.size()) throw ArgumentError("empirical_covariance: column/time mismatch");
    const std::size_t n = samples.rows;
    const std::size_t m = samples.cols;
    CovarianceTable table;
    table.times = times;
    table.source = CovarianceSource::empirical;
    table.values = Matrix(m, m);
    table.standard_errors = Matrix(m, m);
    if (n == 0) return table;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t i = 0; i < m; ++i) {
            const double xi = samples(p, i);
            for (std::size_t j = i; j < m; ++j) table.values(i, j) += xi * samples(p, j);
        }
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            table.values(i, j) *= inv;
            table.values(j, i) = table.values(i, j);
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double cij = table.values(i, j);
            table.standard_errors(i, j) = std::sqrt((table.values(i, i) * table.values(j, j) + cij * cij) * inv);
        }
    }
    return table;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ArgumentError("fit_line: need >= 2 matched points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0) throw ArgumentError("fit_line: degenerate abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        sse += r * r;
    }
    f.r_squared = syy > 0 ? 1.0 - sse / syy : 1.0;
    f.slope_se = x.size() > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
    return f;
}

DominantFit fit_dominant_power(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi) {
    if (x.size() != y.size() || x.size() < 5) throw ArgumentError("fit_dominant_power: need >= 5 matched points");
    for (double v : x)
        if (!(v > 0.0)) throw DomainError("fit_dominant_power: abscissae must be positive");
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) rhs[i] = y[static_cast<std::size_t>(i)];
    auto solve = [&](double p, Eigen::Vector3d& c) {
        Eigen::MatrixXd a(n, 3);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double xi = x[static_cast<std::size_t>(i)];
            a(i, 0) = std::pow(xi, p);
            a(i, 1) = std::log(xi);
            a(i, 2) = 1.0;
        }
        c = a.colPivHouseholderQr().solve(rhs);
        return (a * c - rhs).squaredNorm();
    };
    Eigen::Vector3d c;
    const auto best = boost::math::tools::brent_find_minima([&](double p) { return solve(p, c); }, lo, hi, 40);
    DominantFit f;
    f.exponent = best.first;
    solve(f.exponent, c);
    f.amplitude = c[0];
    f.log_coefficient = c[1];
    f.constant = c[2];
    f.rms_residual = std::sqrt(best.second / static_cast<double>(n));
    return f;
}

LinearFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw ArgumentError("fit_power_law: non-positive data");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_line(lx, ly);
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    return v;
}

}  // namespace kinkflux
