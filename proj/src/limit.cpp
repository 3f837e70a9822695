#include "kinkflux/limit.hpp"

#include "kinkflux/error.hpp"
#include "kinkflux/parallel.hpp"
#include "kinkflux/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kinkflux {

namespace {

constexpr double pi = std::numbers::pi;

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& c, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success) throw GridError(std::string(what) + ": covariance is not positive definite");
    Eigen::MatrixXd l = llt.matrixL();
    for (Eigen::Index i = 0; i < l.rows(); ++i)
        if (!(l(i, i) > 1e-12 * std::sqrt(std::max(c(i, i), 1e-300))))
            throw GridError(std::string(what) + ": covariance is numerically singular (duplicate times?)");
    return l;
}

// Rows of x = L z with z standard normal, one split stream per path.
Matrix sample_gaussian(const Eigen::MatrixXd& l, std::size_t paths, std::uint64_t seed, std::size_t threads) {
    const std::size_t n = static_cast<std::size_t>(l.rows());
    Matrix out(paths, n);
    const RngStream root(seed);
    parallel_for(paths, threads, [&](std::size_t p) {
        RngStream rng = root.split(p);
        Eigen::VectorXd z(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = rng.normal();
        const Eigen::VectorXd x = l.triangularView<Eigen::Lower>() * z;
        for (std::size_t i = 0; i < n; ++i) out(p, i) = x[i];
    });
    return out;
}

GaussianPathBatch make_batch(const TimeGrid& grid, std::size_t paths, std::uint64_t seed, Representation rep) {
    GaussianPathBatch b;
    b.times.push_back(0.0);
    b.times.insert(b.times.end(), grid.times.begin(), grid.times.end());
    b.samples = Matrix(paths, grid.size() + 1);
    b.representation = rep;
    b.seed = seed;
    return b;
}

}  // namespace

void TimeGrid::validate() const {
    if (times.empty()) throw GridError("time grid is empty");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || !(times[i] > 0.0)) throw GridError("time grid entries must be positive");
        if (i > 0 && !(times[i] > times[i - 1])) throw GridError("time grid must be strictly increasing");
    }
}

std::size_t TimeGrid::find(double t, double tol) const noexcept {
    for (std::size_t i = 0; i < times.size(); ++i)
        if (std::abs(times[i] - t) <= tol * std::max(1.0, std::abs(t))) return i;
    return npos;
}

std::string to_string(Representation r) {
    switch (r) {
        case Representation::fbm_odd: return "fbm_odd";
        case Representation::heat: return "heat";
        case Representation::volterra: return "volterra";
        case Representation::cholesky_reference: return "cholesky_reference";
        case Representation::h2_lattice: return "h2_lattice";
    }
    return "unknown";
}

Matrix GaussianPathBatch::positive_samples() const {
    Matrix m(samples.rows, samples.cols - 1);
    for (std::size_t p = 0; p < samples.rows; ++p)
        for (std::size_t j = 1; j < samples.cols; ++j) m(p, j - 1) = samples(p, j);
    return m;
}

std::vector<double> GaussianPathBatch::positive_times() const { return {times.begin() + 1, times.end()}; }

double cov_r(double t, double s) {
    if (t < 0.0 || s < 0.0) throw DomainError("cov_r: times must be non-negative");
    return std::sqrt(t + s) - std::sqrt(std::abs(t - s));
}

Matrix cov_r_matrix(const std::vector<double>& times) {
    Matrix m(times.size(), times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t j = 0; j < times.size(); ++j) m(i, j) = cov_r(times[i], times[j]);
    return m;
}

double fbm_cov(double t, double s, double hurst) {
    const double e = 2.0 * hurst;
    return 0.5 * (std::pow(std::abs(t), e) + std::pow(std::abs(s), e) - std::pow(std::abs(t - s), e));
}

Matrix sample_fbm(const std::vector<double>& times, std::size_t paths, std::uint64_t seed, double hurst,
                  const SamplerOptions& opts) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw ArgumentError("sample_fbm: Hurst index must lie in (0,1)");
    const std::size_t n = times.size();
    Eigen::MatrixXd c(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) c(i, j) = fbm_cov(times[i], times[j], hurst);
    return sample_gaussian(cholesky_factor(c, "sample_fbm"), paths, seed, opts.threads);
}

GaussianPathBatch sample_fbm_odd(const TimeGrid& grid, std::size_t paths, std::uint64_t seed,
                                 const SamplerOptions& opts) {
    grid.validate();
    if (paths == 0) throw ArgumentError("sample_fbm_odd: paths must be >= 1");
    const std::size_t n = grid.size();
    std::vector<double> both(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        both[i] = grid.times[i];
        both[n + i] = -grid.times[i];
    }
    const Matrix nu = sample_fbm(both, paths, seed, 0.25, opts);
    auto b = make_batch(grid, paths, seed, Representation::fbm_odd);
    // r = 2 * (nu(t) - nu(-t)) / 2
    for (std::size_t p = 0; p < paths; ++p)
        for (std::size_t i = 0; i < n; ++i) b.samples(p, i + 1) = nu(p, i) - nu(p, n + i);
    b.scheme_covariance = cov_r_matrix(grid.times);
    return b;
}

GaussianPathBatch sample_cholesky_reference(const TimeGrid& grid, std::size_t paths, std::uint64_t seed,
                                            const SamplerOptions& opts) {
    grid.validate();
    const std::size_t n = grid.size();
    const Matrix c = cov_r_matrix(grid.times);
    Eigen::MatrixXd e(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) e(i, j) = c(i, j);
    const Matrix x = sample_gaussian(cholesky_factor(e, "cholesky_reference"), paths, seed, opts.threads);
    auto b = make_batch(grid, paths, seed, Representation::cholesky_reference);
    for (std::size_t p = 0; p < paths; ++p)
        for (std::size_t i = 0; i < n; ++i) b.samples(p, i + 1) = x(p, i);
    b.scheme_covariance = c;
    return b;
}

// --- heat equation at the origin ------------------------------------------------

namespace {

struct HeatModes {
    double half_length = 0.0;
    std::size_t explicit_modes = 0;
    bool lumped = false;
    std::vector<double> tail_variance;  // per grid time, lumped modes only
};

HeatModes heat_modes(const std::vector<double>& times, const HeatTorusConfig& torus) {
    HeatModes hm;
    const double tmax = times.back();
    hm.half_length = torus.half_length > 0.0 ? torus.half_length : 8.0 * std::sqrt(tmax);
    if (hm.half_length < 8.0 * std::sqrt(tmax) * (1.0 - 1e-12))
        throw ConfigError("sample_heat_origin: torus half-length must be >= 8 sqrt(max t)");
    double gap = times.front();
    for (std::size_t i = 1; i < times.size(); ++i) gap = std::min(gap, times[i] - times[i - 1]);
    const double l = hm.half_length;
    // modes with exp(-k^2 gap / 2) < 1e-17 are uncorrelated across grid times
    const double kdec = std::sqrt(2.0 * 17.0 * std::log(10.0) / gap);
    const auto jdec = static_cast<std::size_t>(std::ceil(kdec * l / pi));
    hm.lumped = jdec <= torus.max_modes;
    hm.explicit_modes = hm.lumped ? jdec : torus.max_modes;
    hm.tail_variance.assign(times.size(), 0.0);
    if (hm.lumped) {
        constexpr std::size_t extra = 1000000;
        for (std::size_t i = 0; i < times.size(); ++i) {
            double s = 0.0;
            for (std::size_t j = hm.explicit_modes + extra; j > hm.explicit_modes; --j) {
                const double k = pi * static_cast<double>(j) / l;
                s += -std::expm1(-k * k * times[i]) / (k * k);
            }
            // remainder sum_{j > J} L^2 / (pi^2 j^2) ~ L^2 / (pi^2 (J + 1/2))
            const double jmax = static_cast<double>(hm.explicit_modes + extra);
            s += l * l / (pi * pi * (jmax + 0.5));
            hm.tail_variance[i] = s / l;
        }
    }
    return hm;
}

}  // namespace

Matrix heat_scheme_covariance(const std::vector<double>& times, const HeatTorusConfig& torus) {
    TimeGrid{times}.validate();
    const HeatModes hm = heat_modes(times, torus);
    const double l = hm.half_length;
    const std::size_t n = times.size();
    Matrix c(n, n);
    const double scale = std::sqrt(2.0 * pi);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a; b < n; ++b) {
            const double t = times[a], s = times[b];
            double v = std::min(t, s) / (2.0 * l);
            for (std::size_t j = hm.explicit_modes; j >= 1; --j) {
                const double k = pi * static_cast<double>(j) / l, k2 = k * k;
                v += (std::exp(-0.5 * k2 * std::abs(t - s)) - std::exp(-0.5 * k2 * (t + s))) / (k2 * l);
            }
            if (a == b) v += hm.tail_variance[a];
            c(a, b) = c(b, a) = scale * v;
        }
    }
    return c;
}

GaussianPathBatch sample_heat_origin(const TimeGrid& grid, std::size_t paths, std::uint64_t seed,
                                     const HeatTorusConfig& torus, const SamplerOptions& opts) {
    grid.validate();
    if (paths == 0) throw ArgumentError("sample_heat_origin: paths must be >= 1");
    const HeatModes hm = heat_modes(grid.times, torus);
    const std::size_t n = grid.size(), m = hm.explicit_modes;
    const double l = hm.half_length;
    // per-mode OU transition between consecutive grid times
    std::vector<double> decay(n * m), noise(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = grid.times[i] - (i == 0 ? 0.0 : grid.times[i - 1]);
        for (std::size_t j = 0; j < m; ++j) {
            const double k = pi * static_cast<double>(j + 1) / l, k2 = k * k;
            decay[i * m + j] = std::exp(-0.5 * k2 * dt);
            noise[i * m + j] = std::sqrt(-std::expm1(-k2 * dt) / k2);
        }
    }
    auto b = make_batch(grid, paths, seed, Representation::heat);
    const double scale = std::pow(2.0 * pi, 0.25);
    const RngStream root(seed);
    parallel_for(paths, opts.threads, [&](std::size_t p) {
        RngStream rng = root.split(p);
        std::vector<double> a(m, 0.0);
        double a0 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dt = grid.times[i] - (i == 0 ? 0.0 : grid.times[i - 1]);
            a0 += std::sqrt(dt) * rng.normal();
            double h = a0 / std::sqrt(2.0 * l);
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                a[j] = decay[i * m + j] * a[j] + noise[i * m + j] * rng.normal();
                s += a[j];
            }
            h += s / std::sqrt(l);
            if (hm.lumped) h += std::sqrt(hm.tail_variance[i]) * rng.normal();
            b.samples(p, i + 1) = scale * h;
        }
    });
    b.scheme_covariance = heat_scheme_covariance(grid.times, torus);
    return b;
}

// --- Volterra representation ---------------------------------------------------------

double volterra_c2() { return 2.0 / boost::math::beta(0.75, 0.75); }

VolterraScheme volterra_scheme(const std::vector<double>& times, std::size_t per_unit) {
    if (per_unit < 256) throw ArgumentError("volterra: need at least 256 sub-steps per unit time");
    TimeGrid{times}.validate();
    const double h = 1.0 / static_cast<double>(per_unit);
    const double tmax = times.back();
    VolterraScheme sc;
    auto& u = sc.nodes;
    for (double v = 0.0; v < tmax; v += h) u.push_back(v);
    for (int m = 1; m <= 24; ++m) u.push_back(h * std::ldexp(1.0, -m));
    for (double t : times) {
        u.push_back(t);
        for (int m = 0; m <= 40; ++m) u.push_back(t - h * std::ldexp(1.0, -m));
    }
    std::sort(u.begin(), u.end());
    // drop near-duplicates, but keep the grid times exactly
    std::vector<double> clean;
    for (double v : u) {
        if (v < 0.0 || v > tmax) continue;
        if (!clean.empty() && v - clean.back() < 1e-14 * std::max(1.0, v)) {
            if (std::find(times.begin(), times.end(), v) != times.end()) clean.back() = v;
            continue;
        }
        clean.push_back(v);
    }
    u = std::move(clean);
    const std::size_t m = u.size() - 1;
    sc.weights = Matrix(times.size(), m);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        for (std::size_t j = 0; j < m && u[j + 1] <= t; ++j) {
            const double u0 = u[j], u1 = u[j + 1], um = 0.5 * (u0 + u1);
            double v;
            if (j == 0) {
                // u^{1/4} integrated exactly, the rest at the midpoint
                v = 0.8 * std::pow(u1, 1.25) * std::pow((t - um) * (t + um), -0.25);
            } else {
                const double sing = 4.0 / 3.0 * (std::pow(t - u0, 0.75) - std::pow(t - u1, 0.75));
                v = sing * std::pow(um, 0.25) * std::pow(t + um, -0.25);
            }
            sc.weights(i, j) = v;
        }
    }
    return sc;
}

GaussianPathBatch sample_volterra(const TimeGrid& grid, std::size_t paths, std::uint64_t seed, std::size_t per_unit,
                                  const SamplerOptions& opts) {
    grid.validate();
    if (paths == 0) throw ArgumentError("sample_volterra: paths must be >= 1");
    const VolterraScheme sc = volterra_scheme(grid.times, per_unit);
    const Matrix& w = sc.weights;
    const std::size_t n = grid.size(), sub = w.cols;
    // r(t_i) = c sum_j W_ij dB_j / du_j,  dB_j = sqrt(du_j) xi_j
    const double c = std::sqrt(volterra_c2());
    std::vector<double> gain(sub);
    for (std::size_t j = 0; j < sub; ++j) gain[j] = c / std::sqrt(sc.nodes[j + 1] - sc.nodes[j]);
    auto b = make_batch(grid, paths, seed, Representation::volterra);
    const RngStream root(seed);
    parallel_for(paths, opts.threads, [&](std::size_t p) {
        RngStream rng = root.split(p);
        std::vector<double> xi(sub);
        rng.fill_normal(xi);
        for (std::size_t j = 0; j < sub; ++j) xi[j] *= gain[j];
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < sub; ++j) s += w(i, j) * xi[j];
            b.samples(p, i + 1) = s;
        }
    });
    b.scheme_covariance = Matrix(n, n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t d = 0; d < n; ++d) {
            double s = 0.0;
            for (std::size_t j = 0; j < sub; ++j) s += w(a, j) * w(d, j) * gain[j] * gain[j];
            b.scheme_covariance(a, d) = s;
        }
    return b;
}

double volterra_kernel_covariance(double t, double tprime) {
    if (t < tprime) std::swap(t, tprime);
    if (tprime <= 0.0) return 0.0;
    boost::math::quadrature::tanh_sinh<double> ts;
    const double half = 0.5 * tprime;
    // xc is the distance to the nearer endpoint, which keeps (t' - u) exact near u = t'
    auto f = [&](double u, double xc) {
        const double du = (u > half) ? xc : tprime - u;
        const double a = ((t - tprime) + du) * (t + u);
        const double b = du * (tprime + u);
        return std::sqrt(u) * std::pow(a, -0.25) * std::pow(b, -0.25);
    };
    return volterra_c2() * ts.integrate(f, 0.0, tprime);
}

double hypergeometric_2f1(double a, double b, double c, double z) {
    if (z == 1.0) {
        if (!(c - a - b > 0.0)) throw DomainError("2F1 diverges at z = 1 unless c > a + b");
        return std::tgamma(c) * std::tgamma(c - a - b) / (std::tgamma(c - a) * std::tgamma(c - b));
    }
    if (!(std::abs(z) < 1.0)) throw DomainError("2F1 series needs |z| < 1");
    double term = 1.0, sum = 1.0;
    for (int n = 0; n < 200000; ++n) {
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

BetaIdentityResult beta_identity_check(double t, double tprime, double rho) {
    if (t < tprime) throw DomainError("beta_identity_check: need t >= t'");
    if (tprime < 0.0) throw DomainError("beta_identity_check: need t' >= 0");
    if (!(rho > 0.0 && rho < 1.0)) throw ArgumentError("beta_identity_check: rho must lie in (0,1)");
    BetaIdentityResult r;
    r.lhs = std::pow(t + tprime, rho) - std::pow(t - tprime, rho);
    if (tprime == 0.0) {
        r.rhs = 0.0;
        r.route = "trivial";
    } else if (rho == 0.5) {
        r.rhs = volterra_kernel_covariance(t, tprime);
        r.route = "integral";
    } else {
        const double z = (tprime / t) * (tprime / t);
        r.rhs = 2.0 * rho * tprime * std::pow(t, rho - 1.0) *
                hypergeometric_2f1(0.5 * (1.0 - rho), 0.5 * (2.0 - rho), 1.5, z);
        r.route = "hypergeometric";
    }
    r.residual = std::abs(r.lhs - r.rhs);
    return r;
}

CovarianceComparison compare_covariance(const GaussianPathBatch& batch, const Matrix& target, double prefactor) {
    const auto times = batch.positive_times();
    if (target.rows != times.size() || target.cols != times.size()) throw GridError("compare_covariance: shape mismatch");
    const auto emp = empirical_covariance(batch.positive_samples(), times);
    CovarianceComparison c;
    c.times = times;
    c.empirical = emp.values;
    c.standard_error = emp.standard_errors;
    const std::size_t n = times.size();
    c.target = Matrix(n, n);
    c.z = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            c.target(i, j) = prefactor * target(i, j);
            const double se = c.standard_error(i, j);
            c.z(i, j) = se > 0.0 ? (c.empirical(i, j) - c.target(i, j)) / se : 0.0;
            c.max_abs_z = std::max(c.max_abs_z, std::abs(c.z(i, j)));
        }
    return c;
}

namespace {

std::size_t column_of(const GaussianPathBatch& b, double t) {
    for (std::size_t j = 0; j < b.times.size(); ++j)
        if (std::abs(b.times[j] - t) <= 1e-12 * std::max(1.0, t)) return j;
    throw GridError("time " + std::to_string(t) + " is not on the batch grid");
}

RatioEstimate mean_with_se(const std::vector<double>& d) {
    const double n = static_cast<double>(d.size());
    double m = 0.0;
    for (double v : d) m += v;
    m /= n;
    double s2 = 0.0;
    for (double v : d) s2 += (v - m) * (v - m);
    RatioEstimate r;
    r.value = m;
    r.standard_error = d.size() > 1 ? std::sqrt(s2 / (n - 1.0) / n) : 0.0;
    return r;
}

}  // namespace

SelfSimilarityReport self_similarity_check(const GaussianPathBatch& batch, double a) {
    if (!(a > 0.0)) throw ArgumentError("self_similarity_check: a must be positive");
    SelfSimilarityReport rep;
    rep.a = a;
    const auto times = batch.positive_times();
    const double sa = std::sqrt(a);
    bool any = false;
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (std::size_t k = 0; k <= i; ++k) {
            const double t = times[i], s = times[k];
            const bool has = TimeGrid{times}.find(a * t) != TimeGrid::npos && TimeGrid{times}.find(a * s) != TimeGrid::npos;
            if (!has) continue;
            any = true;
            const std::size_t ct = column_of(batch, t), cs = column_of(batch, s);
            const std::size_t cat = column_of(batch, a * t), cas = column_of(batch, a * s);
            std::vector<double> d(batch.paths()), lhs(batch.paths()), rhs(batch.paths());
            for (std::size_t p = 0; p < batch.paths(); ++p) {
                lhs[p] = batch.samples(p, cat) * batch.samples(p, cas);
                rhs[p] = sa * batch.samples(p, ct) * batch.samples(p, cs);
                d[p] = lhs[p] - rhs[p];
            }
            SelfSimilarityRow row;
            row.t = t;
            row.s = s;
            row.scaled = mean_with_se(lhs).value;
            row.reference = mean_with_se(rhs).value;
            const auto diff = mean_with_se(d);
            row.z = diff.standard_error > 0.0 ? diff.value / diff.standard_error : 0.0;
            rep.max_abs_z = std::max(rep.max_abs_z, std::abs(row.z));
            rep.rows.push_back(row);
        }
    }
    if (!any) throw GridError("self_similarity_check: no pair (t, s) with (a t, a s) on the grid");
    return rep;
}

RatioEstimate variance_ratio(const GaussianPathBatch& batch, double t_num, double t_den) {
    const std::size_t cn = column_of(batch, t_num), cd = column_of(batch, t_den);
    const std::size_t n = batch.paths();
    double sn = 0.0, sd = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        sn += batch.samples(p, cn) * batch.samples(p, cn);
        sd += batch.samples(p, cd) * batch.samples(p, cd);
    }
    RatioEstimate r;
    r.value = sn / sd;
    // delta method: Var(R) ~ Var(X^2 - R Y^2) / (n E[Y^2]^2)
    std::vector<double> g(n);
    for (std::size_t p = 0; p < n; ++p)
        g[p] = batch.samples(p, cn) * batch.samples(p, cn) - r.value * batch.samples(p, cd) * batch.samples(p, cd);
    const auto gm = mean_with_se(g);
    r.standard_error = gm.standard_error / (sd / static_cast<double>(n));
    return r;
}

RatioEstimate increment_covariance(const GaussianPathBatch& batch, double t1, double t2, double t3, double t4) {
    auto col = [&](double t) { return t == 0.0 ? std::size_t{0} : column_of(batch, t); };
    const std::size_t c1 = col(t1), c2 = col(t2), c3 = col(t3), c4 = col(t4);
    std::vector<double> d(batch.paths());
    for (std::size_t p = 0; p < batch.paths(); ++p)
        d[p] = (batch.samples(p, c2) - batch.samples(p, c1)) * (batch.samples(p, c4) - batch.samples(p, c3));
    return mean_with_se(d);
}

}  // namespace kinkflux
