#include "kinkflux/kernels.hpp"

#include "kinkflux/error.hpp"
#include "kinkflux/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kinkflux {

namespace {

constexpr double pi = std::numbers::pi;

double sech2(double x) {
    const double c = std::cosh(x);
    return 1.0 / (c * c);
}

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw ArgumentError(std::string(what) + ": non-finite argument");
}

void require_order(int k, int lo, int hi, const char* what) {
    if (k < lo || k > hi) throw ArgumentError(std::string(what) + ": derivative order out of range");
}

// Real part of (iw)^k e^{iwx} and the imaginary part, as cos/sin combinations.
inline void fourier_factor(int k, double w, double c, double s, double& re, double& im) {
    double wk = 1.0;
    for (int i = 0; i < k; ++i) wk *= w;
    switch (k & 3) {
        case 0: re = wk * c; im = wk * s; break;
        case 1: re = -wk * s; im = wk * c; break;
        case 2: re = -wk * c; im = -wk * s; break;
        default: re = wk * s; im = -wk * c; break;
    }
}

struct OmegaRule {
    std::vector<double> nodes, weights;
};

// 64 panels of 20-point Gauss-Legendre on [-8, 8].
const OmegaRule& omega_rule() {
    static const OmegaRule rule = [] {
        using gl = boost::math::quadrature::gauss<double, 20>;
        const auto& abs = gl::abscissa();
        const auto& wts = gl::weights();
        OmegaRule r;
        constexpr int panels = 64;
        constexpr double a = -8.0, b = 8.0;
        const double h = (b - a) / panels;
        for (int p = 0; p < panels; ++p) {
            const double mid = a + h * (p + 0.5);
            for (std::size_t i = 0; i < abs.size(); ++i) {
                const double offs[2] = {abs[i], -abs[i]};
                for (int sgn_i = 0; sgn_i < (abs[i] == 0.0 ? 1 : 2); ++sgn_i) {
                    r.nodes.push_back(mid + 0.5 * h * offs[sgn_i]);
                    r.weights.push_back(0.5 * h * wts[i]);
                }
            }
        }
        return r;
    }();
    return rule;
}

}  // namespace

// --- front profile -------------------------------------------------------

double FrontProfile::value(double x) const noexcept { return std::tanh(x - center); }
double FrontProfile::d1(double x) const noexcept { return sech2(x - center); }
double FrontProfile::d2(double x) const noexcept {
    const double z = x - center;
    return -2.0 * sech2(z) * std::tanh(z);
}
double FrontProfile::d3(double x) const noexcept {
    const double z = x - center;
    const double s = sech2(z), t = std::tanh(z);
    return -2.0 * s * s + 4.0 * s * t * t;
}
double FrontProfile::potential_curvature(double x) const noexcept {
    const double m = value(x);
    return 3.0 * m * m - 1.0;
}

GridProfile FrontProfile::sample(const PeriodicGrid& g) const {
    GridProfile p(g);
    for (std::size_t i = 0; i < g.points; ++i) p.values[i] = value(g.x(i));
    return p;
}
GridProfile FrontProfile::sample_d1(const PeriodicGrid& g) const {
    GridProfile p(g);
    for (std::size_t i = 0; i < g.points; ++i) p.values[i] = d1(g.x(i));
    return p;
}
GridProfile FrontProfile::sample_d2(const PeriodicGrid& g) const {
    GridProfile p(g);
    for (std::size_t i = 0; i < g.points; ++i) p.values[i] = d2(g.x(i));
    return p;
}

double varphi(double x) noexcept { return 1.0 - std::tanh(std::abs(x)); }

double bump(double x) noexcept {
    const double x2 = x * x;
    if (x2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - x2));
}

double CutoffFunction::support() const noexcept {
    if (unit) return std::numeric_limits<double>::infinity();
    if (support_override > 0.0) return support_override;
    return std::pow(epsilon, -beta);
}

double CutoffFunction::operator()(double x) const noexcept {
    if (unit) return 1.0;
    return bump(x / support());
}

void CutoffFunction::validate() const {
    if (unit) return;
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ArgumentError("cutoff: epsilon must lie in (0,1)");
    if (!(beta > 2.0)) throw ArgumentError("cutoff: beta must exceed 2");
}

double cutoff_eval(double x, double epsilon, double beta) {
    // a(x eps^beta); computed as a multiplication so huge supports stay exact at x = 0
    return bump(x * std::pow(epsilon, beta));
}

// --- phi -----------------------------------------------------------------

PhiTable::PhiTable() {
    nodes_ = static_cast<std::size_t>(std::llround(range / spacing)) + 1;
    const auto& rule = omega_rule();
    for (auto& v : values_) v.assign(nodes_, 0.0);
    std::vector<double> damp(rule.nodes.size());
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double w = rule.nodes[q];
        damp[q] = rule.weights[q] * std::exp(-0.5 * w * w * w * w) / (2.0 * pi);
    }
    for (std::size_t j = 0; j < nodes_; ++j) {
        const double x = spacing * static_cast<double>(j);
        std::array<double, max_order + 2> re{}, im{};
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double w = rule.nodes[q];
            const double c = std::cos(w * x), s = std::sin(w * x);
            for (int k = 0; k <= max_order + 1; ++k) {
                double r, i;
                fourier_factor(k, w, c, s, r, i);
                re[k] += damp[q] * r;
                im[k] += damp[q] * i;
            }
        }
        for (int k = 0; k <= max_order + 1; ++k) {
            max_imag_ = std::max(max_imag_, std::abs(im[k]));
            // flush the cancellation floor so the envelope fit sees the true tail
            values_[k][j] = std::abs(re[k]) < 1e-15 ? 0.0 : re[k];
        }
        if (j == 0)
            for (int k = 1; k <= max_order + 1; k += 2) values_[k][0] = 0.0;
    }
    if (max_imag_ > 1e-12) throw PrecisionError("phi table imaginary part", max_imag_, 1e-12);
    for (int k = 0; k <= max_order; ++k) {
        for (int lambda = 1; lambda <= 2; ++lambda) {
            double c = 0.0;
            for (std::size_t j = 0; j < nodes_; ++j)
                c = std::max(c, std::abs(values_[k][j]) * std::exp(lambda * spacing * static_cast<double>(j)));
            envelope_[k][lambda - 1] = c * (1.0 + 1e-12);
        }
    }
}

const PhiTable& PhiTable::instance() {
    static const PhiTable table;
    return table;
}

std::span<const double> PhiTable::half_table(int k) const {
    require_order(k, 0, max_order, "PhiTable::half_table");
    return values_[k];
}

double PhiTable::envelope(int lambda, int k) const {
    require_order(k, 0, max_order, "PhiTable::envelope");
    if (lambda != 1 && lambda != 2) throw ArgumentError("PhiTable::envelope: lambda must be 1 or 2");
    return envelope_[k][lambda - 1];
}

PhiValue PhiTable::eval(double x, int k) const {
    require_finite(x, "phi_eval");
    require_order(k, 0, max_order, "phi_eval");
    const double ax = std::abs(x);
    const double parity = (k % 2 == 1 && x < 0.0) ? -1.0 : 1.0;
    if (ax > range) return {envelope_[k][1] * std::exp(-2.0 * ax), true};
    const double pos = ax / spacing;
    std::size_t j = static_cast<std::size_t>(pos);
    if (j >= nodes_ - 1) j = nodes_ - 2;
    const double s = pos - static_cast<double>(j);
    const auto& f = values_[k];
    const auto& df = values_[k + 1];
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    const double v = h00 * f[j] + h10 * spacing * df[j] + h01 * f[j + 1] + h11 * spacing * df[j + 1];
    return {parity * v, false};
}

double phi_eval(double x, int k) {
    require_order(k, 0, 2, "phi_eval");
    return PhiTable::instance().eval(x, k).value;
}

double phi_direct(double x, int k) {
    require_finite(x, "phi_direct");
    require_order(k, 0, 4, "phi_direct");
    const auto& rule = omega_rule();
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double w = rule.nodes[q];
        double r, i;
        fourier_factor(k, w, std::cos(w * x), std::sin(w * x), r, i);
        sum += rule.weights[q] * std::exp(-0.5 * w * w * w * w) * r;
    }
    return sum / (2.0 * pi);
}

double green_G(double x, double y, double t, int dx_order) {
    if (!(t > 0.0)) throw DomainError("green_G: t must be positive");
    require_finite(x, "green_G");
    require_finite(y, "green_G");
    require_order(dx_order, 0, PhiTable::max_order, "green_G");
    const double s = std::pow(t, -0.25);
    return std::pow(s, 1 + dx_order) * PhiTable::instance()((x - y) * s, dx_order);
}

// --- K_inf ----------------------------------------------------------------

double kinf_eval(double z, double t, int i, int j) {
    if (!(t > 0.0)) throw DomainError("kinf_eval: t must be positive");
    require_finite(z, "kinf_eval");
    require_order(i, 0, 1, "kinf_eval");
    require_order(j, 0, 1, "kinf_eval");
    // multiplier is even in w times (iw)^{i+j} (-1)^j; integrate over w >= 0 and double
    const double wmax = std::min(std::pow(90.0 / t, 0.25), std::sqrt(45.0 / t));
    const std::size_t panels = 8 + static_cast<std::size_t>(std::ceil(wmax * std::abs(z) / 2.0 + 2.0 * wmax));
    const int k = i + j;
    const double sign = (j == 1) ? -1.0 : 1.0;
    auto f = [&](double w) {
        const double m = std::exp(-t * (0.5 * w * w * w * w + 2.0 * w * w));
        double r, im;
        fourier_factor(k, w, std::cos(w * z), std::sin(w * z), r, im);
        return m * r;
    };
    return sign * quad::panels(f, 0.0, wmax, panels) / pi;
}

// --- K* --------------------------------------------------------------------

double kstar_eval(double x, double y, double t, int i, int j) {
    if (!(t > 0.0)) throw DomainError("kstar_eval: t must be positive");
    require_finite(x, "kstar_eval");
    require_finite(y, "kstar_eval");
    require_order(i, 0, 1, "kstar_eval");
    require_order(j, 0, 1, "kstar_eval");
    if (i == 0 && j == 1) return kstar_eval(y, x, t, 1, 0);
    const double pref = 1.0 / std::sqrt(2.0 * pi * t);
    const double s = sgn(x * y);
    const double same = s == 1.0 ? 1.0 : 0.0;
    const double ex = std::exp(-x * x / (8.0 * t));
    const double ey = std::exp(-y * y / (8.0 * t));
    const double exy = std::exp(-(x + y) * (x + y) / (8.0 * t));
    const FrontProfile m;
    if (i == 0) {
        return pref * (-0.5 * varphi(x) * varphi(y) * s + 0.5 * ey * varphi(x) * s + 0.5 * ex * varphi(y) * s -
                       exy * same);
    }
    if (j == 0) {
        return pref * (0.5 * m.d1(x) * varphi(y) * sgn(y) - 0.5 * m.d1(x) * ey * sgn(y) -
                       x / (8.0 * t) * ex * varphi(y) * sgn(x) * sgn(y) + exy * (x + y) / (4.0 * t) * same);
    }
    return pref * (-0.5 * m.d1(x) * m.d1(y) + m.d1(x) * y / (8.0 * t) * ey * sgn(y) +
                   x / (8.0 * t) * ex * m.d1(y) * sgn(x) + exy / (4.0 * t) * same -
                   (x + y) * (x + y) / (16.0 * t * t) * exy * same);
}

// --- ETD weights -----------------------------------------------------------

EtdWeights etd_weights(double lambda, double h) {
    EtdWeights w;
    const double x = lambda * h;
    w.e = std::exp(-x);
    if (std::abs(x) < 1e-2) {
        w.p1 = h * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0 + x * x * x * x / 120.0);
        w.p2 = h * (0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0 + x * x * x * x / 720.0);
    } else {
        w.p1 = -std::expm1(-x) / lambda;
        w.p2 = h * (x - 1.0 + w.e) / (x * x);
    }
    return w;
}

// --- numerical semigroup ---------------------------------------------------

LinearizedSemigroup::LinearizedSemigroup(PeriodicGrid grid, double dt)
    : grid_(grid), dt_(dt), fft_(grid.points) {
    if (grid.points < 8 || grid.points % 2 != 0) throw GridError("semigroup: grid needs an even number of points >= 8");
    if (!(dt > 0.0)) throw ConfigError("semigroup: dt must be positive");
    const std::size_t m = grid.modes();
    omega_.resize(m);
    lambda_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double w = grid.wavenumber(k);
        omega_[k] = (k == grid.points / 2) ? 0.0 : w;  // Nyquist derivative is zeroed
        lambda_[k] = 0.5 * w * w * w * w + 2.0 * w * w;
    }
    well_.resize(grid.points);
    for (std::size_t i = 0; i < grid.points; ++i) well_[i] = 3.0 * sech2(grid.x(i));
    real_.resize(grid.points);
    for (auto* s : {&s0_, &s1_, &s2_, &s3_, &na_, &nb_, &nc_, &nv_, &tmp_}) s->assign(m, 0.0);
}

void LinearizedSemigroup::validate(const PeriodicGrid& grid, double y, double t) {
    const double dx = grid.dx();
    if (dx > 0.05) throw ConfigError("semigroup: grid spacing above 0.05 does not resolve the interface");
    if (t < 10.0 * dx * dx * dx * dx) throw ConfigError("semigroup: t below the delta validity window 10 dx^4");
    if (grid.half_length - std::abs(y) < 12.0 * std::sqrt(t) + 8.0 || grid.half_length < 12.0 * std::sqrt(t) + 8.0)
        throw ConfigError("semigroup: box too small for the diffusive spread at this t");
}

LinearizedSemigroup::Spectrum LinearizedSemigroup::delta_spectrum(double y, int derivative) const {
    Spectrum s(grid_.modes());
    const double scale = 1.0 / grid_.dx();
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double w = grid_.wavenumber(k);
        std::complex<double> v = scale * std::polar(1.0, -w * (y + grid_.half_length));
        if (derivative == 1) v *= std::complex<double>(0.0, -omega_[k]);
        if (k == grid_.points / 2) v = v.real();
        s[k] = v;
    }
    return s;
}

const LinearizedSemigroup::Coefficients& LinearizedSemigroup::coefficients(double h) {
    auto it = cache_.find(h);
    if (it != cache_.end()) return it->second;
    constexpr int contour = 32;
    Coefficients c;
    const std::size_t m = lambda_.size();
    for (auto* v : {&c.e, &c.e2, &c.q, &c.f1, &c.f2, &c.f3}) v->resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double lh = -lambda_[k] * h;
        c.e[k] = std::exp(lh);
        c.e2[k] = std::exp(lh / 2.0);
        std::complex<double> q = 0, f1 = 0, f2 = 0, f3 = 0;
        for (int j = 0; j < contour; ++j) {
            const std::complex<double> r = lh + std::polar(1.0, pi * (j + 0.5) / contour);
            const auto er = std::exp(r);
            const auto r3 = r * r * r;
            q += (std::exp(r / 2.0) - 1.0) / r;
            f1 += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
            f2 += (2.0 + r + er * (r - 2.0)) / r3;
            f3 += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
        }
        c.q[k] = h * q.real() / contour;
        c.f1[k] = h * f1.real() / contour;
        c.f2[k] = h * f2.real() / contour;
        c.f3[k] = h * f3.real() / contour;
    }
    // one-off remainder lengths would otherwise pile up
    if (cache_.size() >= 8) std::erase_if(cache_, [this](const auto& kv) { return kv.first != dt_; });
    return cache_.emplace(h, std::move(c)).first->second;
}

void LinearizedSemigroup::remainder(const Spectrum& w, Spectrum& out) {
    const std::size_t m = w.size();
    for (std::size_t k = 0; k < m; ++k) tmp_[k] = std::complex<double>(0.0, omega_[k]) * w[k];
    fft_.inverse(tmp_, real_);
    for (std::size_t i = 0; i < real_.size(); ++i) real_[i] *= -well_[i];
    fft_.forward(real_, out);
    for (std::size_t k = 0; k < m; ++k) out[k] *= std::complex<double>(0.0, omega_[k]);
}

void LinearizedSemigroup::step(Spectrum& v, const Coefficients& c) {
    const std::size_t m = v.size();
    remainder(v, nv_);
    for (std::size_t k = 0; k < m; ++k) s1_[k] = c.e2[k] * v[k] + c.q[k] * nv_[k];
    remainder(s1_, na_);
    for (std::size_t k = 0; k < m; ++k) s2_[k] = c.e2[k] * v[k] + c.q[k] * na_[k];
    remainder(s2_, nb_);
    for (std::size_t k = 0; k < m; ++k) s3_[k] = c.e2[k] * s1_[k] + c.q[k] * (2.0 * nb_[k] - nv_[k]);
    remainder(s3_, nc_);
    for (std::size_t k = 0; k < m; ++k)
        v[k] = c.e[k] * v[k] + nv_[k] * c.f1[k] + 2.0 * (na_[k] + nb_[k]) * c.f2[k] + nc_[k] * c.f3[k];
}

void LinearizedSemigroup::evolve(Spectrum& w, double duration) {
    if (duration < 0.0) throw DomainError("semigroup: negative duration");
    if (w.size() != grid_.modes()) throw GridError("semigroup: spectrum size mismatch");
    const double steps_real = duration / dt_;
    auto whole = static_cast<long long>(std::floor(steps_real + 1e-9));
    double rest = duration - static_cast<double>(whole) * dt_;
    if (rest < 1e-12 * dt_) rest = 0.0;
    if (whole > 0) {
        const auto& c = coefficients(dt_);
        for (long long n = 0; n < whole; ++n) step(w, c);
    }
    if (rest > 0.0) step(w, coefficients(rest));
}

GridProfile LinearizedSemigroup::to_profile(const Spectrum& w) {
    GridProfile p(grid_);
    fft_.inverse(w, p.values);
    return p;
}

GridProfile LinearizedSemigroup::column(double y, double t, int derivative) {
    if (!(t > 0.0)) throw DomainError("semigroup: t must be positive");
    require_order(derivative, 0, 1, "semigroup column");
    validate(grid_, y, t);
    auto w = delta_spectrum(y, derivative);
    evolve(w, t);
    return to_profile(w);
}

GridProfile semigroup_K(double y, double t, const PeriodicGrid& grid) {
    LinearizedSemigroup sg(grid, std::min(0.02, t / 8.0));
    return sg.column(y, t);
}

}  // namespace kinkflux
