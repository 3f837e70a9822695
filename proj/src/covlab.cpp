#include "kinkflux/covlab.hpp"

#include "kinkflux/error.hpp"
#include "kinkflux/parallel.hpp"
#include "kinkflux/quadrature.hpp"
#include "kinkflux/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

namespace kinkflux {

namespace {

constexpr double pi = std::numbers::pi;

double a2(const CutoffFunction& a, double y) {
    const double v = a(y);
    return v * v;
}

double dphi(double z) { return PhiTable::instance()(z, 1); }

// The tabulated phi' is only piecewise cubic, so tighter inner tolerances just recurse.
constexpr double inner_tol = 1e-9;

// Adaptive integral of f over [lo, hi], split at the cuts lying strictly inside.
template <class F>
double split_integral(F&& f, double lo, double hi, std::vector<double> cuts, double tol, double* err = nullptr) {
    if (!(hi > lo)) {
        if (err) *err = 0.0;
        return 0.0;
    }
    cuts.push_back(lo);
    cuts.push_back(hi);
    std::erase_if(cuts, [&](double c) { return c < lo || c > hi; });
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double total = 0.0, e_total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] <= 0.0) continue;
        double e = 0.0;
        total += quad::adaptive(f, cuts[i], cuts[i + 1], tol, &e);
        e_total += e;
    }
    if (err) *err = e_total;
    return total;
}

void check_precision(const char* what, double value, double err, double rel_tol) {
    const double budget = rel_tol * std::max(std::abs(value), 1e-300);
    if (err > budget && err > 1e-14) throw PrecisionError(what, value, err);
}

// The cutoff support as an integration range ([-inf, inf] when a == 1).
double support_of(const CutoffFunction& a) { return a.unit ? std::numeric_limits<double>::infinity() : a.support(); }

}  // namespace

void CovQuery::validate() const {
    for (double v : {x, t, xp, tp})
        if (!std::isfinite(v)) throw DomainError("covariance query: non-finite argument");
    if (t < 0.0 || tp < 0.0) throw DomainError("covariance query: times must be non-negative");
    cutoff.validate();
}

double y_variance_coefficient() { return std::tgamma(0.75) / pi; }

// --- Y ---------------------------------------------------------------------------------

double cov_Y(const CovQuery& q, double rel_tol) {
    q.validate();
    const double tm = std::min(q.t, q.tp);
    if (tm == 0.0) return 0.0;
    const bool first_small = q.t <= q.tp;
    const double xs = first_small ? q.x : q.xp;
    const double xl = first_small ? q.xp : q.x;
    const double delta = std::abs(q.t - q.tp);

    // s -> w = (t^t' - s)^{1/4}; y = xs - w z
    auto outer = [&](double w) {
        const double tau_l = w * w * w * w + delta;
        const double sl = std::pow(tau_l, 0.25);
        auto g = [&](double z) {
            const double y = xs - w * z;
            return dphi(z) * dphi((xl - y) / sl) * a2(q.cutoff, y);
        };
        const double j = quad::adaptive(g, -PhiTable::range, PhiTable::range, 1e-11);
        return 4.0 * w * w / std::sqrt(tau_l) * j;
    };
    double err = 0.0;
    const double v = quad::adaptive(outer, 0.0, std::pow(tm, 0.25), rel_tol, &err);
    check_precision("cov_Y", v, err, rel_tol);
    return v;
}

double y_spatial_increment(double x, double h, double t, const CutoffFunction& a, double rel_tol) {
    if (!std::isfinite(x) || !std::isfinite(h) || !std::isfinite(t) || t < 0.0)
        throw DomainError("y_spatial_increment: bad arguments");
    if (t == 0.0 || h == 0.0) return 0.0;
    constexpr double r = PhiTable::range;
    auto inner = [&](double w) {
        const double d = h / w;
        auto both = [&](double z) {
            const double u = dphi(z + d) - dphi(z);
            return u * u * a2(a, x - w * z);
        };
        if (std::abs(d) < 2.0 * r)
            return split_integral(both, std::min(-r, -r - d), std::max(r, r - d), {-r, r, -r - d, r - d}, inner_tol);
        // disjoint supports: no cross term
        auto shifted = [&](double z) { return dphi(z + d) * dphi(z + d) * a2(a, x - w * z); };
        auto plain = [&](double z) { return dphi(z) * dphi(z) * a2(a, x - w * z); };
        return quad::adaptive(shifted, -r - d, r - d, inner_tol) + quad::adaptive(plain, -r, r, inner_tol);
    };
    auto outer = [&](double w) { return 4.0 * inner(w); };
    const double ah = std::abs(h);
    double err = 0.0;
    const double v = split_integral(outer, 0.0, std::pow(t, 0.25), {ah / 60.0, ah / 10.0, ah, 10.0 * ah}, rel_tol, &err);
    check_precision("y_spatial_increment", v, err, rel_tol);
    return v;
}

double y_temporal_increment(double x, double t, double h, const CutoffFunction& a, double rel_tol) {
    if (!std::isfinite(x) || !std::isfinite(h) || !std::isfinite(t) || t < 0.0 || h < 0.0)
        throw DomainError("y_temporal_increment: bad arguments");
    if (h == 0.0) return 0.0;
    constexpr double r = PhiTable::range;
    // part 1: elapsed tau in [0, t] seen from both times, w = tau^{1/4}, r_w = w / (tau + h)^{1/4}
    auto outer = [&](double w) {
        const double rw = w / std::pow(w * w * w * w + h, 0.25);
        const double reach = r / std::max(rw, 1e-4);
        auto g = [&](double z) {
            const double u = dphi(z) - rw * rw * dphi(rw * z);
            return u * u * a2(a, x - w * z);
        };
        return 4.0 * split_integral(g, -reach, reach, {-r, r}, inner_tol);
    };
    double err = 0.0;
    const double h4 = std::pow(h, 0.25);
    double v = 0.0;
    if (t > 0.0) {
        v = split_integral(outer, 0.0, std::pow(t, 0.25), {0.1 * h4, h4, 10.0 * h4}, rel_tol, &err);
        check_precision("y_temporal_increment", v, err, rel_tol);
    }
    // part 2: noise injected during (t, t + h]
    CovQuery q{x, h, x, h, a};
    return v + cov_Y(q, rel_tol);
}

// --- H ---------------------------------------------------------------------------------

std::string to_string(KernelSource s) {
    return s == KernelSource::explicit_longtime ? "explicit_longtime" : "numerical_k";
}

namespace {

double cov_H_longtime(const CovQuery& q, const CovHOptions& opts) {
    const double tm = std::min(q.t, q.tp);
    if (tm <= opts.t0) return 0.0;
    const bool first_small = q.t <= q.tp;
    const double xs = first_small ? q.x : q.xp;
    const double xl = first_small ? q.xp : q.x;
    const double delta = std::abs(q.t - q.tp);
    const double sup = support_of(q.cutoff);
    const FrontProfile front;

    // tau = v^2 over [t0, t^t']
    auto outer = [&](double v) {
        const double tau = v * v, tau_l = tau + delta;
        auto dk = [&](double x, double y, double s) {
            double v = kstar_eval(x, y, s, 1, 0);
            if (opts.drop_h2_term) v += 0.5 * front.d1(x) * std::exp(-y * y / (8.0 * s)) * sgn(y) / std::sqrt(2.0 * pi * s);
            return v;
        };
        auto f = [&](double y) { return dk(xs, y, tau) * dk(xl, y, tau_l) * a2(q.cutoff, y); };
        const double reach = std::min(std::max(std::abs(xs), std::abs(xl)) + 12.0 * std::sqrt(8.0 * tau_l) + 20.0, sup);
        const double j = split_integral(f, -reach, reach, {0.0, -10.0, 10.0, xs, xl}, 1e-10);
        return 2.0 * v * j;
    };
    double err = 0.0;
    const double v = quad::adaptive(outer, std::sqrt(opts.t0), std::sqrt(tm), opts.rel_tol, &err);
    check_precision("cov_H (explicit long-time)", v, err, opts.rel_tol);
    return v;
}

// Columns y -> d_x K(source, y, tau) at every requested tau (sorted ascending).
std::vector<std::vector<double>> kernel_snapshots(LinearizedSemigroup& sg, double source, const std::vector<double>& taus) {
    std::vector<std::vector<double>> out;
    out.reserve(taus.size());
    auto main = sg.delta_spectrum(source, 1);
    std::size_t n_main = 0;
    const double dt = sg.dt();
    for (double tau : taus) {
        while (static_cast<double>(n_main + 1) * dt <= tau + 1e-12) {
            sg.evolve(main, dt);
            ++n_main;
        }
        auto w = main;
        const double rest = tau - static_cast<double>(n_main) * dt;
        if (rest > 1e-13) sg.evolve(w, rest);
        out.push_back(sg.to_profile(w).values);
    }
    return out;
}

// int_0^{tau_head} <d_x K_inf(xs, ., tau), d_x K_inf(xl, ., tau + delta)> dtau
double head_free_kernel(double d, double delta, double tau_head) {
    auto lam = [](double w) { return 0.5 * w * w * w * w + 2.0 * w * w; };
    auto tail = [&](double span) {
        // (1/pi) int_0^inf cos(w d) e^{-lambda span} / (w^2 + 4) dw
        if (span == 0.0) return std::exp(-2.0 * std::abs(d)) / 4.0;
        double wmax = 1.0;
        while (lam(wmax) * span < 45.0) wmax *= 1.5;
        const std::size_t np = std::max<std::size_t>(64, static_cast<std::size_t>(wmax * std::abs(d)));
        return quad::panels([&](double w) { return std::cos(w * d) * std::exp(-lam(w) * span) / (w * w + 4.0); }, 0.0,
                            wmax, np) /
               pi;
    };
    return tail(delta) - tail(delta + 2.0 * tau_head);
}

double cov_H_numerical(const CovQuery& q, const CovHOptions& opts) {
    const double tm = std::min(q.t, q.tp), tl = std::max(q.t, q.tp);
    if (tm == 0.0) return 0.0;
    if (tl > opts.numerical_max_t)
        throw ArgumentError("cov_H: numerical kernel route limited to t <= " + std::to_string(opts.numerical_max_t));
    const bool first_small = q.t <= q.tp;
    const double xs = first_small ? q.x : q.xp;
    const double xl = first_small ? q.xp : q.x;
    const double delta = tl - tm;

    const double dx = opts.numerical_dx;
    const double half = std::max(std::abs(xs), std::abs(xl)) + 12.0 * std::sqrt(tl) + 8.0;
    const auto n = std::bit_ceil(static_cast<std::size_t>(std::ceil(2.0 * half / dx)));
    const PeriodicGrid grid{0.5 * static_cast<double>(n) * dx, n};
    LinearizedSemigroup::validate(grid, xs, tl);
    LinearizedSemigroup::validate(grid, xl, tl);
    LinearizedSemigroup sg(grid, opts.numerical_dt);

    const double tau_min = 10.0 * dx * dx * dx * dx;
    const bool head = delta <= 100.0 * tau_min;
    const double w_lo = head ? std::pow(std::min(tau_min, tm), 0.25) : 0.0;
    const double w_hi = std::pow(tm, 0.25);
    const double head_part = head ? head_free_kernel(xs - xl, delta, std::min(tau_min, tm)) : 0.0;
    if (!(w_hi > w_lo)) return head_part;

    using rule = boost::math::quadrature::gauss<double, 20>;
    const auto& ab = rule::abscissa();
    const auto& wt = rule::weights();
    struct Node {
        double w, weight;
        int level;
    };
    std::vector<Node> nodes;
    const std::size_t coarse = 6;
    for (int level = 0; level < 2; ++level) {
        const std::size_t np = coarse << level;
        const double hp = (w_hi - w_lo) / static_cast<double>(np);
        for (std::size_t p = 0; p < np; ++p) {
            const double mid = w_lo + (static_cast<double>(p) + 0.5) * hp;
            for (std::size_t i = 0; i < ab.size(); ++i)
                for (double s : {-1.0, 1.0}) nodes.push_back({mid + s * 0.5 * hp * ab[i], 0.5 * hp * wt[i], level});
        }
    }
    std::vector<double> taus;
    for (const auto& nd : nodes) taus.push_back(nd.w * nd.w * nd.w * nd.w);
    std::vector<std::size_t> order(taus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return taus[a] < taus[b]; });
    std::vector<double> sorted_s, sorted_l;
    for (auto i : order) {
        sorted_s.push_back(taus[i]);
        sorted_l.push_back(taus[i] + delta);
    }
    const auto cols_s = kernel_snapshots(sg, xs, sorted_s);
    const auto cols_l = kernel_snapshots(sg, xl, sorted_l);

    std::vector<double> weight2(n);
    for (std::size_t i = 0; i < n; ++i) weight2[i] = a2(q.cutoff, grid.x(i));
    double sum[2] = {0.0, 0.0};
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& nd = nodes[order[k]];
        double ip = 0.0;
        for (std::size_t i = 0; i < n; ++i) ip += cols_s[k][i] * cols_l[k][i] * weight2[i];
        ip *= grid.dx();
        sum[nd.level] += nd.weight * 4.0 * nd.w * nd.w * nd.w * ip;
    }
    const double value = head_part + sum[1];
    check_precision("cov_H (numerical kernel)", value, std::abs(sum[1] - sum[0]), opts.numerical_tol);
    return value;
}

}  // namespace

double cov_H(const CovQuery& q, const CovHOptions& opts) {
    q.validate();
    if (!(opts.t0 > 0.0)) throw ArgumentError("cov_H: t0 must be positive");
    if (opts.drop_h2_term && opts.source != KernelSource::explicit_longtime)
        throw ArgumentError("cov_H: the h2 split is defined on the long-time kernel only");
    return opts.source == KernelSource::explicit_longtime ? cov_H_longtime(q, opts) : cov_H_numerical(q, opts);
}

StitchedCovH cov_H_stitched(const CovQuery& q, const CovHOptions& opts, double stitch_low, double stitch_high) {
    if (!(stitch_high > stitch_low)) throw ArgumentError("cov_H_stitched: empty overlap");
    StitchedCovH r;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double tm = std::min(q.t, q.tp), tl = std::max(q.t, q.tp);
    CovHOptions o = opts;
    o.numerical_max_t = stitch_high;
    r.numerical = nan;
    r.longtime = nan;
    if (tl <= stitch_high) {
        o.source = KernelSource::numerical_k;
        r.numerical = cov_H(q, o);
    }
    if (tm >= stitch_low) {
        o.source = KernelSource::explicit_longtime;
        r.longtime = cov_H(q, o);
    }
    r.overlap = std::isfinite(r.numerical) && std::isfinite(r.longtime);
    if (r.overlap) r.relative_gap = std::abs(r.numerical - r.longtime) / std::max(std::abs(r.numerical), 1e-300);
    if (std::isfinite(r.numerical)) {
        r.value = r.numerical;
        r.source = to_string(KernelSource::numerical_k);
    } else if (std::isfinite(r.longtime)) {
        r.value = r.longtime;
        r.source = to_string(KernelSource::explicit_longtime);
    } else {
        throw ArgumentError("cov_H_stitched: t^t' below the long-time range and t v t' above the numerical range");
    }
    return r;
}

// --- h2 ---------------------------------------------------------------------------------

double h2_covariance(double t, double tp) {
    if (t < 0.0 || tp < 0.0) throw DomainError("h2_covariance: times must be non-negative");
    return (std::sqrt(t + tp) - std::sqrt(std::abs(t - tp))) / std::sqrt(8.0 * pi);
}

H2Batch sample_h2(const TimeGrid& grid, std::size_t paths, std::uint64_t seed, const CutoffFunction& cutoff,
                  const H2LatticeOptions& opts) {
    grid.validate();
    cutoff.validate();
    if (paths == 0) throw ArgumentError("sample_h2: paths must be positive");
    if (!(opts.cells_per_root > 0.0) || !(opts.box_roots > 0.0)) throw ArgumentError("sample_h2: bad lattice options");
    const double tmin = grid.times.front(), tmax = grid.times.back();
    const double dy_target = std::sqrt(tmin) / opts.cells_per_root;
    const double half_target = opts.box_roots * std::sqrt(tmax);
    const std::size_t ny = std::max<std::size_t>(16, std::bit_ceil(static_cast<std::size_t>(std::ceil(2.0 * half_target / dy_target))));
    const double half = half_target;
    const double dy = 2.0 * half / static_cast<double>(ny);
    const PeriodicGrid lattice{half, ny};
    const std::size_t m = lattice.modes(), nt = grid.size();

    H2Batch out;
    out.dy = dy;
    out.half_width = half;
    auto& b = out.batch;
    b.times.push_back(0.0);
    b.times.insert(b.times.end(), grid.times.begin(), grid.times.end());
    b.samples = Matrix(paths, nt + 1);
    b.representation = Representation::h2_lattice;
    b.seed = seed;

    // staggered nodes y_j = -Y + (j + 1/2) dy, so sgn never hits 0
    std::vector<double> amp(ny);
    for (std::size_t j = 0; j < ny; ++j) {
        const double y = -half + (static_cast<double>(j) + 0.5) * dy;
        amp[j] = sgn(y) * cutoff(y);
    }
    // per-step decay and exact OU injection gain for dz = 2 z_yy dt + dW
    std::vector<double> decay(nt * m), gain(nt * m);
    std::vector<std::complex<double>> phase(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double w = lattice.wavenumber(k);
        const double weight = (k == 0) ? 1.0 : (2 * k == ny ? 0.0 : 2.0);
        phase[k] = weight / static_cast<double>(ny) * std::polar(1.0, w * (half - 0.5 * dy));
    }
    for (std::size_t i = 0; i < nt; ++i) {
        const double h = grid.times[i] - (i == 0 ? 0.0 : grid.times[i - 1]);
        for (std::size_t k = 0; k < m; ++k) {
            const double w = lattice.wavenumber(k);
            const double x = 2.0 * w * w * h;
            decay[i * m + k] = std::exp(-x);
            // Var of int_0^h e^{-2w^2(h-s)} dB over Var of B(h): (1 - e^{-2x}) / (2x)
            gain[i * m + k] = x < 1e-8 ? 1.0 - 0.5 * x : std::sqrt(-std::expm1(-2.0 * x) / (2.0 * x));
        }
    }

    const RngStream root(seed);
    const std::size_t threads = resolve_threads(opts.threads);
    parallel_for(paths, threads, [&](std::size_t p) {
        // one FFT per worker thread, kept between calls
        thread_local std::unique_ptr<RealFft> fft;
        if (!fft || fft->size() != ny) fft = std::make_unique<RealFft>(ny);
        RngStream rng = root.split(p);
        std::vector<double> xi(ny);
        std::vector<std::complex<double>> zh(m, 0.0), nh(m);
        for (std::size_t i = 0; i < nt; ++i) {
            const double h = grid.times[i] - (i == 0 ? 0.0 : grid.times[i - 1]);
            const double sd = std::sqrt(h / dy);
            for (std::size_t j = 0; j < ny; ++j) xi[j] = amp[j] * sd * rng.normal();
            fft->forward(xi, nh);
            std::complex<double> acc = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                zh[k] = decay[i * m + k] * zh[k] + gain[i * m + k] * nh[k];
                acc += zh[k] * phase[k];
            }
            b.samples(p, i + 1) = acc.real();
        }
    });

    // exact lattice covariance with a == 1 (sgn dW is white in law)
    out.lattice_covariance = Matrix(nt, nt);
    for (std::size_t i = 0; i < nt; ++i)
        for (std::size_t j = 0; j < nt; ++j) {
            const double ta = grid.times[i], tb = grid.times[j];
            const double mn = std::min(ta, tb), gap = std::abs(ta - tb);
            double s = mn;  // k = 0
            for (std::size_t k = 1; k < m; ++k) {
                if (2 * k == ny) continue;
                const double w = lattice.wavenumber(k);
                const double w2 = w * w;
                s += 2.0 * std::exp(-2.0 * w2 * gap) * (-std::expm1(-4.0 * w2 * mn)) / (4.0 * w2);
            }
            out.lattice_covariance(i, j) = s / (2.0 * half);
            const double target = h2_covariance(ta, tb);
            out.max_lattice_deviation =
                std::max(out.max_lattice_deviation, std::abs(out.lattice_covariance(i, j) - target) / target);
        }
    out.under_resolved = out.max_lattice_deviation > 0.02;
    return out;
}

// --- asymptotics ------------------------------------------------------------------------

AsymptoticResult asymptotic_check(double x, double xp, double t, double tp, double epsilon, double gamma,
                                  const CovHOptions& opts) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("asymptotic_check: epsilon must lie in (0, 1)");
    if (!(gamma > 0.0)) throw DomainError("asymptotic_check: gamma must be positive");
    if (t < 0.0 || tp < 0.0) throw DomainError("asymptotic_check: times must be non-negative");
    const double scale = std::pow(epsilon, -gamma);
    const CovQuery q{x, scale * t, xp, scale * tp, CutoffFunction::identity()};
    AsymptoticResult r;
    r.lhs = std::pow(epsilon, 0.5 * gamma) * cov_H(q, opts);
    const FrontProfile front;
    r.rhs = front.d1(x) * front.d1(xp) / (2.0 * std::sqrt(2.0 * pi)) * (std::sqrt(t + tp) - std::sqrt(std::abs(t - tp)));
    r.gap = r.rhs != 0.0 ? std::abs(r.lhs - r.rhs) / std::abs(r.rhs) : std::abs(r.lhs);
    return r;
}

// --- H from Y ---------------------------------------------------------------------------

GridProfile YPath::at(std::size_t n) const {
    if (n >= spectra.size()) throw ArgumentError("YPath: step out of range");
    RealFft fft(grid.points);
    GridProfile p(grid);
    fft.inverse(spectra[n], p.values);
    return p;
}

YPath replay_y(const SimulationConfig& cfg, const std::vector<NoiseIncrement>& forcing) {
    if (!(cfg.epsilon > 0.0)) throw ArgumentError("replay_y: epsilon must be positive");
    SpdeStepper stepper(cfg);
    YPath y;
    y.grid = stepper.grid();
    y.dt = cfg.dt;
    const std::size_t m = y.grid.modes();
    const double inv = 1.0 / std::sqrt(cfg.epsilon);
    y.spectra.assign(forcing.size() + 1, std::vector<std::complex<double>>(m, 0.0));
    std::vector<std::complex<double>> f(m);
    const auto& e = stepper.propagator();
    for (std::size_t s = 0; s < forcing.size(); ++s) {
        stepper.forcing_spectrum(forcing[s], f);
        for (std::size_t k = 0; k < m; ++k) y.spectra[s + 1][k] = e[k] * (y.spectra[s][k] + inv * f[k]);
    }
    return y;
}

HFromYResult h_from_y(const YPath& y, const HFromYOptions& opts) {
    if (y.spectra.empty()) throw ArgumentError("h_from_y: empty path");
    const auto& g = y.grid;
    const FrontProfile front;
    std::vector<double> curv(g.points);
    for (std::size_t i = 0; i < g.points; ++i) curv[i] = front.potential_curvature(g.x(i));

    DuhamelProblem prob;
    prob.grid = g;
    prob.dt = y.dt;
    prob.base = y.spectra;
    prob.nonlinearity = [&curv](const std::vector<double>& v, std::vector<double>& out) {
        out.resize(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = curv[i] * v[i];
    };
    PicardOptions po;
    po.tolerance = opts.tolerance;
    po.max_iterations = opts.max_iterations;
    po.rule = ProductRule::left_point;
    po.window_steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opts.window / y.dt)));
    po.throw_on_growth = false;
    auto sol = solve_duhamel(prob, po);
    if (!sol.converged)
        throw ConditioningError("h_from_y: Picard iteration did not converge in " + std::to_string(opts.max_iterations) +
                                " iterations");

    HFromYResult r;
    r.distances = sol.distances;
    r.iterations = sol.iterations;
    for (auto& v : sol.path) r.path.emplace_back(g, std::move(v));

    // re-evaluate H - Y - G(V'' H) with the left-point product rule
    const std::size_t m = g.modes();
    RealFft fft(g.points);
    std::vector<double> e(m), p1(m), w2(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double w = g.wavenumber(k);
        const auto wts = etd_weights(0.5 * w * w * w * w, y.dt);
        e[k] = wts.e;
        p1[k] = wts.p1;
        w2[k] = (2 * k == g.points) ? 0.0 : w * w;
    }
    std::vector<std::complex<double>> acc(m, 0.0), fh(m);
    std::vector<double> fr(g.points), rhs(g.points), yv(g.points);
    for (std::size_t n = 0; n < r.path.size(); ++n) {
        std::vector<std::complex<double>> s(m);
        for (std::size_t k = 0; k < m; ++k) s[k] = y.spectra[n][k] - w2[k] * acc[k];
        fft.inverse(s, rhs);
        for (std::size_t i = 0; i < g.points; ++i)
            r.identity_residual = std::max(r.identity_residual, std::abs(r.path[n].values[i] - rhs[i]));
        for (std::size_t i = 0; i < g.points; ++i) fr[i] = curv[i] * r.path[n].values[i];
        fft.forward(fr, fh);
        for (std::size_t k = 0; k < m; ++k) acc[k] = e[k] * acc[k] + p1[k] * fh[k];
    }
    return r;
}

std::vector<GridProfile> direct_h(const SimulationConfig& cfg, const std::vector<NoiseIncrement>& forcing) {
    if (!(cfg.epsilon > 0.0)) throw ArgumentError("direct_h: epsilon must be positive");
    SimulationConfig c = cfg;
    c.nonlinearity = Nonlinearity::linearized;
    SpdeStepper stepper(c);
    SpectralField v(stepper.grid());
    const double inv = 1.0 / std::sqrt(cfg.epsilon);
    std::vector<GridProfile> out;
    auto push = [&] {
        GridProfile p = stepper.profile(v);  // m + v
        for (std::size_t i = 0; i < p.values.size(); ++i) p.values[i] = (p.values[i] - stepper.base()[i]) * inv;
        out.push_back(std::move(p));
    };
    push();
    for (std::size_t s = 0; s < forcing.size(); ++s) {
        stepper.step(v, forcing[s], s);
        push();
    }
    return out;
}

// --- matched centre variance ------------------------------------------------------------

std::vector<double> matched_center_variance(const SimulationConfig& cfg, const std::vector<double>& times, double dt) {
    if (!(dt > 0.0)) throw ArgumentError("matched_center_variance: dt must be positive");
    for (double t : times)
        if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("matched_center_variance: bad time");
    std::vector<std::size_t> order(times.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    const auto g = cfg.grid();
    const auto a = cfg.cutoff();
    std::vector<double> w2(g.points);
    for (std::size_t i = 0; i < g.points; ++i) w2[i] = a2(a, g.x(i));
    LinearizedSemigroup sg(g, dt);
    RealFft fft(g.points);
    const FrontProfile front;
    auto psi = fft.forward(front.sample_d2(g)).coeffs;
    auto energy = [&] {
        const auto p = sg.to_profile(psi);
        double s = 0.0;
        for (std::size_t i = 0; i < g.points; ++i) s += p.values[i] * p.values[i] * w2[i];
        return s * g.dx();
    };

    std::vector<double> out(times.size(), 0.0);
    double tau = 0.0, integral = 0.0, f_prev = energy();
    for (auto idx : order) {
        const double target = times[idx];
        while (tau < target - 1e-12) {
            const double h = std::min(dt, target - tau);
            sg.evolve(psi, h);
            const double f = energy();
            integral += 0.5 * h * (f_prev + f);
            f_prev = f;
            tau += h;
        }
        out[idx] = 9.0 / 16.0 * cfg.epsilon * integral;
    }
    return out;
}

}  // namespace kinkflux
