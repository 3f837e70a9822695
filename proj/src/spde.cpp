#include "kinkflux/spde.hpp"

#include "kinkflux/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace kinkflux {

std::string to_string(Nonlinearity n) {
    switch (n) {
        case Nonlinearity::on: return "on";
        case Nonlinearity::off: return "off";
        case Nonlinearity::linearized: return "linearized";
    }
    return "on";
}

Nonlinearity parse_nonlinearity(const std::string& s) {
    if (s == "on" || s == "true") return Nonlinearity::on;
    if (s == "off" || s == "false") return Nonlinearity::off;
    if (s == "linearized") return Nonlinearity::linearized;
    throw ConfigError("nonlinearity must be on|off|linearized, got '" + s + "'");
}

CutoffFunction SimulationConfig::cutoff() const {
    if (unit_cutoff) return CutoffFunction::identity();
    return CutoffFunction::clamped(epsilon > 0.0 && epsilon < 1.0 ? epsilon : 0.5, beta, cutoff_fraction * half_length);
}

std::size_t SimulationConfig::steps() const {
    return static_cast<std::size_t>(std::llround(std::ceil(horizon / dt - 1e-9)));
}

void SimulationConfig::validate() const {
    if (points < 8 || !std::has_single_bit(points)) throw ConfigError("points must be a power of two >= 8");
    if (!(half_length > 0.0)) throw ConfigError("half_length must be positive");
    const double dx = 2.0 * half_length / static_cast<double>(points);
    if (dx > 0.1 + 1e-12) throw ConfigError("grid spacing " + std::to_string(dx) + " exceeds 0.1");
    if (!(dt > 0.0) || dt > 0.5 * dx + 1e-15) throw ConfigError("dt must lie in (0, dx/2]");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in [0,1)");
    if (!unit_cutoff && !(beta > 2.0)) throw ConfigError("beta must exceed 2");
    if (!(horizon >= 0.0)) throw ConfigError("horizon must be non-negative");
    if (!allow_small_box && 8.0 * std::pow(horizon, 0.25) > half_length)
        throw ConfigError("box too small: need 8 T^{1/4} <= L");
    if (!(cutoff_fraction > 0.0 && cutoff_fraction <= 1.0)) throw ConfigError("cutoff_fraction must lie in (0,1]");
}

std::uint64_t SimulationConfig::hash() const {
    std::uint64_t h = 0x6B696E6B666C7578ull;
    auto mixd = [&](double v) { h = mix64(h ^ std::bit_cast<std::uint64_t>(v)); };
    auto mixu = [&](std::uint64_t v) { h = mix64(h ^ v); };
    mixd(half_length);
    mixu(points);
    mixd(dt);
    mixd(epsilon);
    mixd(beta);
    mixd(horizon);
    mixu(seed);
    mixu(static_cast<std::uint64_t>(nonlinearity));
    mixd(cutoff_fraction);
    mixu(unit_cutoff);
    return h;
}

SpdeStepper::SpdeStepper(const SimulationConfig& cfg)
    : cfg_(cfg), grid_(cfg.grid()), sqrt_eps_(std::sqrt(cfg.epsilon)), fft_(cfg.points) {
    cfg_.validate();
    const std::size_t n = grid_.points, m = grid_.modes();
    const FrontProfile front;
    const auto a = cfg_.cutoff();
    base_.resize(n);
    base_curv_.resize(n);
    amp_mid_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid_.x(i);
        base_[i] = front.value(x);
        base_curv_[i] = front.potential_curvature(x);
        amp_mid_[i] = a(x + 0.5 * grid_.dx());
    }
    omega2_.resize(m);
    e_.resize(m);
    p1_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double w = grid_.wavenumber(k);
        const double lam = 0.5 * w * w * w * w;
        const auto wts = etd_weights(lam, cfg_.dt);
        omega2_[k] = w * w;
        e_[k] = wts.e;
        p1_[k] = wts.p1;
    }
    v_real_.assign(n, 0.0);
    n_real_.assign(n, 0.0);
    f_real_.assign(n, 0.0);
    n_hat_.assign(m, 0.0);
    f_hat_.assign(m, 0.0);
}

void SpdeStepper::draw(RngStream& rng, NoiseIncrement& noise) const {
    noise.draws.resize(grid_.points);
    rng.fill_normal(noise.draws, std::sqrt(cfg_.dt / grid_.dx()));
}

void SpdeStepper::forcing(const NoiseIncrement& noise, std::vector<double>& out) const {
    const std::size_t n = grid_.points;
    if (noise.draws.size() != n) throw GridError("noise block size does not match the grid");
    out.resize(n);
    const double s = sqrt_eps_ / grid_.dx();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t im = (i + n - 1) % n;
        out[i] = s * (amp_mid_[i] * noise.draws[i] - amp_mid_[im] * noise.draws[im]);
    }
}

void SpdeStepper::forcing_spectrum(const NoiseIncrement& noise, std::vector<std::complex<double>>& out) {
    forcing(noise, f_real_);
    out.resize(grid_.modes());
    fft_.forward(f_real_, out);
    out[0] = 0.0;
}

void SpdeStepper::drift(const std::vector<double>& v, std::vector<double>& out) const {
    const std::size_t n = v.size();
    out.resize(n);
    switch (cfg_.nonlinearity) {
        case Nonlinearity::off:
            std::fill(out.begin(), out.end(), 0.0);
            break;
        case Nonlinearity::linearized:
            for (std::size_t i = 0; i < n; ++i) out[i] = base_curv_[i] * v[i];
            break;
        case Nonlinearity::on:
            // V'(m+v) - V'(m) = (3m^2 - 1) v + 3 m v^2 + v^3
            for (std::size_t i = 0; i < n; ++i) {
                const double m = base_[i], w = v[i];
                out[i] = (base_curv_[i] + (3.0 * m + w) * w) * w;
            }
            break;
    }
}

void SpdeStepper::step(SpectralField& v, const NoiseIncrement& noise, std::size_t step_index) {
    const std::size_t m = grid_.modes();
    fft_.inverse(v.coeffs, v_real_);
    double sup = 0.0;
    for (std::size_t i = 0; i < v_real_.size(); ++i) sup = std::max(sup, std::abs(base_[i] + v_real_[i]));
    if (!(sup <= 10.0)) throw BlowUpError(step_index, static_cast<double>(step_index) * cfg_.dt, sup);
    const bool drifted = cfg_.nonlinearity != Nonlinearity::off;
    if (drifted) {
        drift(v_real_, n_real_);
        fft_.forward(n_real_, n_hat_);
    }
    const bool noisy = cfg_.epsilon > 0.0;
    if (noisy) forcing_spectrum(noise, f_hat_);
    for (std::size_t k = 0; k < m; ++k) {
        std::complex<double> z = v.coeffs[k];
        if (noisy) z += f_hat_[k];
        z *= e_[k];
        if (drifted) z -= p1_[k] * omega2_[k] * n_hat_[k];
        v.coeffs[k] = z;
    }
}

SpectralField SpdeStepper::perturbation(const GridProfile& u) {
    if (!(u.grid == grid_)) throw GridError("profile grid does not match the configuration");
    std::vector<double> v(grid_.points);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = u.values[i] - base_[i];
    SpectralField s(grid_);
    fft_.forward(v, s.coeffs);
    return s;
}

GridProfile SpdeStepper::profile(const SpectralField& v) {
    GridProfile u(grid_);
    fft_.inverse(v.coeffs, u.values);
    for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] += base_[i];
    return u;
}

GridProfile front_initial(const SimulationConfig& cfg) { return FrontProfile{}.sample(cfg.grid()); }

SpectralField step(const SpectralField& state, const NoiseIncrement& noise, const SimulationConfig& cfg) {
    SpdeStepper s(cfg);
    SpectralField out = state;
    s.step(out, noise, 0);
    return out;
}

SolutionPath simulate(const SimulationConfig& cfg, const GridProfile& u0, const SimulateOptions& opts,
                      std::uint64_t stream) {
    SpdeStepper stepper(cfg);
    for (double v : u0.values)
        if (!(std::abs(v) <= 2.0)) throw ArgumentError("simulate: initial datum must lie in [-2, 2]");
    RngStream rng = RngStream(cfg.seed).split(stream);
    SolutionPath path;
    SpectralField v = stepper.perturbation(u0);
    const std::size_t steps = cfg.steps();
    NoiseIncrement noise;
    noise.draws.assign(cfg.points, 0.0);
    auto record = [&](std::size_t n, bool force) {
        const bool snap = force || (opts.stride > 0 && n % opts.stride == 0);
        const bool obs = opts.observer && (n % std::max<std::size_t>(1, opts.observe_every) == 0 || n == steps ||
                                           std::binary_search(opts.observe_at.begin(), opts.observe_at.end(), n));
        if (!snap && !obs) return;
        GridProfile u = stepper.profile(v);
        const double t = static_cast<double>(n) * cfg.dt;
        if (obs) opts.observer(n, t, u);
        if (snap && (path.times.empty() || path.times.back() < t)) {
            path.times.push_back(t);
            path.snapshots.push_back(std::move(u));
        }
    };
    record(0, true);
    for (std::size_t n = 0; n < steps; ++n) {
        if (cfg.epsilon > 0.0) stepper.draw(rng, noise);
        if (opts.retain_forcing) path.forcing.push_back(noise);
        stepper.step(v, noise, n);
        record(n + 1, n + 1 == steps);
    }
    return path;
}

// --- Picard / Duhamel oracle ---------------------------------------------------

DuhamelSolution solve_duhamel(const DuhamelProblem& problem, const PicardOptions& opts) {
    const auto& g = problem.grid;
    const std::size_t n = g.points, m = g.modes();
    const std::size_t steps = problem.base.size() - 1;
    RealFft fft(n);
    std::vector<double> w2(m);
    std::vector<EtdWeights> wts(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double w = g.wavenumber(k);
        w2[k] = w * w;
        wts[k] = etd_weights(0.5 * w * w * w * w, problem.dt);
    }
    DuhamelSolution sol;
    sol.path.assign(steps + 1, std::vector<double>(n, 0.0));
    for (std::size_t s = 0; s <= steps; ++s) fft.inverse(problem.base[s], sol.path[s]);

    const std::size_t window = opts.window_steps == 0 ? steps : opts.window_steps;
    std::vector<std::complex<double>> integral(m, 0.0), start_integral(m, 0.0);
    std::vector<std::vector<std::complex<double>>> fhat(steps + 1, std::vector<std::complex<double>>(m));
    std::vector<double> freal(n), next(n);
    std::vector<std::complex<double>> spec(m);
    sol.converged = true;

    for (std::size_t a = 0; a < steps; a += window) {
        const std::size_t b = std::min(steps, a + window);
        // F at the window's left node is already final
        problem.nonlinearity(sol.path[a], freal);
        fft.forward(freal, fhat[a]);
        double prev = std::numeric_limits<double>::infinity();
        bool done = false;
        for (int it = 0; it < opts.max_iterations; ++it) {
            for (std::size_t s = a + 1; s <= b; ++s) {
                problem.nonlinearity(sol.path[s], freal);
                fft.forward(freal, fhat[s]);
            }
            integral = start_integral;
            double dist = 0.0;
            for (std::size_t s = a; s < b; ++s) {
                for (std::size_t k = 0; k < m; ++k) {
                    const auto& w = wts[k];
                    if (opts.rule == ProductRule::trapezoid)
                        integral[k] = w.e * integral[k] + (w.p1 - w.p2) * fhat[s][k] + w.p2 * fhat[s + 1][k];
                    else
                        integral[k] = w.e * integral[k] + w.p1 * fhat[s][k];
                    spec[k] = problem.base[s + 1][k] - w2[k] * integral[k];
                }
                fft.inverse(spec, next);
                auto& cur = sol.path[s + 1];
                for (std::size_t i = 0; i < n; ++i) {
                    dist = std::max(dist, std::abs(next[i] - cur[i]));
                    cur[i] = next[i];
                }
            }
            sol.distances.push_back(dist);
            ++sol.iterations;
            if (dist < opts.tolerance) {
                done = true;
                break;
            }
            if (opts.throw_on_growth && it >= 2 && dist > prev)
                throw HorizonTooLargeError("Picard iteration stopped contracting (distance " + std::to_string(dist) +
                                           " after " + std::to_string(prev) + ")");
            prev = dist;
        }
        if (!done) sol.converged = false;
        start_integral = integral;
    }
    return sol;
}

PicardResult picard_solve(const SimulationConfig& cfg, const GridProfile& u0, const std::vector<NoiseIncrement>& forcing,
                          double horizon, const PicardOptions& opts) {
    SimulationConfig c = cfg;
    c.horizon = horizon;
    SpdeStepper stepper(c);
    const std::size_t steps = c.steps();
    if (cfg.epsilon > 0.0 && forcing.size() < steps) throw ArgumentError("picard_solve: forcing log shorter than horizon");
    const auto& g = stepper.grid();
    const std::size_t m = g.modes();

    // q_n = E^n v0 + sqrt(eps) Y_n, with Y_{n+1} = E (Y_n + f_n)
    DuhamelProblem prob;
    prob.grid = g;
    prob.dt = c.dt;
    prob.base.assign(steps + 1, std::vector<std::complex<double>>(m));
    SpectralField v0 = stepper.perturbation(u0);
    std::vector<std::complex<double>> f(m);
    prob.base[0] = v0.coeffs;
    const auto& e = stepper.propagator();
    for (std::size_t s = 0; s < steps; ++s) {
        if (cfg.epsilon > 0.0) stepper.forcing_spectrum(forcing[s], f);
        for (std::size_t k = 0; k < m; ++k) {
            auto z = prob.base[s][k];
            if (cfg.epsilon > 0.0) z += f[k];
            prob.base[s + 1][k] = e[k] * z;
        }
    }
    prob.nonlinearity = [&stepper](const std::vector<double>& v, std::vector<double>& out) { stepper.drift(v, out); };
    auto sol = solve_duhamel(prob, opts);

    PicardResult r;
    r.distances = std::move(sol.distances);
    r.iterations = sol.iterations;
    r.converged = sol.converged;
    r.solution = GridProfile(g, std::move(sol.path.back()));
    for (std::size_t i = 0; i < g.points; ++i) r.solution.values[i] += stepper.base()[i];
    return r;
}

}  // namespace kinkflux
