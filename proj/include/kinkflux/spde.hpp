#pragma once

#include "kinkflux/grid.hpp"
#include "kinkflux/kernels.hpp"
#include "kinkflux/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kinkflux {

enum class Nonlinearity {
    on,          ///< full V'(u)
    off,         ///< pure biharmonic drift on the perturbation
    linearized,  ///< V''(m) v
};
std::string to_string(Nonlinearity n);
Nonlinearity parse_nonlinearity(const std::string& s);

struct SimulationConfig {
    double half_length = 64.0;
    std::size_t points = 2048;
    double dt = 0.01;
    double epsilon = 0.01;
    double beta = 2.5;
    double horizon = 1.0;  ///< physical time eps^-gamma T
    std::uint64_t seed = 1;
    Nonlinearity nonlinearity = Nonlinearity::on;
    /// Noise support clamped to this fraction of L (desk-scale stand-in for eps^-beta).
    double cutoff_fraction = 0.8;
    bool unit_cutoff = false;
    /// Skip the 8 T^{1/4} <= L box check (small oracle runs on purpose use small boxes).
    bool allow_small_box = false;

    PeriodicGrid grid() const { return PeriodicGrid{half_length, points}; }
    CutoffFunction cutoff() const;
    std::size_t steps() const;
    void validate() const;
    std::uint64_t hash() const;
};

/// Per-cell draws for one step, variance dt/dx, living on midpoints x_i + dx/2.
struct NoiseIncrement {
    std::vector<double> draws;
};

struct SolutionPath {
    std::vector<double> times;
    std::vector<GridProfile> snapshots;
    /// Retained draws, one block per step (empty unless requested).
    std::vector<NoiseIncrement> forcing;
};

/// Semi-implicit spectral stepper for the perturbation v = u - m of the kink.
///
/// Update: v^ <- E (v^ + f^) + P1 * (-w^2 N(v)^),  E = exp(-dt w^4 / 2),
/// P1 = (1 - E) / (w^4 / 2), with N(v) = V'(m + v) - V'(m). The forcing f is the
/// staggered difference of the cut-off noise, so its zero mode vanishes exactly and the
/// spatial mean of v never changes.
class SpdeStepper {
public:
    explicit SpdeStepper(const SimulationConfig& cfg);

    const SimulationConfig& config() const noexcept { return cfg_; }
    const PeriodicGrid& grid() const noexcept { return grid_; }

    void draw(RngStream& rng, NoiseIncrement& noise) const;
    /// Real-space forcing increment sqrt(eps) D^-(a * xi) / dx.
    void forcing(const NoiseIncrement& noise, std::vector<double>& out) const;
    /// Spectrum of the forcing, zero mode set to 0.
    void forcing_spectrum(const NoiseIncrement& noise, std::vector<std::complex<double>>& out);

    /// N(v) for the configured nonlinearity mode.
    void drift(const std::vector<double>& v, std::vector<double>& out) const;

    /// One step in place; throws BlowUpError if sup|m + v| > 10.
    void step(SpectralField& v, const NoiseIncrement& noise, std::size_t step_index);

    SpectralField perturbation(const GridProfile& u);
    GridProfile profile(const SpectralField& v);
    /// Last real-space perturbation computed by step().
    const std::vector<double>& last_perturbation() const noexcept { return v_real_; }

    const std::vector<double>& base() const noexcept { return base_; }
    const std::vector<double>& propagator() const noexcept { return e_; }

private:
    SimulationConfig cfg_;
    PeriodicGrid grid_;
    double sqrt_eps_;
    std::vector<double> base_, base_curv_, amp_mid_;
    std::vector<double> omega2_, e_, p1_;
    RealFft fft_;
    std::vector<double> v_real_, n_real_, f_real_;
    std::vector<std::complex<double>> n_hat_, f_hat_;
};

/// Initial datum m = tanh on the grid (tails are +-1 to double precision).
GridProfile front_initial(const SimulationConfig& cfg);

/// One step of the stepper (constructs a stepper; convenient, not fast).
SpectralField step(const SpectralField& state, const NoiseIncrement& noise, const SimulationConfig& cfg);

struct SimulateOptions {
    std::size_t stride = 0;  ///< snapshot every `stride` steps (0: first and last only)
    bool retain_forcing = false;
    /// Called for every step index n (time n dt), including n = 0, with u = m + v.
    std::function<void(std::size_t, double, const GridProfile&)> observer;
    std::size_t observe_every = 1;
    /// Extra step indices passed to the observer (sorted ascending).
    std::vector<std::size_t> observe_at;
};

/// Integrate from u0 to cfg.horizon using the stream (cfg.seed, stream).
SolutionPath simulate(const SimulationConfig& cfg, const GridProfile& u0, const SimulateOptions& opts = {},
                      std::uint64_t stream = 0);

enum class ProductRule { trapezoid, left_point };

struct PicardOptions {
    double tolerance = 1e-10;
    int max_iterations = 50;
    // Left-point matches the Ito reading of the stepper; trapezoid is kept for comparison.
    ProductRule rule = ProductRule::left_point;
    /// Iterate window by window (0: whole horizon at once).
    std::size_t window_steps = 0;
    bool throw_on_growth = true;
};

struct PicardResult {
    GridProfile solution;                    ///< u(., horizon)
    std::vector<double> distances;           ///< sup distance between successive iterates
    int iterations = 0;
    bool converged = false;
};

/// Fixed point of u = g u0 + G(V'(u)) + sqrt(eps) Y on the periodic grid.
///
/// Works on v = u - m in Fourier space; g and G use the free-kernel multiplier
/// exp(-t w^4 / 2), time integrals are product-integrated with exact exponential weights,
/// and Y is replayed from the logged draws exactly as the stepper injects them.
PicardResult picard_solve(const SimulationConfig& cfg, const GridProfile& u0, const std::vector<NoiseIncrement>& forcing,
                          double horizon, const PicardOptions& opts = {});

/// Generic Duhamel fixed point  v_n = q_n + (-w^2) int_0^{t_n} e^{-(t_n - s) w^4/2} F(v(s)) ds.
///
/// `base` holds q^ for n = 0..M; the returned vector holds v (real space) for n = 0..M.
struct DuhamelProblem {
    PeriodicGrid grid;
    double dt = 0.0;
    std::vector<std::vector<std::complex<double>>> base;
    std::function<void(const std::vector<double>&, std::vector<double>&)> nonlinearity;
};
struct DuhamelSolution {
    std::vector<std::vector<double>> path;
    std::vector<double> distances;
    int iterations = 0;
    bool converged = false;
};
DuhamelSolution solve_duhamel(const DuhamelProblem& problem, const PicardOptions& opts);

}  // namespace kinkflux
