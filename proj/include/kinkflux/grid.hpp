#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace kinkflux {

/// Uniform periodic grid x_i = -L + i*dx on [-L, L), dx = 2L/N.
struct PeriodicGrid {
    double half_length = 0.0;
    std::size_t points = 0;

    double dx() const noexcept { return 2.0 * half_length / static_cast<double>(points); }
    double x(std::size_t i) const noexcept { return -half_length + static_cast<double>(i) * dx(); }
    std::vector<double> coordinates() const;
    /// Angular wavenumber of r2c mode k (k = 0..N/2).
    double wavenumber(std::size_t k) const noexcept;
    std::size_t modes() const noexcept { return points / 2 + 1; }
    /// Index of the node closest to x (periodically wrapped).
    std::size_t nearest_index(double x) const noexcept;

    bool operator==(const PeriodicGrid&) const = default;
};

/// Real field sampled on a periodic grid.
struct GridProfile {
    PeriodicGrid grid;
    std::vector<double> values;

    GridProfile() = default;
    explicit GridProfile(PeriodicGrid g) : grid(g), values(g.points, 0.0) {}
    GridProfile(PeriodicGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {}

    std::size_t size() const noexcept { return values.size(); }
    double sup_norm() const noexcept;
    /// Periodic trapezoid rule, i.e. dx * sum.
    double integral() const noexcept;
    double mean() const noexcept;
};

/// Half-spectrum (r2c) Fourier coefficients of a GridProfile, unnormalized forward convention.
struct SpectralField {
    PeriodicGrid grid;
    std::vector<std::complex<double>> coeffs;

    SpectralField() = default;
    explicit SpectralField(PeriodicGrid g) : grid(g), coeffs(g.modes()) {}
};

/// One-dimensional real FFT of fixed size backed by FFTW.
///
/// Plans are created with FFTW_ESTIMATE, so the same build always picks the same
/// algorithm; an instance owns its buffers and must not be shared between threads.
class RealFft {
public:
    explicit RealFft(std::size_t n);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;
    RealFft(RealFft&&) noexcept;
    RealFft& operator=(RealFft&&) noexcept;

    std::size_t size() const noexcept { return n_; }
    void forward(std::span<const double> in, std::span<std::complex<double>> out);
    /// Inverse including the 1/N normalization.
    void inverse(std::span<const std::complex<double>> in, std::span<double> out);

    SpectralField forward(const GridProfile& p);
    GridProfile inverse(const SpectralField& s);

private:
    void release() noexcept;

    std::size_t n_ = 0;
    double* real_ = nullptr;
    void* complex_ = nullptr;
    void* plan_fwd_ = nullptr;
    void* plan_inv_ = nullptr;
};

}  // namespace kinkflux
