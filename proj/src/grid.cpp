#include "kinkflux/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace kinkflux {

namespace {
// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

std::vector<double> PeriodicGrid::coordinates() const {
    std::vector<double> xs(points);
    for (std::size_t i = 0; i < points; ++i) xs[i] = x(i);
    return xs;
}

double PeriodicGrid::wavenumber(std::size_t k) const noexcept {
    return std::numbers::pi * static_cast<double>(k) / half_length;
}

std::size_t PeriodicGrid::nearest_index(double xv) const noexcept {
    const double period = 2.0 * half_length;
    double s = std::fmod(xv + half_length, period);
    if (s < 0) s += period;
    auto i = static_cast<std::size_t>(std::llround(s / dx()));
    return i % points;
}

double GridProfile::sup_norm() const noexcept {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double GridProfile::integral() const noexcept {
    double s = 0.0;
    for (double v : values) s += v;
    return s * grid.dx();
}

double GridProfile::mean() const noexcept {
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

RealFft::RealFft(std::size_t n) : n_(n) {
    if (n < 2) throw std::invalid_argument("RealFft: size must be >= 2");
    std::lock_guard lock(planner_mutex());
    real_ = fftw_alloc_real(n);
    complex_ = fftw_alloc_complex(n / 2 + 1);
    auto* c = static_cast<fftw_complex*>(complex_);
    plan_fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, c, FFTW_ESTIMATE);
    plan_inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), c, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() { release(); }

RealFft::RealFft(RealFft&& o) noexcept
    : n_(o.n_), real_(o.real_), complex_(o.complex_), plan_fwd_(o.plan_fwd_), plan_inv_(o.plan_inv_) {
    o.real_ = nullptr;
    o.complex_ = nullptr;
    o.plan_fwd_ = nullptr;
    o.plan_inv_ = nullptr;
}

RealFft& RealFft::operator=(RealFft&& o) noexcept {
    if (this != &o) {
        release();
        n_ = o.n_;
        real_ = std::exchange(o.real_, nullptr);
        complex_ = std::exchange(o.complex_, nullptr);
        plan_fwd_ = std::exchange(o.plan_fwd_, nullptr);
        plan_inv_ = std::exchange(o.plan_inv_, nullptr);
    }
    return *this;
}

void RealFft::release() noexcept {
    if (!real_ && !plan_fwd_) return;
    std::lock_guard lock(planner_mutex());
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_inv_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
    if (real_) fftw_free(real_);
    if (complex_) fftw_free(complex_);
    real_ = nullptr;
    complex_ = nullptr;
    plan_fwd_ = nullptr;
    plan_inv_ = nullptr;
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
    std::memcpy(real_, in.data(), n_ * sizeof(double));
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    std::memcpy(static_cast<void*>(out.data()), complex_, (n_ / 2 + 1) * sizeof(fftw_complex));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
    std::memcpy(complex_, static_cast<const void*>(in.data()), (n_ / 2 + 1) * sizeof(fftw_complex));
    fftw_execute(static_cast<fftw_plan>(plan_inv_));
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = real_[i] * scale;
}

SpectralField RealFft::forward(const GridProfile& p) {
    SpectralField s(p.grid);
    forward(p.values, s.coeffs);
    return s;
}

GridProfile RealFft::inverse(const SpectralField& s) {
    GridProfile p(s.grid);
    inverse(s.coeffs, p.values);
    return p;
}

}  // namespace kinkflux
