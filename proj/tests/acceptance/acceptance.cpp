// Acceptance run: one PASS/FAIL line per criterion, with sub-results below it.
//
// Exit status is 0 whenever the run completes, whatever the verdicts; a crash or an
// unexpected exception gives a nonzero status. Pass --no-full to skip the full-preset
// ensemble of criterion 8 (several minutes on one core), --log FILE to copy the report.

#include "kinkflux/covlab.hpp"
#include "kinkflux/harness.hpp"
#include "kinkflux/kernels.hpp"
#include "kinkflux/limit.hpp"
#include "kinkflux/rng.hpp"
#include "kinkflux/spde.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

using namespace kinkflux;
namespace fs = std::filesystem;

namespace {

struct Sub {
    std::string what;
    bool pass;
    std::string detail;
    bool counted = true;
};

std::string fmt(const char* f, auto... a) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

int failures = 0;
FILE* log_file = nullptr;

void emit(const std::string& line) {
    std::fputs(line.c_str(), stdout);
    std::fflush(stdout);
    if (log_file) {
        std::fputs(line.c_str(), log_file);
        std::fflush(log_file);
    }
}

void criterion(int id, const char* title, double budget, const std::function<std::vector<Sub>()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Sub> subs;
    try {
        subs = body();
    } catch (const std::exception& e) {
        subs.push_back({"exception", false, e.what()});
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = !subs.empty();
    for (const auto& s : subs) ok = ok && (s.pass || !s.counted);
    if (!ok) ++failures;
    emit(fmt("%s  %2d %s  [%.1f s, budget %.0f s]\n", ok ? "PASS" : "FAIL", id, title, sec, budget));
    for (const auto& s : subs)
        emit(fmt("        %-6s %s: ", !s.counted ? "info" : s.pass ? "ok" : "fail", s.what.c_str()) + s.detail + "\n");
}

const CheckRow* find_row(const std::vector<CheckRow>& rows, const std::string& name) {
    for (const auto& r : rows)
        if (r.name == name) return &r;
    return nullptr;
}

Sub from_row(const std::vector<CheckRow>& rows, const std::string& name) {
    const auto* r = find_row(rows, name);
    if (!r) return {name, false, "missing"};
    return {name + (r->parameter.empty() ? "" : " " + r->parameter), r->pass,
            fmt("computed %.8g, reference %.8g, residual %.3g, tol %.3g", r->computed, r->reference, r->gap, r->tolerance)};
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    bool full = true;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--no-full") == 0) full = false;
        if (std::strcmp(argv[i], "--log") == 0 && i + 1 < argc) log_file = std::fopen(argv[++i], "w");
    }
    const fs::path scratch = fs::temp_directory_path() / "kinkflux_acceptance";
    fs::remove_all(scratch);

    const TimeGrid grid4{{0.25, 0.5, 1.0, 2.0}};
    const auto target4 = cov_r_matrix(grid4.times);

    criterion(1, "limit-process covariance, three representations", 120, [&] {
        std::vector<Sub> out;
        const std::size_t n = 20000;
        for (int k = 0; k < 3; ++k) {
            const auto b = k == 0 ? sample_fbm_odd(grid4, n, 101) : k == 1 ? sample_heat_origin(grid4, n, 102)
                                                                          : sample_volterra(grid4, n, 103);
            const auto c = compare_covariance(b, target4);
            out.push_back({to_string(b.representation), c.max_abs_z <= 3.0, fmt("max |z| = %.2f over 10 entries", c.max_abs_z)});
        }
        return out;
    });

    criterion(2, "representation constants", 1, [&] {
        std::vector<Sub> out;
        const double v = volterra_kernel_covariance(1.0, 1.0);
        out.push_back({"c^2 int u^1/2 (1-u^2)^-1/2", std::abs(v - std::sqrt(2.0)) <= 1e-6, fmt("%.12f vs sqrt 2", v)});
        RngStream rng(7, 0);
        double worst = 0.0;
        for (int i = 0; i < 5; ++i) {
            const double t = 0.1 + 3.0 * rng.uniform(), s = 0.1 + 3.0 * rng.uniform();
            worst = std::max(worst, std::abs(2.0 * (fbm_cov(t, s, 0.25) - fbm_cov(t, -s, 0.25)) - cov_r(t, s)));
        }
        out.push_back({"4 x odd-part fBM covariance", worst <= 1e-10, fmt("max gap %.2e at 5 pairs", worst)});
        HeatTorusConfig torus;
        const auto h = heat_scheme_covariance(grid4.times, torus);
        const double gap = sup_diff(h.data, target4.data);
        out.push_back({"heat-kernel covariance", gap <= 1e-6, fmt("max gap %.2e", gap)});
        return out;
    });

    criterion(3, "self-similarity of order 1/4", 60, [&] {
        std::vector<Sub> out;
        const auto b = sample_fbm_odd(TimeGrid{{1.0, 4.0}}, 20000, 301);
        const auto r = variance_ratio(b, 4.0, 1.0);
        const double z = (r.value - 2.0) / r.standard_error;
        out.push_back({"Var r(4) / Var r(1)", std::abs(z) <= 3.0, fmt("%.4f +- %.4f (z = %.2f)", r.value, r.standard_error, z)});
        RngStream rng(8, 0);
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
            const double t = 5.0 * rng.uniform(), s = 5.0 * rng.uniform();
            worst = std::max(worst, std::abs(cov_r(4 * t, 4 * s) - 2.0 * cov_r(t, s)) / std::max(1.0, cov_r(t, s)));
        }
        out.push_back({"cov_r(4t,4s) = 2 cov_r(t,s)", worst <= 4.0 * std::numeric_limits<double>::epsilon(),
                       fmt("max relative gap %.2e at 10 pairs", worst)});
        return out;
    });

    criterion(4, "negative increment correlation", 180, [&] {
        std::vector<Sub> out;
        const double a = cov_r(1, 2) - cov_r(1, 1.5) - cov_r(0.5, 2) + cov_r(0.5, 1.5);
        out.push_back({"analytic", std::abs(a + 0.0841) <= 1e-4, fmt("%.6f vs -0.0841", a)});
        const auto b = sample_fbm_odd(TimeGrid{{0.5, 1.0, 1.5, 2.0}}, 100000, 401);
        const auto e = increment_covariance(b, 0.5, 1.0, 1.5, 2.0);
        const double z = e.value / e.standard_error;
        out.push_back({"empirical, 1e5 paths", e.value < 0.0 && std::abs(z) >= 2.0,
                       fmt("%.5f +- %.5f (z = %.1f)", e.value, e.standard_error, z)});
        return out;
    });

    criterion(5, "kernel identities and residual envelopes", 120, [&] {
        const auto rows = kernel_check_battery();
        std::vector<Sub> out;
        for (const char* n : {"phi_mass", "G_semigroup", "Kinf_semigroup", "K_semigroup", "front_mode_norm",
                              "K_small_time_residual", "K_long_time_residual"})
            out.push_back(from_row(rows, n));
        for (const auto& r : rows)
            if (!r.counted || !r.pass) {
                auto s = from_row({r}, r.name);
                if (r.name == "K_long_time_residual") continue;
                s.counted = false;
                out.push_back(s);
            }
        return out;
    });

    criterion(6, "noise-covariance exponents", 300, [&] {
        const auto rows = cov_check_battery(true);
        std::vector<Sub> out;
        for (const auto& r : rows)
            if (r.name == "EY2") out.push_back(from_row({r}, "EY2"));
        out.push_back(from_row(rows, "EH2_dominant_slope"));
        out.push_back(from_row(rows, "Y_temporal_exponent"));
        const auto* raw = find_row(rows, "EH2_raw_slope");
        if (raw) out.push_back({"plain log-log slope of E H^2", true, fmt("%.4f over [1e2, 1e4]", raw->computed), false});
        return out;
    });

    criterion(7, "decomposition and scaled limit", 600, [&] {
        std::vector<Sub> out;
        const double ref = 1.0 / (2.0 * std::sqrt(std::numbers::pi));
        const double an = h2_covariance(1.0, 1.0);
        out.push_back({"E h2(1)^2 analytic", std::abs(an - 0.282095) <= 1e-6, fmt("%.9f", an)});
        const auto h = sample_h2(TimeGrid{{1.0}}, 20000, 701);
        double s = 0.0;
        std::vector<double> sq(h.batch.paths());
        for (std::size_t p = 0; p < sq.size(); ++p) sq[p] = h.batch.samples(p, 1) * h.batch.samples(p, 1);
        for (double v : sq) s += v;
        const double mean = s / sq.size();
        double ss = 0.0;
        for (double v : sq) ss += (v - mean) * (v - mean);
        const double se = std::sqrt(ss / (sq.size() - 1) / sq.size());
        out.push_back({"E h2(1)^2 empirical, 2e4 paths", std::abs(mean - ref) <= 3.0 * se,
                       fmt("%.5f +- %.5f vs %.6f", mean, se, ref)});
        const auto lo = asymptotic_check(0.0, 0.0, 2.0, 1.0, 1e-2, 0.5);
        const auto hi = asymptotic_check(0.0, 0.0, 2.0, 1.0, 1e-3, 0.5);
        out.push_back({"asymptotic gap at (0,0,2,1)", hi.gap < lo.gap,
                       fmt("rhs %.10f; lhs %.6f (eps 1e-2, gap %.3f) -> %.6f (eps 1e-3, gap %.3f)", lo.rhs, lo.lhs,
                           lo.gap, hi.lhs, hi.gap)});
        return out;
    });

    criterion(8, "front fluctuations: reduced and full presets", full ? 14400 : 600, [&] {
        std::vector<Sub> out;
        auto cfg = preset_config(Preset::reduced);
        const auto s = run_ensemble(cfg);
        for (const auto& c : ensemble_criteria(s)) out.push_back({"reduced " + c.name, c.pass, c.detail});
        if (!full) {
            out.push_back({"full preset", false, "skipped (--no-full)"});
            return out;
        }
        std::vector<ScalingPoint> pts;
        EnsembleSummary last;
        for (double eps : full_preset_epsilons()) {
            const auto t0 = std::chrono::steady_clock::now();
            auto c = preset_config(Preset::full, eps);
            c.out_dir = (scratch / fmt("full_eps_%g", eps)).string();
            last = run_ensemble(c);
            const double sc = std::pow(eps, c.rescale_exponent());
            const std::size_t j = last.times.size() - 1;
            pts.push_back({eps, last.variance[j] / (sc * sc), last.variance_se[j] / (sc * sc)});
            const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            out.push_back({fmt("full eps %g", eps), true,
                           fmt("%zu/%zu paths used, Var zeta = %.4g +- %.2g, Var X(1) = %.4g, %.0f s", last.paths_used(),
                               last.paths_in, pts.back().variance, pts.back().standard_error, last.variance[j], sec),
                           false});
            for (const auto& k : ensemble_criteria(last))
                out.push_back({fmt("full eps %g ", eps) + k.name, k.pass, k.detail, false});
        }
        const auto fit = scaling_fit(pts, cfg.gamma);
        out.push_back({"full scaling slope", std::abs(fit.slope - 0.75) <= 0.1,
                       fmt("%.4f +- %.4f vs 0.75", fit.slope, fit.slope_se)});
        const double vx = last.variance.back();
        const double target = 4.0 * std::sqrt(std::numbers::pi);
        out.push_back({"full Var X(1) near 4 sqrt(pi)", std::abs(vx - target) <= 0.25 * target,
                       fmt("%.4g +- %.2g vs %.4f (matched-eps prediction %.4g)", vx, last.variance_se.back(), target,
                           last.matched_variance.back())});
        return out;
    });

    criterion(9, "oracle equivalence", 120, [&] {
        std::vector<Sub> out;
        SimulationConfig c;
        c.half_length = 16.0;
        c.points = 512;
        c.dt = 1e-3;
        c.horizon = 0.1;
        c.allow_small_box = true;
        for (double eps : {1e-2, 1e-3}) {
            c.epsilon = eps;
            const auto u0 = front_initial(c);
            SimulateOptions o;
            o.retain_forcing = true;
            const auto path = simulate(c, u0, o);
            const auto r = picard_solve(c, u0, path.forcing, 0.1);
            const double d = sup_diff(r.solution.values, path.snapshots.back().values);
            out.push_back({fmt("Picard vs stepper, eps %g, t = 0.1", eps), r.converged && d <= 1e-4,
                           fmt("sup error %.2e after %d iterations", d, r.iterations)});
        }
        SimulationConfig h;
        h.half_length = 32.0;
        h.points = 1024;
        h.dt = 0.01;
        h.epsilon = 1e-2;
        h.horizon = 5.0;
        h.seed = 11;
        h.allow_small_box = true;
        SimulateOptions o;
        o.retain_forcing = true;
        const auto path = simulate(h, front_initial(h), o);
        const auto fixed = h_from_y(replay_y(h, path.forcing));
        const auto direct = direct_h(h, path.forcing);
        double d = 0.0;
        for (std::size_t n = 0; n < direct.size(); ++n) d = std::max(d, sup_diff(fixed.path[n].values, direct[n].values));
        out.push_back({"h_from_y vs direct H, t <= 5", d <= 1e-3, fmt("sup error %.2e", d)});
        return out;
    });

    criterion(10, "determinism and worker-count independence", 300, [&] {
        std::vector<Sub> out;
        auto base = preset_config(Preset::reduced);
        base.paths = 8;
        std::vector<std::string> bodies;
        std::vector<std::size_t> workers{1, 1, 4, 8};
        for (std::size_t k = 0; k < workers.size(); ++k) {
            auto c = base;
            c.threads = workers[k];
            const auto s = run_ensemble(c);
            const auto dir = scratch / fmt("det_%zu", k);
            write_report(s, dir, ensemble_criteria(s));
            std::string all;
            for (const auto& e : fs::directory_iterator(dir))
                if (e.path().extension() == ".csv") all += e.path().filename().string() + read_text(e.path());
            bodies.push_back(all);
        }
        out.push_back({"repeat run, 1 worker", bodies[0] == bodies[1], fmt("%zu bytes of CSV", bodies[0].size())});
        out.push_back({"1 vs 4 vs 8 workers", bodies[0] == bodies[2] && bodies[0] == bodies[3], ""});
        SamplerOptions one, eight;
        eight.threads = 8;
        const bool same = sample_volterra(grid4, 500, 9, 256, one).samples.data ==
                          sample_volterra(grid4, 500, 9, 256, eight).samples.data;
        out.push_back({"limit sampler, 1 vs 8 workers", same, ""});
        return out;
    });

    emit(fmt("%d of 10 criteria failed\n", failures));
    if (log_file) std::fclose(log_file);
    return 0;
}
