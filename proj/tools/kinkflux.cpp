// kinkflux command-line driver.
#include "kinkflux/covlab.hpp"
#include "kinkflux/error.hpp"
#include "kinkflux/front.hpp"
#include "kinkflux/harness.hpp"
#include "kinkflux/io.hpp"
#include "kinkflux/limit.hpp"
#include "kinkflux/parallel.hpp"
#include "kinkflux/spde.hpp"
#include "kinkflux/version.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace kinkflux;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::string preset = "reduced";
    std::string out;
    std::size_t threads = 0;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "key/value config file (TOML syntax)")->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "root seed");
    app->add_option("--paths", c.paths, "number of paths");
    app->add_option("--preset", c.preset, "reduced|full")->check(CLI::IsMember({"reduced", "full"}));
    app->add_option("--out", c.out, "output directory");
    app->add_option("--threads", c.threads, "worker threads (0: hardware)")->envname("KINKFLUX_THREADS");
}

ExperimentConfig experiment(const Common& c, double epsilon = 1e-2) {
    ExperimentConfig cfg = preset_config(parse_preset(c.preset), epsilon);
    if (!c.config.empty()) cfg = load_experiment(ConfigFile::load(c.config), cfg);
    if (c.seed) cfg.sim.seed = *c.seed;
    if (c.paths) cfg.paths = *c.paths;
    if (!c.out.empty()) cfg.out_dir = c.out;
    cfg.threads = c.threads;
    cfg.finalize();
    return cfg;
}

std::string hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

int check_exit(const std::vector<CheckRow>& rows) {
    std::size_t failed = 0;
    for (const auto& r : rows) {
        std::printf("%-4s %-40s %-30s gap=%.3g tol=%.3g%s\n", r.pass ? "ok" : "FAIL", r.name.c_str(),
                    r.parameter.c_str(), r.gap, r.tolerance, r.counted ? "" : "  [diagnostic]");
        if (r.counted && !r.pass) ++failed;
    }
    std::printf("%zu of %zu counted checks failed\n", failed, rows.size());
    return failed ? 2 : 0;
}

int run_simulate(const Common& c) {
    const auto cfg = experiment(c);
    const fs::path dir = cfg.out_dir;
    const std::size_t steps = cfg.sim.steps();
    SimulateOptions o;
    o.stride = std::max<std::size_t>(1, steps / 100);
    o.observe_every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.tube_every / cfg.sim.dt)));
    CsvBuilder centers({"step", "time", "center", "residual", "manifold_distance"});
    o.observer = [&](std::size_t n, double t, const GridProfile& u) {
        CenterOptions co;
        co.delta0 = cfg.delta0;
        const auto r = center(u, co);
        centers.row(std::vector<std::string>{std::to_string(n), format_double(t), format_double(r.center),
                                             format_double(r.residual), format_double(r.manifold_distance)});
    };
    std::string status = "ok";
    SolutionPath path;
    try {
        path = simulate(cfg.sim, front_initial(cfg.sim), o, 0);
    } catch (const BlowUpError& e) {
        status = std::string("blow_up: ") + e.what();
    } catch (const OutOfTubeError& e) {
        status = std::string("out_of_tube: ") + e.what();
    } catch (const NotNearFrontError& e) {
        status = std::string("not_near_front: ") + e.what();
    }
    write_csv(dir / "centers.csv", centers.table());
    SnapshotFile snap;
    snap.config_hash = cfg.sim.hash();
    snap.grid = cfg.sim.grid();
    snap.times = path.times;
    for (const auto& s : path.snapshots) snap.frames.push_back(s.values);
    write_snapshot(dir / "snapshots.kfx", snap);
    nlohmann::ordered_json m;
    m["tool"] = "kinkflux";
    m["command"] = "simulate";
    m["version"] = std::string(version);
    m["status"] = status;
    m["config_hash"] = hex(cfg.sim.hash());
    m["seed"] = cfg.sim.seed;
    m["epsilon"] = cfg.sim.epsilon;
    m["horizon"] = cfg.sim.horizon;
    m["frames"] = snap.frames.size();
    m["files"] = {"centers.csv", "snapshots.kfx"};
    write_text(dir / "manifest.json", m.dump(2) + "\n");
    std::printf("%s: %zu frames, %zu center samples -> %s\n", status.c_str(), snap.frames.size(),
                centers.table().rows.size(), dir.string().c_str());
    return status == "ok" ? 0 : 2;
}

int run_limit_sample(const Common& c, const std::string& rep, const std::vector<double>& times) {
    const TimeGrid grid{times};
    grid.validate();
    const std::size_t paths = c.paths.value_or(20000);
    const std::uint64_t seed = c.seed.value_or(1);
    SamplerOptions so;
    so.threads = resolve_threads(c.threads);
    GaussianPathBatch batch;
    double prefactor = 1.0;
    if (rep == "fbm_odd") {
        batch = sample_fbm_odd(grid, paths, seed, so);
    } else if (rep == "heat") {
        batch = sample_heat_origin(grid, paths, seed, {}, so);
    } else if (rep == "volterra") {
        batch = sample_volterra(grid, paths, seed, 1024, so);
    } else if (rep == "cholesky") {
        batch = sample_cholesky_reference(grid, paths, seed, so);
    } else {
        H2LatticeOptions ho;
        ho.threads = so.threads;
        batch = sample_h2(grid, paths, seed, CutoffFunction::identity(), ho).batch;
        prefactor = 1.0 / std::sqrt(8.0 * std::numbers::pi);
    }
    const auto cmp = compare_covariance(batch, cov_r_matrix(times), prefactor);
    CsvBuilder b({"t", "t_prime", "empirical", "standard_error", "analytic", "z"});
    const std::size_t n = cmp.times.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            b.row(std::vector<double>{cmp.times[i], cmp.times[j], cmp.empirical(i, j), cmp.standard_error(i, j),
                                      cmp.target(i, j), cmp.z(i, j)});
    const fs::path dir = c.out.empty() ? fs::path("kinkflux-out") : fs::path(c.out);
    write_csv(dir / "limit_covariance.csv", b.table());
    nlohmann::ordered_json m;
    m["representation"] = to_string(batch.representation);
    m["paths"] = paths;
    m["seed"] = seed;
    m["times"] = times;
    m["max_abs_z"] = cmp.max_abs_z;
    m["within_3se"] = cmp.max_abs_z <= 3.0;
    write_text(dir / "limit_summary.json", m.dump(2) + "\n");
    std::printf("%s: %zu paths, max |z| = %.2f\n", to_string(batch.representation).c_str(), paths, cmp.max_abs_z);
    return 0;
}

int run_ensemble_cmd(const Common& c) {
    const bool full = c.preset == "full" && c.config.empty();
    if (!full) {
        const auto cfg = experiment(c);
        const auto s = run_ensemble(cfg);
        const auto crit = ensemble_criteria(s);
        write_report(s, cfg.out_dir, crit);
        for (const auto& r : crit) std::printf("%-4s %s: %s\n", r.pass ? "ok" : "FAIL", r.name.c_str(), r.detail.c_str());
        return 0;
    }
    const fs::path root = c.out.empty() ? fs::path("kinkflux-out") : fs::path(c.out);
    std::vector<ScalingPoint> points;
    std::vector<EnsembleSummary> runs;
    for (double eps : full_preset_epsilons()) {
        auto cfg = experiment(c, eps);
        char sub[32];
        std::snprintf(sub, sizeof sub, "eps_%g", eps);
        cfg.out_dir = (root / sub).string();
        std::printf("epsilon %g: %zu paths to physical time %g\n", eps, cfg.paths, cfg.sim.horizon);
        std::fflush(stdout);
        runs.push_back(run_ensemble(cfg));
        const auto& s = runs.back();
        write_report(s, cfg.out_dir, ensemble_criteria(s));
        const std::size_t j = s.times.size() - 1;
        const double sc = std::pow(eps, cfg.rescale_exponent());
        points.push_back({eps, s.variance[j] / (sc * sc), s.variance_se[j] / (sc * sc)});
    }
    const auto fit = scaling_fit(points, runs.front().config.gamma);
    const auto& last = runs.back();
    std::vector<CriterionResult> crit = ensemble_criteria(last);
    char buf[160];
    std::snprintf(buf, sizeof buf, "slope %.4f +- %.4f (target %.2f)", fit.slope, fit.slope_se, fit.target);
    crit.push_back({"scaling_slope", std::abs(fit.slope - fit.target) <= 0.1, buf});
    const double vx = last.variance.back();
    const double lim = last.limit_variance.back();
    std::snprintf(buf, sizeof buf, "Var X(1) = %.4g vs %.4g", vx, lim);
    crit.push_back({"variance_near_limit", std::abs(vx - lim) <= 0.25 * lim, buf});
    write_report(last, root, crit, fit);
    for (const auto& r : crit) std::printf("%-4s %s: %s\n", r.pass ? "ok" : "FAIL", r.name.c_str(), r.detail.c_str());
    return 0;
}

int run_report(const Common& c) {
    const fs::path dir = c.out.empty() ? fs::path("kinkflux-out") : fs::path(c.out);
    const auto m = nlohmann::json::parse(read_text(dir / "manifest.json"));
    std::ostringstream os;
    os << "kinkflux " << m.value("version", "?") << " run " << m.value("config_hash", "?") << " ("
       << m.value("status", "?") << ")\n";
    if (m.contains("config"))
        os << "epsilon " << m["config"].value("epsilon", 0.0) << ", gamma " << m["config"].value("gamma", 0.0)
           << ", seed " << m["config"].value("seed", 0ull) << "\n";
    if (m.contains("paths"))
        os << "paths: " << m["paths"].value("in", 0) << " in, " << m["paths"].value("used", 0) << " used, "
           << m["paths"].value("excluded", 0) << " excluded\n";
    if (fs::exists(dir / "variance.csv")) {
        const auto v = read_csv(dir / "variance.csv");
        char line[200];
        os << "      t     Var X        SE   matched      z\n";
        for (std::size_t r = 0; r < v.rows.size(); ++r) {
            std::snprintf(line, sizeof line, "%7g %9.4g %9.3g %9.4g %6.2f\n", v.number(r, "t"), v.number(r, "var_x"),
                          v.number(r, "var_x_se"), v.number(r, "matched_var_x"), v.number(r, "z_matched"));
            os << line;
        }
    }
    if (m.contains("scaling"))
        os << "scaling slope " << m["scaling"].value("slope", 0.0) << " (target " << m["scaling"].value("target", 0.0)
           << ")\n";
    for (const auto& cr : m.value("criteria", nlohmann::json::array()))
        os << (cr.value("pass", false) ? "ok   " : "FAIL ") << cr.value("name", "") << ": " << cr.value("detail", "")
           << "\n";
    write_text(dir / "report.txt", os.str());
    std::cout << os.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kinkflux: front fluctuations of the stochastic Cahn-Hilliard equation"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);

    Common common;
    auto* sim = app.add_subcommand("simulate", "one SPDE path: snapshots and center series");
    add_common(sim, common);

    std::string rep = "fbm_odd";
    std::vector<double> times{0.25, 0.5, 1.0, 2.0};
    auto* lim = app.add_subcommand("limit-sample", "sample the limit process and compare covariances");
    add_common(lim, common);
    lim->add_option("--representation", rep, "fbm_odd|heat|volterra|cholesky|h2")
        ->check(CLI::IsMember({"fbm_odd", "heat", "volterra", "cholesky", "h2"}));
    lim->add_option("--times", times, "observation times")->delimiter(',');

    auto* cov = app.add_subcommand("cov-check", "covariance quadrature battery (full preset adds the stitch)");
    add_common(cov, common);
    auto* ker = app.add_subcommand("kernel-check", "kernel identity battery");
    add_common(ker, common);
    auto* ens = app.add_subcommand("ensemble", "Monte Carlo ensemble and report");
    add_common(ens, common);
    auto* rpt = app.add_subcommand("report", "summarize a finished ensemble directory (--out)");
    add_common(rpt, common);

    CLI11_PARSE(app, argc, argv);

    try {
        const fs::path out = common.out.empty() ? fs::path("kinkflux-out") : fs::path(common.out);
        if (*sim) return run_simulate(common);
        if (*lim) return run_limit_sample(common, rep, times);
        if (*cov) {
            const auto rows = cov_check_battery(common.preset != "full");
            write_csv(out / "cov_check.csv", cov_check_table(rows));
            return check_exit(rows);
        }
        if (*ker) {
            const auto rows = kernel_check_battery();
            write_csv(out / "kernel_check.csv", kernel_check_table(rows));
            return check_exit(rows);
        }
        if (*ens) return run_ensemble_cmd(common);
        if (*rpt) return run_report(common);
    } catch (const std::exception& e) {
        std::cerr << "kinkflux: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
