#include "kinkflux/harness.hpp"

#include "kinkflux/covlab.hpp"
#include "kinkflux/error.hpp"
#include "kinkflux/front.hpp"
#include "kinkflux/parallel.hpp"
#include "kinkflux/rng.hpp"
#include "kinkflux/version.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <ctime>
#include <numbers>

#include "json.hpp"

namespace kinkflux {

namespace {

constexpr double pi = std::numbers::pi;

double eps_power(double eps, double p) { return eps > 0.0 ? std::pow(eps, p) : 0.0; }

}  // namespace

std::string to_string(Preset p) { return p == Preset::reduced ? "reduced" : "full"; }

Preset parse_preset(const std::string& s) {
    if (s == "reduced") return Preset::reduced;
    if (s == "full") return Preset::full;
    throw ConfigError("unknown preset '" + s + "' (expected reduced or full)");
}

std::string to_string(ExclusionReason r) {
    switch (r) {
        case ExclusionReason::blow_up: return "blow_up";
        case ExclusionReason::out_of_tube: return "out_of_tube";
        case ExclusionReason::not_near_front: return "not_near_front";
    }
    return "unknown";
}

// --- config --------------------------------------------------------------------------------

double ExperimentConfig::time_scale() const { return sim.epsilon > 0.0 ? std::pow(sim.epsilon, -gamma) : 1.0; }

double ExperimentConfig::rescale_exponent() const { return -0.5 + gamma / 4.0; }

void ExperimentConfig::finalize() {
    times.validate();
    sim.horizon = time_scale() * times.times.back();
    validate();
}

void ExperimentConfig::validate() const {
    if (!(gamma >= 0.0 && gamma < 2.0 / 3.0)) throw ConfigError("gamma must lie in [0, 2/3)");
    times.validate();
    sim.validate();
    if (!(eta >= 0.0)) throw ConfigError("eta must be non-negative");
    if (!(tube_every > 0.0)) throw ConfigError("tube_every must be positive");
    if (!(delta0 > 0.0)) throw ConfigError("delta0 must be positive");
    if (time_scale() * times.times.back() > sim.horizon + 0.5 * sim.dt)
        throw ConfigError("horizon shorter than eps^-gamma max(times)");
}

std::vector<std::size_t> ExperimentConfig::observation_steps() const {
    std::vector<std::size_t> out;
    for (double t : times.times) out.push_back(static_cast<std::size_t>(std::llround(time_scale() * t / sim.dt)));
    return out;
}

std::uint64_t ExperimentConfig::hash() const {
    std::uint64_t h = sim.hash();
    auto mixd = [&](double v) { h = mix64(h ^ std::bit_cast<std::uint64_t>(v)); };
    mixd(gamma);
    for (double t : times.times) mixd(t);
    h = mix64(h ^ paths);
    mixd(eta);
    mixd(tube_every);
    mixd(delta0);
    return h;
}

std::vector<double> full_preset_epsilons() { return {1e-2, 3e-3, 1e-3}; }

ExperimentConfig preset_config(Preset p, double epsilon) {
    ExperimentConfig c;
    c.sim.half_length = 64.0;
    c.sim.points = 2048;
    c.sim.dt = 0.01;
    c.sim.epsilon = epsilon;
    c.sim.beta = 2.5;
    c.sim.seed = 20240601;
    c.gamma = 0.5;
    c.times = TimeGrid{{0.25, 0.5, 1.0}};
    c.paths = p == Preset::reduced ? 50 : 400;
    c.reduced = p == Preset::reduced;
    c.finalize();
    return c;
}

ExperimentConfig load_experiment(const ConfigFile& f, ExperimentConfig c) {
    auto num = [&](const char* k, double& dst) {
        if (f.has(k)) dst = f.number(k);
    };
    auto count = [&](const char* k, std::size_t& dst) {
        if (!f.has(k)) return;
        const auto v = f.integer(k);
        if (v < 0) throw ConfigError(std::string(k) + " must be non-negative");
        dst = static_cast<std::size_t>(v);
    };
    num("half_length", c.sim.half_length);
    count("points", c.sim.points);
    num("dt", c.sim.dt);
    num("epsilon", c.sim.epsilon);
    num("beta", c.sim.beta);
    if (f.has("seed")) c.sim.seed = static_cast<std::uint64_t>(f.integer("seed"));
    if (f.has("nonlinearity")) c.sim.nonlinearity = parse_nonlinearity(f.string("nonlinearity"));
    num("cutoff_fraction", c.sim.cutoff_fraction);
    if (f.has("unit_cutoff")) c.sim.unit_cutoff = f.boolean("unit_cutoff");
    num("gamma", c.gamma);
    if (f.has("times")) c.times.times = f.numbers("times");
    count("paths", c.paths);
    if (f.has("out_dir")) c.out_dir = f.string("out_dir");
    if (f.has("reduced")) c.reduced = f.boolean("reduced");
    count("threads", c.threads);
    num("eta", c.eta);
    num("tube_every", c.tube_every);
    num("delta0", c.delta0);
    const auto extra = f.unused();
    if (!extra.empty()) throw ConfigError("unknown config key '" + extra.front() + "'");
    c.finalize();
    return c;
}

// --- ensemble ------------------------------------------------------------------------------

double EnsembleSummary::exclusion_fraction() const noexcept {
    return paths_in == 0 ? 0.0 : static_cast<double>(exclusions.size()) / static_cast<double>(paths_in);
}

Matrix EnsembleSummary::limit_covariance() const {
    Matrix m(times.size(), times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t j = 0; j < times.size(); ++j) m(i, j) = std::sqrt(8.0 * pi) * cov_r(times[i], times[j]);
    return m;
}

EnsembleSummary run_ensemble(const ExperimentConfig& input) {
    ExperimentConfig cfg = input;
    cfg.finalize();
    const std::size_t n = cfg.times.size();
    const auto obs_steps = cfg.observation_steps();
    const auto tube_stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.tube_every / cfg.sim.dt)));

    struct PathOut {
        std::vector<double> zeta;
        double sup = 0.0;
        std::optional<Exclusion> excluded;
    };
    std::vector<PathOut> outs(cfg.paths);
    const GridProfile u0 = front_initial(cfg.sim);
    std::vector<std::size_t> sorted_obs = obs_steps;
    std::sort(sorted_obs.begin(), sorted_obs.end());

    parallel_for(cfg.paths, resolve_threads(cfg.threads), [&](std::size_t p) {
        PathOut& out = outs[p];
        out.zeta.assign(n, 0.0);
        double last_t = 0.0;
        SimulateOptions o;
        o.observe_every = tube_stride;
        o.observe_at = sorted_obs;
        o.observer = [&](std::size_t step, double t, const GridProfile& u) {
            last_t = t;
            CenterOptions co;
            co.delta0 = cfg.delta0;
            const auto c = center(u, co);
            out.sup = std::max(out.sup, sup_distance(u, c.center));
            for (std::size_t j = 0; j < n; ++j)
                if (obs_steps[j] == step) out.zeta[j] = c.center;
        };
        auto exclude = [&](ExclusionReason r, const std::string& what) {
            out.excluded = Exclusion{p, r, last_t, what};
        };
        try {
            simulate(cfg.sim, u0, o, p);
        } catch (const BlowUpError& e) {
            exclude(ExclusionReason::blow_up, e.what());
        } catch (const OutOfTubeError& e) {
            exclude(ExclusionReason::out_of_tube, e.what());
        } catch (const NotNearFrontError& e) {
            exclude(ExclusionReason::not_near_front, e.what());
        }
    });

    // single-writer aggregation in path order
    EnsembleSummary s;
    s.config = cfg;
    s.config_hash = cfg.hash();
    s.times = cfg.times.times;
    for (auto st : obs_steps) s.physical_times.push_back(static_cast<double>(st) * cfg.sim.dt);
    s.paths_in = cfg.paths;
    std::vector<std::size_t> used;
    for (std::size_t p = 0; p < cfg.paths; ++p) {
        if (outs[p].excluded)
            s.exclusions.push_back(*outs[p].excluded);
        else
            used.push_back(p);
    }
    s.used_paths = used;
    s.zeta = Matrix(used.size(), n);
    s.x = Matrix(used.size(), n);
    const double scale = eps_power(cfg.sim.epsilon, cfg.rescale_exponent());
    for (std::size_t r = 0; r < used.size(); ++r) {
        const auto& o = outs[used[r]];
        s.sup_distance.push_back(o.sup);
        for (std::size_t j = 0; j < n; ++j) {
            s.zeta(r, j) = o.zeta[j];
            s.x(r, j) = scale * o.zeta[j];
        }
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.mean.assign(n, nan);
    s.mean_se.assign(n, nan);
    s.variance.assign(n, nan);
    s.variance_se.assign(n, nan);
    s.matched_z.assign(n, nan);
    for (std::size_t j = 0; j < n; ++j) s.limit_variance.push_back(std::sqrt(8.0 * pi) * cov_r(s.times[j], s.times[j]));
    s.matched_variance = matched_center_variance(cfg.sim, s.physical_times);
    for (auto& v : s.matched_variance) v *= scale * scale;

    const std::size_t m = used.size();
    if (m >= 2) {
        s.covariance = empirical_covariance(s.x, s.times);
        for (std::size_t j = 0; j < n; ++j) {
            double mu = 0.0, sq = 0.0;
            for (std::size_t r = 0; r < m; ++r) mu += s.x(r, j);
            mu /= static_cast<double>(m);
            for (std::size_t r = 0; r < m; ++r) sq += (s.x(r, j) - mu) * (s.x(r, j) - mu);
            s.mean[j] = mu;
            s.mean_se[j] = std::sqrt(sq / static_cast<double>(m - 1) / static_cast<double>(m));
            s.variance[j] = s.covariance.values(j, j);
            s.variance_se[j] = s.covariance.standard_errors(j, j);
            if (s.variance_se[j] > 0.0) s.matched_z[j] = (s.variance[j] - s.matched_variance[j]) / s.variance_se[j];
        }
    }
    return s;
}

// --- scaling and tube ----------------------------------------------------------------------

ScalingFit scaling_fit(const std::vector<ScalingPoint>& points, double gamma) {
    if (points.size() < 3) throw DesignError("scaling_fit: need at least 3 epsilon values");
    double lo = points.front().epsilon, hi = lo;
    std::vector<double> lx, ly;
    for (const auto& p : points) {
        if (!(p.epsilon > 0.0) || !(p.variance > 0.0)) throw DomainError("scaling_fit: epsilon and variance must be positive");
        lo = std::min(lo, p.epsilon);
        hi = std::max(hi, p.epsilon);
        lx.push_back(std::log(p.epsilon));
        ly.push_back(std::log(p.variance));
    }
    if (hi / lo < 10.0 * (1.0 - 1e-12)) throw DesignError("scaling_fit: epsilon values must span at least one decade");
    const auto f = fit_line(lx, ly);
    ScalingFit r;
    r.slope = f.slope;
    r.intercept = f.intercept;
    r.slope_se = f.slope_se;
    r.r_squared = f.r_squared;
    r.target = 1.0 - gamma / 2.0;
    r.points = points;
    return r;
}

TubeReport tube_report(const EnsembleSummary& s, double eta) {
    TubeReport r;
    r.epsilon = s.config.sim.epsilon;
    r.gamma = s.config.gamma;
    r.eta = eta;
    // a deterministic run should sit on the manifold to solver precision
    r.threshold = r.epsilon > 0.0 ? std::pow(r.epsilon, std::min(1.0 - r.gamma, 0.5) - eta) : 1e-6;
    r.paths = s.sup_distance.size();
    for (double d : s.sup_distance)
        if (d > r.threshold) ++r.exceed;
    r.fraction = r.paths ? static_cast<double>(r.exceed) / static_cast<double>(r.paths) : 0.0;
    if (r.paths) {
        auto sorted = s.sup_distance;
        std::sort(sorted.begin(), sorted.end());
        for (double level : {0.5, 0.9, 0.99, 1.0}) {
            // nearest rank
            const auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(r.paths)));
            r.quantiles[level] = sorted[std::clamp<std::size_t>(k, 1, r.paths) - 1];
        }
    }
    return r;
}

std::vector<CriterionResult> ensemble_criteria(const EnsembleSummary& s) {
    std::vector<CriterionResult> out;
    char buf[256];
    const double frac = s.exclusion_fraction();
    std::snprintf(buf, sizeof buf, "excluded %zu of %zu (%.3f)", s.exclusions.size(), s.paths_in, frac);
    out.push_back({"exclusions_at_most_5pct", frac <= 0.05, buf});
    const auto tube = tube_report(s, s.config.eta);
    std::snprintf(buf, sizeof buf, "fraction %.3f above %.4g", tube.fraction, tube.threshold);
    out.push_back({"tube_exceedance_at_most_20pct", s.paths_used() > 0 && tube.fraction <= 0.20, buf});
    if (!s.times.empty() && s.paths_used() >= 2) {
        const std::size_t j = s.times.size() - 1;
        const double z = s.matched_z[j];
        std::snprintf(buf, sizeof buf, "t=%g Var X=%.5g +- %.2g matched=%.5g z=%.2f", s.times[j], s.variance[j],
                      s.variance_se[j], s.matched_variance[j], z);
        out.push_back({"variance_matches_matched_eps", s.variance[j] > 0.0 && std::abs(z) <= 3.0, buf});
    } else {
        out.push_back({"variance_matches_matched_eps", false, "no data"});
    }
    return out;
}

// --- report --------------------------------------------------------------------------------

ReportFiles write_report(const EnsembleSummary& s, const std::filesystem::path& dir,
                         const std::vector<CriterionResult>& criteria, const std::optional<ScalingFit>& scaling) {
    ReportFiles files;
    auto emit = [&](const std::string& name, const CsvTable& t) {
        const auto path = dir / name;
        write_csv(path, t);
        files.written.push_back(path);
    };
    const std::size_t n = s.times.size();
    const bool data = s.paths_used() >= 2;

    CsvBuilder var({"t", "t_physical", "mean_x", "mean_x_se", "var_x", "var_x_se", "var_zeta", "limit_var_x",
                    "matched_var_x", "z_matched"});
    const double scale = eps_power(s.config.sim.epsilon, s.config.rescale_exponent());
    for (std::size_t j = 0; j < n && data; ++j)
        var.row(std::vector<double>{s.times[j], s.physical_times[j], s.mean[j], s.mean_se[j], s.variance[j],
                                    s.variance_se[j], scale > 0.0 ? s.variance[j] / (scale * scale) : 0.0,
                                    s.limit_variance[j], s.matched_variance[j], s.matched_z[j]});
    emit("variance.csv", var.table());

    CsvBuilder cov({"t", "t_prime", "empirical", "standard_error", "limit"});
    const auto lim = s.limit_covariance();
    for (std::size_t i = 0; i < n && data; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cov.row(std::vector<double>{s.times[i], s.times[j], s.covariance.values(i, j),
                                        s.covariance.standard_errors(i, j), lim(i, j)});
    emit("covariance.csv", cov.table());

    CsvBuilder tube({"path", "sup_distance"});
    for (std::size_t r = 0; r < s.paths_used(); ++r)
        tube.row(std::vector<std::string>{std::to_string(s.used_paths[r]), format_double(s.sup_distance[r])});
    emit("tube.csv", tube.table());

    CsvBuilder ex({"path", "reason", "time", "detail"});
    for (const auto& e : s.exclusions)
        ex.row(std::vector<std::string>{std::to_string(e.path), to_string(e.reason), format_double(e.time), e.detail});
    emit("exclusions.csv", ex.table());

    // plot-ready long format
    CsvBuilder series({"series", "path", "t", "value"});
    for (std::size_t r = 0; r < s.paths_used(); ++r)
        for (std::size_t j = 0; j < n; ++j)
            series.row(std::vector<std::string>{"x", std::to_string(s.used_paths[r]), format_double(s.times[j]),
                                                format_double(s.x(r, j))});
    emit("series.csv", series.table());

    if (scaling) {
        CsvBuilder sc({"epsilon", "variance", "standard_error", "fit_slope", "target_slope"});
        for (const auto& p : scaling->points)
            sc.row(std::vector<double>{p.epsilon, p.variance, p.standard_error, scaling->slope, scaling->target});
        emit("scaling.csv", sc.table());
    }

    nlohmann::ordered_json m;
    m["tool"] = "kinkflux";
    m["version"] = std::string(version);
    m["status"] = data ? "ok" : "no data";
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(s.config_hash));
    m["config_hash"] = hex;
    const auto& c = s.config;
    m["config"] = {{"half_length", c.sim.half_length}, {"points", c.sim.points},
                   {"dt", c.sim.dt},                   {"epsilon", c.sim.epsilon},
                   {"beta", c.sim.beta},               {"horizon", c.sim.horizon},
                   {"seed", c.sim.seed},               {"nonlinearity", to_string(c.sim.nonlinearity)},
                   {"cutoff_fraction", c.sim.cutoff_fraction}, {"unit_cutoff", c.sim.unit_cutoff},
                   {"gamma", c.gamma},                 {"times", c.times.times},
                   {"paths", c.paths},                 {"reduced", c.reduced},
                   {"eta", c.eta},                     {"tube_every", c.tube_every},
                   {"delta0", c.delta0}};
    m["seeds"] = {{"root", c.sim.seed}, {"streams", "path p uses substream p of the root seed"}};
    m["paths"] = {{"in", s.paths_in}, {"used", s.paths_used()}, {"excluded", s.exclusions.size()}};
    nlohmann::ordered_json reasons = nlohmann::ordered_json::object();
    for (const auto& e : s.exclusions) reasons[to_string(e.reason)] = reasons.value(to_string(e.reason), 0) + 1;
    m["exclusion_reasons"] = reasons;
    nlohmann::ordered_json crit = nlohmann::ordered_json::array();
    for (const auto& cr : criteria) crit.push_back({{"name", cr.name}, {"pass", cr.pass}, {"detail", cr.detail}});
    m["criteria"] = crit;
    if (scaling) m["scaling"] = {{"slope", scaling->slope}, {"slope_se", scaling->slope_se}, {"target", scaling->target}};
    nlohmann::ordered_json listed = nlohmann::ordered_json::array();
    for (const auto& f : files.written) listed.push_back(f.filename().string());
    m["files"] = listed;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m["created_at"] = stamp;
    const auto mpath = dir / "manifest.json";
    write_text(mpath, m.dump(2) + "\n");
    files.written.push_back(mpath);
    return files;
}

}  // namespace kinkflux
