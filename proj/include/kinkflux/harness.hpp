#pragma once

#include "kinkflux/io.hpp"
#include "kinkflux/limit.hpp"
#include "kinkflux/spde.hpp"
#include "kinkflux/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kinkflux {

enum class Preset { reduced, full };
std::string to_string(Preset p);
Preset parse_preset(const std::string& s);

/// One ensemble: SPDE settings plus the macroscopic observation design.
///
/// Observation times are macroscopic; the SPDE runs to eps^-gamma max(times), and each
/// time is mapped to the nearest step of the physical clock.
struct ExperimentConfig {
    SimulationConfig sim;
    double gamma = 0.5;
    TimeGrid times{{0.25, 0.5, 1.0}};
    std::size_t paths = 50;
    std::string out_dir = "kinkflux-out";
    bool reduced = true;
    std::size_t threads = 0;
    double eta = 0.2;
    /// Physical time between sup-distance samples.
    double tube_every = 0.1;
    double delta0 = 0.2;

    /// Sets sim.horizon from gamma and the grid, then checks everything.
    void finalize();
    void validate() const;
    double time_scale() const;             ///< eps^-gamma
    double rescale_exponent() const;       ///< -1/2 + gamma/4, X = eps^{this} zeta
    std::vector<std::size_t> observation_steps() const;
    std::uint64_t hash() const;
};

ExperimentConfig preset_config(Preset p, double epsilon = 1e-2);
/// epsilon schedule of the full preset.
std::vector<double> full_preset_epsilons();

/// Reads the key/value file; keys mirror the field names (sim fields at top level).
ExperimentConfig load_experiment(const ConfigFile& file, ExperimentConfig base = {});

enum class ExclusionReason { blow_up, out_of_tube, not_near_front };
std::string to_string(ExclusionReason r);

struct Exclusion {
    std::size_t path = 0;
    ExclusionReason reason = ExclusionReason::blow_up;
    double time = 0.0;
    std::string detail;
};

struct EnsembleSummary {
    ExperimentConfig config;
    std::uint64_t config_hash = 0;
    std::vector<double> times;           ///< macroscopic
    std::vector<double> physical_times;  ///< step-rounded eps^-gamma t
    Matrix zeta;                         ///< paths_used x times
    Matrix x;                            ///< rescaled X_eps
    std::vector<std::size_t> used_paths; ///< path (stream) ids of the rows
    CovarianceTable covariance;          ///< of X
    std::vector<double> variance, variance_se;
    std::vector<double> mean, mean_se;
    std::vector<double> limit_variance;    ///< (8 pi)^{1/2} cov_r(t, t)
    std::vector<double> matched_variance;  ///< matched-eps prediction for Var X
    std::vector<double> matched_z;
    std::vector<double> sup_distance;      ///< per used path, sup over sampled times
    std::vector<Exclusion> exclusions;
    std::size_t paths_in = 0;

    std::size_t paths_used() const noexcept { return used_paths.size(); }
    double exclusion_fraction() const noexcept;
    Matrix limit_covariance() const;  ///< (8 pi)^{1/2} cov_r on the grid
};

/// Runs every path on a worker pool, path p on substream p of cfg.sim.seed.
EnsembleSummary run_ensemble(const ExperimentConfig& cfg);

struct ScalingPoint {
    double epsilon = 0.0;
    double variance = 0.0;
    double standard_error = 0.0;
};
struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double target = 0.0;  ///< 1 - gamma/2
    double r_squared = 0.0;
    std::vector<ScalingPoint> points;
};
/// Regression of log Var zeta(eps^-gamma t) on log eps; needs >= 3 eps spanning a decade.
ScalingFit scaling_fit(const std::vector<ScalingPoint>& points, double gamma);

struct TubeReport {
    double epsilon = 0.0, gamma = 0.0, eta = 0.0;
    double threshold = 0.0;  ///< eps^{min(1 - gamma, 1/2) - eta}
    double fraction = 0.0;
    std::size_t exceed = 0, paths = 0;
    std::map<double, double> quantiles;  ///< level -> sup-distance
};
TubeReport tube_report(const EnsembleSummary& s, double eta);

struct CriterionResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ReportFiles {
    std::vector<std::filesystem::path> written;
};
/// CSV tables plus manifest.json in `dir`. Only the manifest carries a timestamp.
ReportFiles write_report(const EnsembleSummary& s, const std::filesystem::path& dir,
                         const std::vector<CriterionResult>& criteria = {},
                         const std::optional<ScalingFit>& scaling = std::nullopt);

/// Standard checks of one ensemble: exclusions, tube and matched-eps variance.
std::vector<CriterionResult> ensemble_criteria(const EnsembleSummary& s);

/// One line of a check battery (kernel-check / cov-check).
struct CheckRow {
    std::string name;
    std::string parameter;
    double reference = 0.0;
    double computed = 0.0;
    double gap = 0.0;  ///< residual
    double tolerance = 0.0;
    bool pass = false;
    bool counted = true;  ///< diagnostics are reported but never fail a run
};
/// check_name, parameter, residual, tolerance, pass
CsvTable kernel_check_table(const std::vector<CheckRow>& rows);
/// query, reference, computed, gap, pass
CsvTable cov_check_table(const std::vector<CheckRow>& rows);
std::vector<CheckRow> kernel_check_battery();
std::vector<CheckRow> cov_check_battery(bool quick = false);

}  // namespace kinkflux
