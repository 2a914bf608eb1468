#pragma once

#include <filesystem>
#include <map>
#include <optional>

#include "dsde/csv.hpp"
#include "dsde/metrics.hpp"
#include "dsde/model.hpp"
#include "dsde/ood.hpp"
#include "dsde/var.hpp"

namespace dsde {

// --------------------------------------------------------------- pipeline
// The three-stage fit: drift first, aleatoric nets on its residuals, then
// the ID/OOD classifier on soft-Brownian-offset windows, and finally the
// sigma_e search on validation residuals.
struct PipelineConfig {
    ModelConfig net;
    SgdConfig drift_sgd{0.01, 0.9, 5e-5, 500, 0};
    SgdConfig aleatoric_sgd{0.01, 0.9, 5e-5, 500, 0};
    SgdConfig epistemic_sgd{0.1, 0.9, 5e-5, 200, 0};
    SboConfig sbo;
    std::size_t sbo_count = 2000;
    double sbo_whole_window_frac = 0.5;  // rest uses per-lag noise
    bool early_stop = true;              // best-validation iterate wins
    long early_stop_every = 10;
    std::uint64_t seed = 1;
};

struct TrainedModel {
    DelaySdeNet model;
    TrainLog drift_log, aleatoric_log, epistemic_log;
    std::size_t sbo_discarded = 0;
};

TrainedModel train_pipeline(const WindowSet& train, const WindowSet& validation, int N,
                            const PipelineConfig& cfg);

// Final rollout means on every window (rows x dim).
std::vector<double> rollout_means(const DelaySdeNet& model, const WindowSet& windows);

// ------------------------------------------------------- convergence study
struct ConvergenceConfig {
    double tau = 15.0;
    double horizon = 5.0;
    double dt_ref = 0.01;
    std::size_t paths = 1000;      // M
    double train_frac = 0.7;
    double sigma_val_frac = 0.15;  // carved from the training paths
    std::vector<long> kappas{5, 10, 50, 100, 500};
    PipelineConfig pipeline;
};

struct ConvergenceReport {
    double delta_ref = 0.0;
    std::vector<std::pair<long, double>> deltas;  // (kappa, delta)
    double gamma = 0.0;
    double intercept = 0.0;
    std::vector<long> dropped;  // kappas with delta <= delta_ref (warned, excluded)
};

ConvergenceReport run_convergence_study(const SddeSpec& spec, const ConvergenceConfig& cfg);
void write_convergence_csv(const std::filesystem::path& file, const ConvergenceReport& report);

// Terminal-time rollout at resolution kappa*dt reusing the path's own
// Brownian increments (aggregated in groups of kappa).
std::vector<double> coupled_rollout(const DelaySdeNet& model, const Path& path,
                                    const BrownianIncrements& fine, long kappa);

// ----------------------------------------------------------- comparison run
struct CompareConfig {
    std::size_t years = 110;
    std::vector<int> horizons{1, 2, 3, 4, 5, 6, 7};
    double ood_factor = 2.5;
    std::vector<OodInterval> intervals;  // empty: draw guarded intervals
    std::size_t draw_intervals = 10;
    long draw_min_len = 3;
    long draw_max_len = 21;
    int var_order = 4;
    bool with_sde_net = true;
    bool with_var = true;
    bool with_ood = true;
    PipelineConfig pipeline;
    std::map<int, SgdConfig> drift_by_horizon;      // overrides per horizon
    std::map<int, SgdConfig> aleatoric_by_horizon;
};

struct ComparisonRow {
    int horizon = 0;
    std::string model;
    double value_rmse = 0.0;
    double var_rmse = 0.0;
    double rocauc = 0.0;
    bool has_rocauc = false;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    bool ood_enabled = false;
    double contamination_points = 0.0;
    double contamination_windows = 0.0;
    std::vector<OodInterval> intervals;
};

ComparisonReport run_comparison(const SddeSpec& spec, const CompareConfig& cfg);
void write_comparison_csv(const std::filesystem::path& file, const ComparisonReport& report);

// ------------------------------------------------- N-step eval on CSV data
struct NstepConfig {
    std::vector<int> horizons{1, 2, 3, 4, 5, 6, 7};
    int lags = 4;
    PipelineConfig pipeline;
    std::map<int, SgdConfig> drift_by_horizon;
    std::map<int, SgdConfig> aleatoric_by_horizon;
    int plot_horizon = 0;  // 0: first horizon
    double ci_level = 0.95;
};

struct NstepRow {
    int horizon = 0;
    double value_rmse = 0.0;
    double uncertainty_rmse = 0.0;  // predicted g^2 against realized e^2
};

struct NstepReport {
    std::vector<NstepRow> rows;
};

// data: one long series (split by date 3:1... per ratio) or a multi-path set
// (split by path like the comparison run). When plot_csv is set, writes the
// prediction/CI series for the plot horizon.
NstepReport run_nstep_eval(const PathSet& data, const NstepConfig& cfg,
                           const std::filesystem::path* plot_csv = nullptr);
void write_nstep_csv(const std::filesystem::path& file, const NstepReport& report);

// 9:1:1 train/validation/test counts (validation = test = round(n/11), min 1)
PathSplit split_by_year_ratio(std::size_t n);

PathSet subset_paths(const PathSet& set, const std::vector<std::size_t>& ids);

}  // namespace dsde
