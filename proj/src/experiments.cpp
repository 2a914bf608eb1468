#include "dsde/experiments.hpp"

#include <cmath>
#include <cstring>
#include <iostream>
#include <numeric>

#include "dsde/parallel.hpp"

namespace dsde {

// ------------------------------------------------------------------ pipeline
TrainedModel train_pipeline(const WindowSet& train, const WindowSet& validation, int N,
                            const PipelineConfig& cfg) {
    TrainedModel out;
    out.model = init_model(train, N, cfg.net, cfg.seed);
    const WindowSet* val = cfg.early_stop && validation.rows() ? &validation : nullptr;
    train_drift(out.model, train, cfg.drift_sgd, cfg.seed, &out.drift_log, val,
                cfg.early_stop_every);

    const std::vector<double> train_resid = residuals(out.model, train);
    std::vector<double> val_resid;
    if (val) val_resid = residuals(out.model, validation);
    train_aleatoric(out.model, train, train_resid, cfg.aleatoric_sgd, cfg.seed,
                    &out.aleatoric_log, val, val ? &val_resid : nullptr,
                    cfg.early_stop_every);

    const std::size_t n_whole = static_cast<std::size_t>(
        std::llround(cfg.sbo_whole_window_frac * static_cast<double>(cfg.sbo_count)));
    SboConfig sbo_whole = cfg.sbo;
    sbo_whole.mode = SboConfig::Mode::WholeWindowShift;
    SboConfig sbo_lag = cfg.sbo;
    sbo_lag.mode = SboConfig::Mode::PerLagNoise;
    OodResult ood_a = soft_brownian_offset(train, sbo_lag, cfg.sbo_count - n_whole, cfg.seed);
    OodResult ood_b = soft_brownian_offset(train, sbo_whole, n_whole, cfg.seed + 1);
    out.sbo_discarded = ood_a.discarded + ood_b.discarded;
    WindowSet ood = std::move(ood_a.windows);
    for (std::size_t r = 0; r < ood_b.windows.rows(); ++r) {
        ood.append(ood_b.windows.times[r], ood_b.windows.window(r), ood_b.windows.target(r),
                   ood_b.windows.path_index[r], ood_b.windows.k_index[r]);
        ood.ood_mask.push_back(1);
    }
    train_epistemic(out.model, train, ood, cfg.epistemic_sgd, cfg.seed, &out.epistemic_log);

    tune_sigma_e(out.model, validation.rows() ? validation : train);
    return out;
}

std::vector<double> rollout_means(const DelaySdeNet& model, const WindowSet& windows) {
    std::vector<double> means = residuals(model, windows);  // e = xhat - x
    for (std::size_t r = 0; r < windows.rows(); ++r) {
        const auto tgt = windows.target(r);
        for (int j = 0; j < model.dim; ++j) means[r * model.dim + j] += tgt[j];
    }
    return means;
}

PathSplit split_by_year_ratio(std::size_t n) {
    PathSplit split;
    const std::size_t held = std::max<std::size_t>(1, (n + 5) / 11);  // round(n/11)
    if (2 * held >= n) throw ConfigError("too few paths for a 9:1:1 split");
    for (std::size_t i = 0; i < n; ++i) {
        if (i < n - 2 * held) split.train.push_back(i);
        else if (i < n - held) split.validation.push_back(i);
        else split.test.push_back(i);
    }
    return split;
}

PathSet subset_paths(const PathSet& set, const std::vector<std::size_t>& ids) {
    PathSet out;
    out.grid = set.grid;
    out.dim = set.dim;
    for (std::size_t id : ids) {
        out.paths.push_back(set.paths.at(id));
        if (id < set.increments.size()) out.increments.push_back(set.increments[id]);
    }
    return out;
}

// --------------------------------------------------------- convergence study
std::vector<double> coupled_rollout(const DelaySdeNet& model, const Path& path,
                                    const BrownianIncrements& fine, long kappa) {
    const TimeGrid& grid = path.grid;
    const int d = model.dim, p = model.lags;
    if (grid.step_count % kappa != 0)
        throw NotDivisible("kappa must divide the reference step count");
    const long coarse_steps = grid.step_count / kappa;
    const double dtc = grid.dt * static_cast<double>(kappa);
    const BrownianIncrements coarse = aggregate_increments(fine, kappa);

    // lag window at coarse spacing ending at t = 0
    std::vector<double> ring(static_cast<std::size_t>(p) * d);
    for (int l = 0; l < p; ++l) {
        const auto v = path.at(-(static_cast<long>(p) - 1 - l) * kappa);
        for (int j = 0; j < d; ++j) ring[static_cast<std::size_t>(l) * d + j] = v[j];
    }
    const std::vector<double> frozen = ring;

    std::vector<double> x(ring.end() - d, ring.end());
    std::vector<double> gsq(d);
    for (long kc = 0; kc < coarse_steps; ++kc) {
        const double t = static_cast<double>(kc) * dtc;
        const double prob = model.epistemic_prob(t, frozen);
        model.aleatoric_sq(t, frozen, gsq);
        for (int j = 0; j < d; ++j) {
            const double f = model.drift_value(j, t, ring);
            const double g = std::sqrt(gsq[j]) + model.sigma_e * prob;
            x[j] += f * dtc + g * coarse.at(kc + 1, j);
        }
        std::memmove(ring.data(), ring.data() + d,
                     sizeof(double) * static_cast<std::size_t>(p - 1) * d);
        std::copy(x.begin(), x.end(), ring.begin() + static_cast<std::size_t>(p - 1) * d);
    }
    return x;
}

namespace {

double terminal_l2_error(const DelaySdeNet& model, const PathSet& test, long kappa) {
    const long K = test.grid.step_count;
    std::vector<double> sq(test.paths.size(), 0.0);
    parallel_for(test.paths.size(), [&](std::size_t s) {
        const auto pred = coupled_rollout(model, test.paths[s], test.increments[s], kappa);
        const auto truth = test.paths[s].at(K);
        double acc = 0.0;
        for (int j = 0; j < test.dim; ++j) {
            const double diff = pred[j] - truth[j];
            acc += diff * diff;
        }
        sq[s] = acc;
    });
    return std::sqrt(pairwise_sum(sq) / static_cast<double>(test.paths.size()));
}

}  // namespace

ConvergenceReport run_convergence_study(const SddeSpec& spec, const ConvergenceConfig& cfg) {
    const TimeGrid grid = make_time_grid(cfg.tau, cfg.horizon, cfg.dt_ref);
    const PathSet paths =
        simulate_paths(spec, eta_sin_cos(), grid, cfg.paths, cfg.pipeline.seed);

    const auto n_train_total =
        static_cast<std::size_t>(std::llround(cfg.train_frac * static_cast<double>(cfg.paths)));
    const auto n_fit = n_train_total -
                       static_cast<std::size_t>(std::llround(
                           cfg.sigma_val_frac * static_cast<double>(n_train_total)));
    std::vector<std::size_t> fit_ids, val_ids, test_ids;
    for (std::size_t i = 0; i < cfg.paths; ++i) {
        if (i < n_fit) fit_ids.push_back(i);
        else if (i < n_train_total) val_ids.push_back(i);
        else test_ids.push_back(i);
    }

    const WindowSet train = build_windows(paths, spec.lags, 1, fit_ids);
    const WindowSet validation = build_windows(paths, spec.lags, 1, val_ids);
    const TrainedModel trained = train_pipeline(train, validation, 1, cfg.pipeline);

    const PathSet test = subset_paths(paths, test_ids);
    ConvergenceReport report;
    report.delta_ref = terminal_l2_error(trained.model, test, 1);
    for (long kappa : cfg.kappas)
        report.deltas.emplace_back(kappa, terminal_l2_error(trained.model, test, kappa));

    // slope of ln(delta - delta_ref) on ln(kappa * dt_ref)
    std::vector<double> xs, ys;
    for (const auto& [kappa, delta] : report.deltas) {
        if (delta <= report.delta_ref) {
            report.dropped.push_back(kappa);
            std::cerr << "warning: delta at kappa=" << kappa
                      << " not above the reference error; dropped from the fit\n";
            continue;
        }
        xs.push_back(std::log(static_cast<double>(kappa) * cfg.dt_ref));
        ys.push_back(std::log(delta - report.delta_ref));
    }
    if (xs.size() >= 2) {
        const double n = static_cast<double>(xs.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
        }
        report.gamma = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        report.intercept = (sy - report.gamma * sx) / n;
    }
    return report;
}

void write_convergence_csv(const std::filesystem::path& file, const ConvergenceReport& report) {
    std::string text = "kappa,dt,delta\n";
    // kappa = 1 row carries the reference error
    text += "1," + format_double(0.0) + "," + format_double(report.delta_ref) + "\n";
    for (const auto& [kappa, delta] : report.deltas)
        text += std::to_string(kappa) + "," + format_double(0.0) + "," + format_double(delta) +
                "\n";
    write_text_file(file, text);
}

// -------------------------------------------------------------- comparison
namespace {

std::vector<double> coordinate_slice(const std::vector<double>& data, int dim, int coord) {
    std::vector<double> out(data.size() / dim);
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = data[r * dim + coord];
    return out;
}

// accumulated true aleatoric variance sum_i g^2(t_k + i dt, frozen eta window)
// for every window, from the generating system
std::vector<double> true_aleatoric_variance(const SddeSpec& spec, const PathSet& paths,
                                            const WindowSet& windows, int N) {
    const int d = spec.dim;
    std::vector<double> out(windows.rows() * d, 0.0);
    // frozen eta window input per path
    std::vector<std::vector<double>> frozen(paths.paths.size());
    for (std::size_t s = 0; s < paths.paths.size(); ++s) {
        const LagVector lv = project(paths.paths[s], spec.lags, 0);
        frozen[s].resize(1 + static_cast<std::size_t>(d) * spec.lags);
        assemble_input(0.0, lv.entries, d, spec.lags, frozen[s]);
    }
    for (std::size_t r = 0; r < windows.rows(); ++r) {
        auto& input = frozen[static_cast<std::size_t>(windows.path_index[r])];
        for (int i = 0; i < N; ++i) {
            input[0] = windows.times[r] + i * windows.dt;
            for (int j = 0; j < d; ++j) {
                const double g = spec.diffusion_value(j, input);
                out[r * d + j] += g * g;
            }
        }
        input[0] = 0.0;
    }
    for (auto& v : out) v *= windows.dt;
    return out;
}

// model-side accumulated variance V*dt per window
std::vector<double> model_aleatoric_variance(const DelaySdeNet& model, const WindowSet& windows,
                                             int N) {
    const int d = model.dim;
    std::vector<double> out(windows.rows() * d, 0.0);
    std::vector<double> gsq(d);
    for (std::size_t r = 0; r < windows.rows(); ++r) {
        for (int i = 0; i < N; ++i) {
            model.aleatoric_sq(windows.times[r] + i * model.dt, windows.window(r), gsq);
            for (int j = 0; j < d; ++j) out[r * d + j] += gsq[j];
        }
        for (int j = 0; j < d; ++j) out[r * d + j] *= model.dt;
    }
    return out;
}

std::vector<double> classifier_scores(const DelaySdeNet& model, const WindowSet& windows) {
    std::vector<double> scores(windows.rows());
    for (std::size_t r = 0; r < windows.rows(); ++r)
        scores[r] = model.epistemic_prob(windows.times[r], windows.window(r));
    return scores;
}

SgdConfig horizon_sgd(const SgdConfig& base, const std::map<int, SgdConfig>& overrides, int N) {
    const auto it = overrides.find(N);
    return it == overrides.end() ? base : it->second;
}

}  // namespace

ComparisonReport run_comparison(const SddeSpec& spec, const CompareConfig& cfg) {
    const int p = spec.lags;
    const TimeGrid grid = make_time_grid(static_cast<double>(p), 365.0, 1.0);
    const PathSet paths =
        simulate_paths(spec, eta_sin_cos(), grid, cfg.years, cfg.pipeline.seed);
    const PathSplit split = split_by_year_ratio(cfg.years);

    ComparisonReport report;
    report.ood_enabled = cfg.with_ood;

    // ---- contaminated evaluation set for the classifier
    ContaminatedSet contaminated;
    WindowSet labeled_p, labeled_1;
    if (cfg.with_ood) {
        const PathSet test_paths = subset_paths(paths, split.test);
        const std::uint64_t ood_seed = cfg.pipeline.seed + 1000003;
        const PathSet ood_paths = amplified_diffusion_paths(
            spec, cfg.ood_factor, eta_sin_cos(), grid, split.test.size(), ood_seed);
        std::vector<OodInterval> intervals = cfg.intervals;
        if (intervals.empty()) {
            std::vector<double> env_min, env_max;
            training_envelope(subset_paths(paths, split.train), env_min, env_max);
            intervals =
                draw_guarded_intervals(ood_paths, env_min, env_max, cfg.draw_intervals,
                                       cfg.draw_min_len, cfg.draw_max_len, cfg.pipeline.seed);
        }
        contaminated = inject_ood_intervals(test_paths, ood_paths, intervals);
        report.intervals = intervals;
        report.contamination_points = contaminated.contamination;
        labeled_p = build_labeled_windows(contaminated, p, 1, p);
        labeled_1 = build_labeled_windows(contaminated, 1, 1, 1);
        double flagged = 0.0;
        for (auto m : labeled_p.ood_mask) flagged += m;
        report.contamination_windows = flagged / static_cast<double>(labeled_p.rows());
    }

    // ---- VAR baseline (horizon-independent fit)
    VarFit var_fit;
    if (cfg.with_var) {
        std::vector<std::vector<double>> segments;
        for (std::size_t id : split.train) {
            const Path& path = paths.paths[id];
            std::vector<double> seg;
            seg.reserve(static_cast<std::size_t>(grid.step_count) * spec.dim);
            for (long k = 1; k <= grid.step_count; ++k) {
                const auto v = path.at(k);
                seg.insert(seg.end(), v.begin(), v.end());
            }
            segments.push_back(std::move(seg));
        }
        var_fit = fit_var(segments, spec.dim, cfg.var_order);
        std::vector<long> days(var_fit.target_step.size());
        for (std::size_t i = 0; i < days.size(); ++i) days[i] = day_of_year(var_fit.target_step[i]);
        for (int j = 0; j < spec.dim; ++j) {
            const auto resid_j = coordinate_slice(var_fit.residuals, spec.dim, j);
            const ExpVarianceFit fit = fit_exp_variance(resid_j, days);
            var_fit.model.var_a.push_back(fit.a);
            var_fit.model.var_b.push_back(fit.b);
        }
    }

    bool rocauc_done = false;
    double delay_auc = 0.0, sde_auc = 0.0;
    for (int N : cfg.horizons) {
        const WindowSet train_p = build_windows(paths, p, N, split.train, p);
        const WindowSet val_p = build_windows(paths, p, N, split.validation, p);
        const WindowSet test_p = build_windows(paths, p, N, split.test, p);

        PipelineConfig pipe = cfg.pipeline;
        pipe.drift_sgd = horizon_sgd(cfg.pipeline.drift_sgd, cfg.drift_by_horizon, N);
        pipe.aleatoric_sgd =
            horizon_sgd(cfg.pipeline.aleatoric_sgd, cfg.aleatoric_by_horizon, N);
        const TrainedModel delay = train_pipeline(train_p, val_p, N, pipe);

        const auto truth_x1 = coordinate_slice(
            std::vector<double>(test_p.targets.begin(), test_p.targets.end()), spec.dim, 0);
        const auto true_var =
            coordinate_slice(true_aleatoric_variance(spec, paths, test_p, N), spec.dim, 0);

        ComparisonRow row;
        row.horizon = N;
        row.model = "delay-sde-net";
        row.value_rmse = rmse(
            coordinate_slice(rollout_means(delay.model, test_p), spec.dim, 0), truth_x1);
        row.var_rmse = rmse(
            coordinate_slice(model_aleatoric_variance(delay.model, test_p, N), spec.dim, 0),
            true_var);
        if (cfg.with_ood && !rocauc_done)
            delay_auc = rocauc(classifier_scores(delay.model, labeled_p), labeled_p.ood_mask);
        row.has_rocauc = cfg.with_ood;
        row.rocauc = delay_auc;
        report.rows.push_back(row);

        if (cfg.with_sde_net) {
            const WindowSet train_1 = build_windows(paths, 1, N, split.train, 1);
            const WindowSet val_1 = build_windows(paths, 1, N, split.validation, 1);
            const WindowSet test_1 = build_windows(paths, 1, N, split.test, 1);
            const TrainedModel sde = train_pipeline(train_1, val_1, N, pipe);
            ComparisonRow srow;
            srow.horizon = N;
            srow.model = "sde-net";
            srow.value_rmse = rmse(
                coordinate_slice(rollout_means(sde.model, test_1), spec.dim, 0),
                coordinate_slice(
                    std::vector<double>(test_1.targets.begin(), test_1.targets.end()),
                    spec.dim, 0));
            srow.var_rmse = rmse(
                coordinate_slice(model_aleatoric_variance(sde.model, test_1, N), spec.dim, 0),
                coordinate_slice(true_aleatoric_variance(spec, paths, test_1, N), spec.dim, 0));
            if (cfg.with_ood && !rocauc_done)
                sde_auc = rocauc(classifier_scores(sde.model, labeled_1), labeled_1.ood_mask);
            srow.has_rocauc = cfg.with_ood;
            srow.rocauc = sde_auc;
            report.rows.push_back(srow);
        }
        rocauc_done = true;

        if (cfg.with_var) {
            std::vector<double> pred(test_p.rows()), varp(test_p.rows());
            for (std::size_t r = 0; r < test_p.rows(); ++r) {
                const auto vp = var_predict(var_fit.model, test_p.window(r),
                                            test_p.k_index[r], N);
                pred[r] = vp.mean[static_cast<std::size_t>(N - 1) * spec.dim];
                varp[r] = vp.variance[static_cast<std::size_t>(N - 1) * spec.dim];
            }
            ComparisonRow vrow;
            vrow.horizon = N;
            vrow.model = "var";
            vrow.value_rmse = rmse(pred, truth_x1);
            vrow.var_rmse = rmse(varp, true_var);
            vrow.has_rocauc = false;
            report.rows.push_back(vrow);
        }
    }
    return report;
}

void write_comparison_csv(const std::filesystem::path& file, const ComparisonReport& report) {
    std::string text =
        report.ood_enabled ? "horizon,model,value_rmse,var_rmse,rocauc\n"
                           : "horizon,model,value_rmse,var_rmse\n";
    for (const auto& row : report.rows) {
        text += std::to_string(row.horizon) + "," + row.model + "," +
                format_double(row.value_rmse) + "," + format_double(row.var_rmse);
        if (report.ood_enabled) {
            text += ",";
            if (row.has_rocauc) text += format_double(row.rocauc);
        }
        text += '\n';
    }
    write_text_file(file, text);
}

// ------------------------------------------------------------- N-step eval
NstepReport run_nstep_eval(const PathSet& data, const NstepConfig& cfg,
                           const std::filesystem::path* plot_csv) {
    const int p = cfg.lags;
    NstepReport report;

    // windows per split: multi-path data splits by path, a single series by date
    auto windows_for = [&](int N, int which) {  // 0 train, 1 validation, 2 test
        if (data.paths.size() > 1) {
            const PathSplit split = split_by_year_ratio(data.paths.size());
            const auto& ids = which == 0 ? split.train
                              : which == 1 ? split.validation
                                           : split.test;
            return build_windows(data, p, N, ids, static_cast<long>(p));
        }
        WindowSet all = build_windows(data, p, N, static_cast<long>(p));
        const long K = data.grid.step_count;
        const long train_end = static_cast<long>(std::llround(K * 9.0 / 11.0));
        const long val_end = train_end + static_cast<long>(std::llround(K * 1.0 / 11.0));
        WindowSet out;
        out.dim = all.dim;
        out.lags = all.lags;
        out.horizon = all.horizon;
        out.dt = all.dt;
        for (std::size_t r = 0; r < all.rows(); ++r) {
            const long target = all.k_index[r] + N;
            const int bucket = target <= train_end ? 0 : target <= val_end ? 1 : 2;
            if (bucket == which)
                out.append(all.times[r], all.window(r), all.target(r), all.path_index[r],
                           all.k_index[r]);
        }
        return out;
    };

    const int plot_N = cfg.plot_horizon > 0 ? cfg.plot_horizon : cfg.horizons.front();
    for (int N : cfg.horizons) {
        const WindowSet train = windows_for(N, 0);
        const WindowSet validation = windows_for(N, 1);
        const WindowSet test = windows_for(N, 2);
        if (train.rows() == 0 || test.rows() == 0)
            throw PathTooShort("not enough data for horizon " + std::to_string(N));

        PipelineConfig pipe = cfg.pipeline;
        pipe.drift_sgd = horizon_sgd(cfg.pipeline.drift_sgd, cfg.drift_by_horizon, N);
        pipe.aleatoric_sgd =
            horizon_sgd(cfg.pipeline.aleatoric_sgd, cfg.aleatoric_by_horizon, N);
        const TrainedModel trained = train_pipeline(train, validation, N, pipe);
        const DelaySdeNet& model = trained.model;

        const auto means = rollout_means(model, test);
        const auto truth_x1 = coordinate_slice(
            std::vector<double>(test.targets.begin(), test.targets.end()), model.dim, 0);
        const auto pred_x1 = coordinate_slice(means, model.dim, 0);

        // predicted total variance ghat^2 = (sqrt(V dt) + sigma_e prob)^2 vs e^2
        const auto avar = model_aleatoric_variance(model, test, N);
        std::vector<double> ghat_sq(test.rows()), e_sq(test.rows());
        for (std::size_t r = 0; r < test.rows(); ++r) {
            const double prob = model.epistemic_prob(test.times[r], test.window(r));
            const double g = std::sqrt(avar[r * model.dim]) + model.sigma_e * prob;
            ghat_sq[r] = g * g;
            const double e = pred_x1[r] - truth_x1[r];
            e_sq[r] = e * e;
        }

        NstepRow row;
        row.horizon = N;
        row.value_rmse = rmse(pred_x1, truth_x1);
        row.uncertainty_rmse = rmse(ghat_sq, e_sq);
        report.rows.push_back(row);

        if (plot_csv && N == plot_N) {
            const double z = normal_quantile(0.5 + 0.5 * cfg.ci_level);
            std::string text = "t,truth,mean,std_a,std_e,ci_lo,ci_hi\n";
            for (std::size_t r = 0; r < test.rows(); ++r) {
                const double prob = model.epistemic_prob(test.times[r], test.window(r));
                const double std_a = std::sqrt(avar[r * model.dim]);
                const double std_e = model.sigma_e * prob;
                const double total = std_a + std_e;
                const double t_target = test.times[r] + N * model.dt;
                text += format_double(t_target) + "," + format_double(truth_x1[r]) + "," +
                        format_double(pred_x1[r]) + "," + format_double(std_a) + "," +
                        format_double(std_e) + "," + format_double(pred_x1[r] - z * total) +
                        "," + format_double(pred_x1[r] + z * total) + "\n";
            }
            write_text_file(*plot_csv, text);
        }
    }
    return report;
}

void write_nstep_csv(const std::filesystem::path& file, const NstepReport& report) {
    std::string text = "horizon,value_rmse,uncertainty_rmse\n";
    for (const auto& row : report.rows)
        text += std::to_string(row.horizon) + "," + format_double(row.value_rmse) + "," +
                format_double(row.uncertainty_rmse) + "\n";
    write_text_file(file, text);
}

}  // namespace dsde
