// Command-line front end: simulation, training, prediction, OOD generation,
// and the convergence / comparison / N-step evaluation runs. Every command
// reads a key=value config file (CLI11 format, sections become dotted keys),
// accepts DSDE_* environment overrides, and writes a manifest.json with the
// config hash and seed next to its outputs.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "dsde/experiments.hpp"
#include "dsde/parallel.hpp"
#include "dsde/kernels.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string env_name(std::string key) {
    for (auto& c : key) c = (c == '.' || c == '-') ? '_' : static_cast<char>(std::toupper(c));
    return "DSDE_" + key;
}

template <typename T>
CLI::Option* add_opt(CLI::App& app, const std::string& name, T& value,
                     const std::string& desc) {
    auto* opt = app.add_option("--" + name, value, desc);
    opt->envname(env_name(name));
    opt->capture_default_str();
    return opt;
}

struct CommonArgs {
    std::string config_file;
    std::string out_dir;
    std::uint64_t seed = 1;
    unsigned threads = 0;

    void attach(CLI::App& app) {
        app.set_config("--config", "", "config file (key=value, [section] nesting)");
        add_opt(app, "seed", seed, "run seed");
        add_opt(app, "threads", threads, "worker threads (0 = all cores)");
        add_opt(app, "out-dir", out_dir, "output directory");
    }

    fs::path run_dir(const CLI::App& app, const std::string& command) const {
        if (!out_dir.empty()) {
            fs::create_directories(out_dir);
            return out_dir;
        }
        const std::string cfg = const_cast<CLI::App&>(app).config_to_str(true, false);
        const auto stamp = std::chrono::system_clock::now().time_since_epoch().count();
        char name[96];
        std::snprintf(name, sizeof(name), "runs/%s_%lld_%08llx", command.c_str(),
                      static_cast<long long>(stamp),
                      static_cast<unsigned long long>(dsde::fnv1a(cfg) & 0xFFFFFFFF));
        fs::create_directories(name);
        return name;
    }
};

void write_manifest(const fs::path& dir, CLI::App& app, const std::string& command,
                    const CommonArgs& common, json extra) {
    const std::string cfg = app.config_to_str(true, false);
    json m;
    m["command"] = command;
    m["config_hash"] = dsde::fnv1a(cfg);
    m["config"] = cfg;
    m["seed"] = common.seed;
    m["kernel"] = dsde::kernels::backend_name();
    m["extra"] = std::move(extra);
    dsde::write_text_file(dir / "manifest.json", m.dump(2));
}

dsde::SddeSpec load_spec(const std::string& name) {
    if (name == "benchmark") return dsde::benchmark_sdde();
    return dsde::SddeSpec::from_json(dsde::read_text_file(name));
}

dsde::EtaGenerator parse_eta(const std::string& text, int dim) {
    if (text == "sincos") return dsde::eta_sin_cos();
    if (text.rfind("constant:", 0) == 0) {
        std::vector<double> point;
        std::string rest = text.substr(9);
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            const std::size_t comma = rest.find(',', pos);
            point.push_back(std::stod(rest.substr(pos, comma - pos)));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (static_cast<int>(point.size()) != dim)
            throw dsde::ConfigError("constant eta needs one value per coordinate");
        return dsde::eta_constant(point);
    }
    throw dsde::ConfigError("unknown eta generator: " + text);
}

// shared SGD/net/SBO option block
struct PipelineArgs {
    int width = 32;
    std::string drift_act = "tanh", aleatoric_act = "sigmoid", epistemic_act = "relu";
    double momentum = 0.9, weight_decay = 5e-5;
    double drift_lr = 0.01, aleatoric_lr = 0.01, epistemic_lr = 0.1;
    long drift_iters = 500, aleatoric_iters = 500, epistemic_iters = 200;
    long minibatch = 0;
    std::size_t sbo_count = 2000;
    double sbo_d_minus = 0.0, sbo_d_plus = 0.0, sbo_noise_mean = 0.0, sbo_noise_std = 1.0;
    int sbo_max_iters = 1000;
    double sbo_whole_frac = 0.5;

    void attach(CLI::App& app) {
        add_opt(app, "net.width", width, "hidden width m");
        add_opt(app, "net.drift-activation", drift_act, "drift activation");
        add_opt(app, "net.aleatoric-activation", aleatoric_act, "aleatoric activation");
        add_opt(app, "net.epistemic-activation", epistemic_act, "classifier activation");
        add_opt(app, "sgd.momentum", momentum, "SGD momentum");
        add_opt(app, "sgd.weight-decay", weight_decay, "coupled weight decay");
        add_opt(app, "sgd.minibatch", minibatch, "minibatch size (0 = full batch)");
        add_opt(app, "sgd.drift-lr", drift_lr, "drift learning rate");
        add_opt(app, "sgd.aleatoric-lr", aleatoric_lr, "aleatoric learning rate");
        add_opt(app, "sgd.epistemic-lr", epistemic_lr, "classifier learning rate");
        add_opt(app, "sgd.drift-iters", drift_iters, "drift iterations");
        add_opt(app, "sgd.aleatoric-iters", aleatoric_iters, "aleatoric iterations");
        add_opt(app, "sgd.epistemic-iters", epistemic_iters, "classifier iterations");
        add_opt(app, "sbo.count", sbo_count, "generated OOD windows");
        add_opt(app, "sbo.d-minus", sbo_d_minus, "min distance (0 = auto)");
        add_opt(app, "sbo.d-plus", sbo_d_plus, "offset step (0 = auto)");
        add_opt(app, "sbo.noise-mean", sbo_noise_mean, "offset noise mean");
        add_opt(app, "sbo.noise-std", sbo_noise_std, "offset noise std");
        add_opt(app, "sbo.max-iters", sbo_max_iters, "offset iteration cap");
        add_opt(app, "sbo.whole-window-frac", sbo_whole_frac,
                "fraction of OOD windows using the whole-window shift");
    }

    dsde::PipelineConfig build(std::uint64_t seed) const {
        dsde::PipelineConfig cfg;
        cfg.net.width = width;
        cfg.net.drift_act = dsde::Activation::parse(drift_act, 1.0);
        cfg.net.aleatoric_act = dsde::Activation::parse(aleatoric_act, 1.0);
        cfg.net.epistemic_act = dsde::Activation::parse(epistemic_act, 1.0);
        cfg.drift_sgd = {drift_lr, momentum, weight_decay, drift_iters, minibatch};
        cfg.aleatoric_sgd = {aleatoric_lr, momentum, weight_decay, aleatoric_iters, minibatch};
        cfg.epistemic_sgd = {epistemic_lr, momentum, weight_decay, epistemic_iters, minibatch};
        cfg.sbo.d_minus = sbo_d_minus;
        cfg.sbo.d_plus = sbo_d_plus;
        cfg.sbo.noise_mean = sbo_noise_mean;
        cfg.sbo.noise_std = sbo_noise_std;
        cfg.sbo.max_iters = sbo_max_iters;
        cfg.sbo_count = sbo_count;
        cfg.sbo_whole_window_frac = sbo_whole_frac;
        cfg.seed = seed;
        return cfg;
    }
};

std::vector<dsde::OodInterval> read_intervals_csv(const fs::path& file) {
    const dsde::CsvTable table = dsde::read_csv(file);
    const long y = table.column_index("year");
    const long s = table.column_index("start");
    const long e = table.column_index("end");
    if (y < 0 || s < 0 || e < 0)
        throw dsde::MissingColumns("interval CSV needs year,start,end columns");
    std::vector<dsde::OodInterval> out;
    for (std::size_t r = 0; r < table.rows; ++r)
        out.push_back({static_cast<std::size_t>(table.cell(r, y)) - 1,
                       static_cast<long>(table.cell(r, s)),
                       static_cast<long>(table.cell(r, e))});
    return out;
}

void fill_horizon_overrides(const std::vector<int>& horizons, const std::vector<double>& lrs,
                            const std::vector<long>& iters, const dsde::SgdConfig& base,
                            std::map<int, dsde::SgdConfig>& out) {
    if (!lrs.empty() && lrs.size() != horizons.size())
        throw dsde::ConfigError("per-horizon lr list must match the horizons list");
    if (!iters.empty() && iters.size() != horizons.size())
        throw dsde::ConfigError("per-horizon iteration list must match the horizons list");
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        dsde::SgdConfig cfg = base;
        if (!lrs.empty()) cfg.learning_rate = lrs[i];
        if (!iters.empty()) cfg.iterations = iters[i];
        out[horizons[i]] = cfg;
    }
}

// ------------------------------------------------------------- subcommands

int cmd_simulate(CLI::App& app, const CommonArgs& common, const std::string& spec_name,
                 const std::string& eta_name, double tau, double horizon, double dt,
                 std::size_t n_paths, double diffusion_factor, bool per_path_files,
                 bool with_increments) {
    const dsde::SddeSpec spec = load_spec(spec_name);
    const dsde::TimeGrid grid = dsde::make_time_grid(tau, horizon, dt);
    const dsde::PathSet paths = dsde::simulate_paths(
        spec, parse_eta(eta_name, spec.dim), grid, n_paths, common.seed, diffusion_factor);
    const fs::path dir = common.run_dir(app, "simulate");
    json extra;
    extra["spec_hash"] = dsde::fnv1a(spec.to_json());
    extra["paths"] = n_paths;
    if (per_path_files) {
        dsde::write_paths_csv_per_path(dir / "paths", "path", paths);
        extra["outputs"] = {"paths/"};
    } else {
        dsde::write_paths_csv(dir / "paths.csv", paths);
        extra["outputs"] = {"paths.csv"};
    }
    if (with_increments) dsde::write_increments_csv(dir / "increments.csv", paths);
    write_manifest(dir, app, "simulate", common, std::move(extra));
    std::cout << "wrote " << (dir / "paths.csv").string() << "\n";
    return 0;
}

int cmd_train(CLI::App& app, const CommonArgs& common, const PipelineArgs& pipe_args,
              const std::string& data_file, int lags, int horizon) {
    const dsde::PathSet data = dsde::read_paths_csv(data_file);
    const dsde::PipelineConfig pipe = pipe_args.build(common.seed);

    dsde::WindowSet train, validation;
    if (data.paths.size() > 1) {
        const dsde::PathSplit split = dsde::split_by_year_ratio(data.paths.size());
        train = dsde::build_windows(data, lags, horizon, split.train, lags);
        validation = dsde::build_windows(data, lags, horizon, split.validation, lags);
    } else {
        train = dsde::build_windows(data, lags, horizon, static_cast<long>(lags));
        validation = train;
    }
    const dsde::TrainedModel trained = dsde::train_pipeline(train, validation, horizon, pipe);

    const fs::path dir = common.run_dir(app, "train");
    dsde::write_text_file(dir / "model.json", trained.model.to_json());
    std::string log_csv = "stage,iteration,loss\n";
    auto append_log = [&](const char* stage, const dsde::TrainLog& log) {
        for (std::size_t i = 0; i < log.size(); ++i)
            log_csv += std::string(stage) + "," + std::to_string(i) + "," +
                       dsde::format_double(log[i]) + "\n";
    };
    append_log("drift", trained.drift_log);
    append_log("aleatoric", trained.aleatoric_log);
    append_log("epistemic", trained.epistemic_log);
    dsde::write_text_file(dir / "train_log.csv", log_csv);
    json extra;
    extra["sigma_e"] = trained.model.sigma_e;
    extra["sbo_discarded"] = trained.sbo_discarded;
    extra["outputs"] = {"model.json", "train_log.csv"};
    write_manifest(dir, app, "train", common, std::move(extra));
    std::cout << "wrote " << (dir / "model.json").string() << "\n";
    return 0;
}

int cmd_predict(CLI::App& app, const CommonArgs& common, const std::string& model_file,
                const std::string& history_file, int steps, double ci_level) {
    const dsde::DelaySdeNet model =
        dsde::DelaySdeNet::from_json(dsde::read_text_file(model_file));
    const dsde::CsvTable table = dsde::read_csv(history_file);
    const long t_col = table.column_index("t");
    if (t_col < 0) throw dsde::MissingColumns("history CSV needs a 't' column");
    std::vector<long> cols;
    for (int j = 1; j <= model.dim; ++j) {
        const long c = table.column_index("x" + std::to_string(j));
        if (c < 0) throw dsde::MissingColumns("history CSV lacks x" + std::to_string(j));
        cols.push_back(c);
    }
    if (table.rows < static_cast<std::size_t>(model.lags))
        throw dsde::InsufficientHistory("history has " + std::to_string(table.rows) +
                                        " rows, model needs " + std::to_string(model.lags));
    std::vector<double> history;
    for (std::size_t r = 0; r < table.rows; ++r)
        for (long c : cols) history.push_back(table.cell(r, c));
    const double t_k = table.cell(table.rows - 1, t_col);

    const dsde::PredictionBundle bundle = dsde::predict(model, t_k, history, steps, ci_level);
    const fs::path dir = common.run_dir(app, "predict");
    std::string text = "t,truth,mean,std_a,std_e,ci_lo,ci_hi\n";
    for (int i = 0; i < bundle.steps; ++i) {
        const std::size_t idx = static_cast<std::size_t>(i) * model.dim;
        const double std_a = std::sqrt(bundle.aleatoric_var[idx]);
        text += dsde::format_double(t_k + (i + 1) * model.dt) + ",," +
                dsde::format_double(bundle.mean[idx]) + "," + dsde::format_double(std_a) +
                "," + dsde::format_double(bundle.epistemic_std) + "," +
                dsde::format_double(bundle.ci_lo[idx]) + "," +
                dsde::format_double(bundle.ci_hi[idx]) + "\n";
    }
    dsde::write_text_file(dir / "prediction.csv", text);
    json extra;
    extra["epistemic_prob"] = bundle.epistemic_prob;
    extra["outputs"] = {"prediction.csv"};
    write_manifest(dir, app, "predict", common, std::move(extra));
    std::cout << "wrote " << (dir / "prediction.csv").string() << "\n";
    return 0;
}

int cmd_convergence(CLI::App& app, const CommonArgs& common, const PipelineArgs& pipe_args,
                    const std::string& spec_name, dsde::ConvergenceConfig cfg) {
    cfg.pipeline = pipe_args.build(common.seed);
    const dsde::SddeSpec spec = load_spec(spec_name);
    const dsde::ConvergenceReport report = dsde::run_convergence_study(spec, cfg);
    const fs::path dir = common.run_dir(app, "convergence");
    dsde::write_convergence_csv(dir / "convergence.csv", report);
    json extra;
    extra["gamma"] = report.gamma;
    extra["intercept"] = report.intercept;
    extra["delta_ref"] = report.delta_ref;
    extra["dropped_kappas"] = report.dropped;
    extra["outputs"] = {"convergence.csv"};
    write_manifest(dir, app, "convergence", common, std::move(extra));
    std::cout << "gamma = " << report.gamma << "\n";
    return 0;
}

int cmd_compare(CLI::App& app, const CommonArgs& common, const PipelineArgs& pipe_args,
                const std::string& spec_name, dsde::CompareConfig cfg,
                const std::string& intervals_file, const std::vector<double>& drift_lr_ph,
                const std::vector<long>& drift_iters_ph,
                const std::vector<double>& aleatoric_lr_ph,
                const std::vector<long>& aleatoric_iters_ph) {
    cfg.pipeline = pipe_args.build(common.seed);
    if (!intervals_file.empty() && intervals_file != "draw")
        cfg.intervals = read_intervals_csv(intervals_file);
    fill_horizon_overrides(cfg.horizons, drift_lr_ph, drift_iters_ph, cfg.pipeline.drift_sgd,
                           cfg.drift_by_horizon);
    fill_horizon_overrides(cfg.horizons, aleatoric_lr_ph, aleatoric_iters_ph,
                           cfg.pipeline.aleatoric_sgd, cfg.aleatoric_by_horizon);
    const dsde::SddeSpec spec = load_spec(spec_name);
    const dsde::ComparisonReport report = dsde::run_comparison(spec, cfg);
    const fs::path dir = common.run_dir(app, "compare");
    dsde::write_comparison_csv(dir / "report.csv", report);
    json extra;
    extra["contamination_points"] = report.contamination_points;
    extra["contamination_windows"] = report.contamination_windows;
    auto intervals = json::array();
    for (const auto& iv : report.intervals)
        intervals.push_back({{"year", iv.path + 1}, {"start", iv.k_start}, {"end", iv.k_end}});
    extra["intervals"] = std::move(intervals);
    extra["outputs"] = {"report.csv"};
    write_manifest(dir, app, "compare", common, std::move(extra));
    std::cout << "wrote " << (dir / "report.csv").string() << "\n";
    return 0;
}

int cmd_ood(CLI::App& app, const CommonArgs& common, const std::string& data_file, int lags,
            const std::string& mode, std::size_t count, double d_minus, double d_plus,
            double noise_mean, double noise_std, int max_iters, double sigma) {
    const dsde::PathSet data = dsde::read_paths_csv(data_file);
    const dsde::WindowSet windows =
        dsde::build_windows(data, lags, 1, static_cast<long>(lags));
    const fs::path dir = common.run_dir(app, "ood");
    json extra;
    dsde::WindowSet out;
    if (mode == "gaussian") {
        out = dsde::gaussian_offset(windows, sigma, count, common.seed);
    } else {
        dsde::SboConfig cfg;
        cfg.d_minus = d_minus;
        cfg.d_plus = d_plus;
        cfg.noise_mean = noise_mean;
        cfg.noise_std = noise_std;
        cfg.max_iters = max_iters;
        cfg.mode = mode == "whole-window" ? dsde::SboConfig::Mode::WholeWindowShift
                                          : dsde::SboConfig::Mode::PerLagNoise;
        dsde::OodResult result = dsde::soft_brownian_offset(windows, cfg, count, common.seed);
        extra["d_minus_used"] = result.d_minus_used;
        extra["d_plus_used"] = result.d_plus_used;
        extra["discarded"] = result.discarded;
        out = std::move(result.windows);
    }
    dsde::write_windows_csv(dir / "ood_windows.csv", out);
    extra["outputs"] = {"ood_windows.csv"};
    write_manifest(dir, app, "ood", common, std::move(extra));
    std::cout << "wrote " << (dir / "ood_windows.csv").string() << "\n";
    return 0;
}

int cmd_nstep(CLI::App& app, const CommonArgs& common, const PipelineArgs& pipe_args,
              const std::string& data_file, dsde::NstepConfig cfg,
              const std::vector<double>& drift_lr_ph, const std::vector<long>& drift_iters_ph,
              const std::vector<double>& aleatoric_lr_ph,
              const std::vector<long>& aleatoric_iters_ph) {
    cfg.pipeline = pipe_args.build(common.seed);
    fill_horizon_overrides(cfg.horizons, drift_lr_ph, drift_iters_ph, cfg.pipeline.drift_sgd,
                           cfg.drift_by_horizon);
    fill_horizon_overrides(cfg.horizons, aleatoric_lr_ph, aleatoric_iters_ph,
                           cfg.pipeline.aleatoric_sgd, cfg.aleatoric_by_horizon);
    const dsde::PathSet data = dsde::read_paths_csv(data_file);
    const fs::path dir = common.run_dir(app, "nstep");
    const fs::path plot = dir / "plot.csv";
    const dsde::NstepReport report = dsde::run_nstep_eval(data, cfg, &plot);
    dsde::write_nstep_csv(dir / "nstep.csv", report);
    json extra;
    extra["outputs"] = {"nstep.csv", "plot.csv"};
    write_manifest(dir, app, "nstep", common, std::move(extra));
    std::cout << "wrote " << (dir / "nstep.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay-SDE-net: SDDE simulation, training, and evaluation"};
    app.require_subcommand(1);

    CommonArgs common;

    // ---- simulate
    auto* sim = app.add_subcommand("simulate", "simulate SDDE sample paths");
    std::string sim_spec = "benchmark", sim_eta = "sincos";
    double sim_tau = 4.0, sim_horizon = 365.0, sim_dt = 1.0, sim_factor = 1.0;
    std::size_t sim_paths = 110;
    bool sim_per_path = false, sim_increments = false;
    common.attach(*sim);
    add_opt(*sim, "spec", sim_spec, "generating system ('benchmark' or JSON file)");
    add_opt(*sim, "eta", sim_eta, "initial segment ('sincos' or 'constant:v1,v2')");
    add_opt(*sim, "grid.tau", sim_tau, "memory length");
    add_opt(*sim, "grid.horizon", sim_horizon, "simulation horizon T");
    add_opt(*sim, "grid.dt", sim_dt, "step size");
    add_opt(*sim, "n-paths", sim_paths, "number of sample paths");
    add_opt(*sim, "diffusion-factor", sim_factor, "diffusion amplification");
    add_opt(*sim, "per-path-files", sim_per_path, "one CSV per path");
    add_opt(*sim, "write-increments", sim_increments, "also write increments.csv");

    // ---- train
    auto* train = app.add_subcommand("train", "fit a model on a path CSV");
    CommonArgs train_common;
    PipelineArgs train_pipe;
    std::string train_data;
    int train_lags = 4, train_horizon = 1;
    train_common.attach(*train);
    train_pipe.attach(*train);
    add_opt(*train, "data", train_data, "path CSV")->required();
    add_opt(*train, "lags", train_lags, "lag count p");
    add_opt(*train, "horizon", train_horizon, "prediction horizon N");

    // ---- predict
    auto* predict = app.add_subcommand("predict", "N-step prediction with intervals");
    CommonArgs predict_common;
    std::string predict_model, predict_history;
    int predict_steps = 7;
    double predict_ci = 0.95;
    predict_common.attach(*predict);
    add_opt(*predict, "model", predict_model, "model JSON")->required();
    add_opt(*predict, "history", predict_history, "history CSV (t,x1,...)")->required();
    add_opt(*predict, "steps", predict_steps, "steps ahead N");
    add_opt(*predict, "ci", predict_ci, "confidence level");

    // ---- convergence
    auto* conv = app.add_subcommand("convergence", "numerical convergence study");
    CommonArgs conv_common;
    PipelineArgs conv_pipe;
    conv_pipe.drift_lr = 0.01;
    conv_pipe.aleatoric_lr = 0.05;
    conv_pipe.drift_iters = 30;
    conv_pipe.aleatoric_iters = 22;
    std::string conv_spec = "benchmark";
    dsde::ConvergenceConfig conv_cfg;
    conv_common.attach(*conv);
    conv_pipe.attach(*conv);
    add_opt(*conv, "spec", conv_spec, "generating system");
    add_opt(*conv, "grid.tau", conv_cfg.tau, "memory length");
    add_opt(*conv, "grid.horizon", conv_cfg.horizon, "horizon T");
    add_opt(*conv, "grid.dt-ref", conv_cfg.dt_ref, "reference step size");
    add_opt(*conv, "n-paths", conv_cfg.paths, "simulated paths M");
    add_opt(*conv, "train-frac", conv_cfg.train_frac, "training fraction");
    add_opt(*conv, "sigma-val-frac", conv_cfg.sigma_val_frac, "sigma_e validation carve-out");
    add_opt(*conv, "kappas", conv_cfg.kappas, "coarsening factors");

    // ---- compare
    auto* comp = app.add_subcommand("compare", "model comparison on simulated years");
    CommonArgs comp_common;
    PipelineArgs comp_pipe;
    std::string comp_spec = "benchmark", comp_intervals = "draw";
    dsde::CompareConfig comp_cfg;
    std::vector<double> comp_dlr, comp_alr;
    std::vector<long> comp_dit, comp_ait;
    comp_common.attach(*comp);
    comp_pipe.attach(*comp);
    add_opt(*comp, "spec", comp_spec, "generating system");
    add_opt(*comp, "years", comp_cfg.years, "simulated years");
    add_opt(*comp, "horizons", comp_cfg.horizons, "prediction horizons");
    add_opt(*comp, "with-sde-net", comp_cfg.with_sde_net, "include the p=1 baseline");
    add_opt(*comp, "with-var", comp_cfg.with_var, "include the VAR baseline");
    add_opt(*comp, "with-ood", comp_cfg.with_ood, "evaluate OOD detection");
    add_opt(*comp, "var-order", comp_cfg.var_order, "VAR order");
    add_opt(*comp, "ood.factor", comp_cfg.ood_factor, "diffusion amplification");
    add_opt(*comp, "ood.intervals", comp_intervals, "interval CSV or 'draw'");
    add_opt(*comp, "ood.draw-count", comp_cfg.draw_intervals, "intervals to draw");
    add_opt(*comp, "ood.draw-min-len", comp_cfg.draw_min_len, "min interval length");
    add_opt(*comp, "ood.draw-max-len", comp_cfg.draw_max_len, "max interval length");
    add_opt(*comp, "sgd.drift-lr-per-horizon", comp_dlr, "per-horizon drift lr");
    add_opt(*comp, "sgd.drift-iters-per-horizon", comp_dit, "per-horizon drift iters");
    add_opt(*comp, "sgd.aleatoric-lr-per-horizon", comp_alr, "per-horizon aleatoric lr");
    add_opt(*comp, "sgd.aleatoric-iters-per-horizon", comp_ait, "per-horizon aleatoric iters");

    // ---- ood
    auto* ood = app.add_subcommand("ood", "generate synthetic OOD windows");
    CommonArgs ood_common;
    std::string ood_data, ood_mode = "per-lag";
    int ood_lags = 4, ood_max_iters = 1000;
    std::size_t ood_count = 2000;
    double ood_dminus = 0.0, ood_dplus = 0.0, ood_nmean = 0.0, ood_nstd = 1.0, ood_sigma = 1.0;
    ood_common.attach(*ood);
    add_opt(*ood, "data", ood_data, "path CSV")->required();
    add_opt(*ood, "lags", ood_lags, "lag count p");
    add_opt(*ood, "mode", ood_mode, "per-lag | whole-window | gaussian");
    add_opt(*ood, "count", ood_count, "points to generate");
    add_opt(*ood, "d-minus", ood_dminus, "min distance (0 = auto)");
    add_opt(*ood, "d-plus", ood_dplus, "offset step (0 = auto)");
    add_opt(*ood, "noise-mean", ood_nmean, "offset noise mean");
    add_opt(*ood, "noise-std", ood_nstd, "offset noise std");
    add_opt(*ood, "max-iters", ood_max_iters, "offset iteration cap");
    add_opt(*ood, "sigma", ood_sigma, "gaussian mode scale");

    // ---- nstep
    auto* nstep = app.add_subcommand("nstep", "N-step evaluation on a CSV series");
    CommonArgs nstep_common;
    PipelineArgs nstep_pipe;
    std::string nstep_data;
    dsde::NstepConfig nstep_cfg;
    std::vector<double> nstep_dlr, nstep_alr;
    std::vector<long> nstep_dit, nstep_ait;
    nstep_common.attach(*nstep);
    nstep_pipe.attach(*nstep);
    add_opt(*nstep, "data", nstep_data, "path or series CSV")->required();
    add_opt(*nstep, "lags", nstep_cfg.lags, "lag count p");
    add_opt(*nstep, "horizons", nstep_cfg.horizons, "prediction horizons");
    add_opt(*nstep, "plot-horizon", nstep_cfg.plot_horizon, "horizon for plot.csv (0 = first)");
    add_opt(*nstep, "ci", nstep_cfg.ci_level, "confidence level for plot.csv");
    add_opt(*nstep, "sgd.drift-lr-per-horizon", nstep_dlr, "per-horizon drift lr");
    add_opt(*nstep, "sgd.drift-iters-per-horizon", nstep_dit, "per-horizon drift iters");
    add_opt(*nstep, "sgd.aleatoric-lr-per-horizon", nstep_alr, "per-horizon aleatoric lr");
    add_opt(*nstep, "sgd.aleatoric-iters-per-horizon", nstep_ait,
            "per-horizon aleatoric iters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) {
            dsde::set_thread_count(common.threads);
            return cmd_simulate(*sim, common, sim_spec, sim_eta, sim_tau, sim_horizon, sim_dt,
                                sim_paths, sim_factor, sim_per_path, sim_increments);
        }
        if (train->parsed()) {
            dsde::set_thread_count(train_common.threads);
            return cmd_train(*train, train_common, train_pipe, train_data, train_lags,
                             train_horizon);
        }
        if (predict->parsed()) {
            dsde::set_thread_count(predict_common.threads);
            return cmd_predict(*predict, predict_common, predict_model, predict_history,
                               predict_steps, predict_ci);
        }
        if (conv->parsed()) {
            dsde::set_thread_count(conv_common.threads);
            return cmd_convergence(*conv, conv_common, conv_pipe, conv_spec, conv_cfg);
        }
        if (comp->parsed()) {
            dsde::set_thread_count(comp_common.threads);
            return cmd_compare(*comp, comp_common, comp_pipe, comp_spec, comp_cfg,
                               comp_intervals, comp_dlr, comp_dit, comp_alr, comp_ait);
        }
        if (ood->parsed()) {
            dsde::set_thread_count(ood_common.threads);
            return cmd_ood(*ood, ood_common, ood_data, ood_lags, ood_mode, ood_count,
                           ood_dminus, ood_dplus, ood_nmean, ood_nstd, ood_max_iters,
                           ood_sigma);
        }
        if (nstep->parsed()) {
            dsde::set_thread_count(nstep_common.threads);
            return cmd_nstep(*nstep, nstep_common, nstep_pipe, nstep_data, nstep_cfg,
                             nstep_dlr, nstep_dit, nstep_alr, nstep_ait);
        }
    } catch (const dsde::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.error_class());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
