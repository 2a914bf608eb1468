#include "dsde/sdde.hpp"

#include <cmath>
#include <mutex>
#include <string>

#include "dsde/parallel.hpp"
#include "net_json.hpp"

namespace dsde {

void assemble_input(double t, std::span<const double> window, int dim, int p,
                    std::span<double> out) {
    out[0] = t;
    std::copy(window.begin(), window.begin() + static_cast<std::size_t>(dim) * p,
              out.begin() + 1);
}

namespace {

TwoLayerNet fixed_net(int input_dim, Activation act, std::vector<double> a,
                      std::vector<std::vector<double>> w, std::vector<double> b,
                      bool output_bias = false) {
    TwoLayerNet net;
    net.width = static_cast<int>(a.size());
    net.input_dim = input_dim;
    net.act = act;
    net.a = std::move(a);
    net.b = std::move(b);
    net.has_output_bias = output_bias;
    for (auto& row : w) net.w.insert(net.w.end(), row.begin(), row.end());
    return net;
}

}  // namespace

SddeSpec benchmark_sdde() {
    // weights are 10^-2 times small integers, except the seasonal time weight
    // of the first diffusion net which is -5/365 as such (the variance decays
    // by a factor sigmoid(-5)^2 over a 365-day year)
    const double s = 1e-2;
    SddeSpec spec;
    spec.dim = 2;
    spec.lags = 4;
    const Activation tanh1{Activation::Kind::Tanh, 1.0};
    const Activation sig1{Activation::Kind::Sigmoid, 1.0};

    spec.drift.push_back(fixed_net(
        9, tanh1, {5.0, 5.0},
        {{0, 3 * s, 2 * s, 2 * s, 5 * s, -3 * s, 1 * s, -3 * s, -1 * s},
         {0, 1 * s, 0, -0.5 * s, 0, -1 * s, 0, -0.5 * s, 0}},
        {0.0, 0.0}));
    spec.drift.push_back(fixed_net(
        9, tanh1, {5.0, 5.0},
        {{0, 0, 2 * s, 0, -3 * s, 0, 1 * s, 0, 0},
         {0, 0, 1 * s, 0, -0.5 * s, 0, 0, 0, -0.5 * s}},
        {0.0, 0.0}));
    spec.diffusion.push_back(fixed_net(
        9, sig1, {4.0}, {{-5.0 / 365.0, 0, 0, 0, 0, 0, 0, 0, 0}}, {0.0}));
    spec.diffusion.push_back(fixed_net(
        9, sig1, {1.0 / 8.0}, {{0, 0, 0, 0, 0, 0, 0, 0, 1 * s}}, {1.0}));
    return spec;
}

EtaGenerator eta_constant(std::vector<double> point) {
    return [point](Rng&, const TimeGrid& grid, int dim, std::vector<double>& values) {
        if (static_cast<int>(point.size()) != dim)
            throw DimensionMismatch("eta_constant: point dimension mismatch");
        values.resize(static_cast<std::size_t>(grid.lag_points + 1) * dim);
        for (long k = 0; k <= grid.lag_points; ++k)
            for (int j = 0; j < dim; ++j) values[static_cast<std::size_t>(k) * dim + j] = point[j];
    };
}

EtaGenerator eta_sin_cos() {
    return [](Rng& rng, const TimeGrid& grid, int dim, std::vector<double>& values) {
        if (dim != 2) throw DimensionMismatch("eta_sin_cos requires dim = 2");
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        values.resize(static_cast<std::size_t>(grid.lag_points + 1) * dim);
        for (long k = 0; k <= grid.lag_points; ++k) {
            const double t = grid.time(k - grid.lag_points);
            values[static_cast<std::size_t>(k) * dim + 0] = std::sin(z1 * t);
            values[static_cast<std::size_t>(k) * dim + 1] = std::cos(z2 * t);
        }
    };
}

PathSet simulate_paths(const SddeSpec& spec, const EtaGenerator& eta, const TimeGrid& grid,
                       std::size_t n, std::uint64_t seed, double diffusion_scale,
                       double blowup_cap) {
    if (spec.dim <= 0 || spec.lags <= 0) throw DimensionMismatch("spec has empty dimensions");
    if (static_cast<int>(spec.drift.size()) != spec.dim ||
        static_cast<int>(spec.diffusion.size()) != spec.dim)
        throw DimensionMismatch("spec needs one drift and one diffusion net per coordinate");
    if (grid.lag_points < spec.lags)
        throw InsufficientHistory("grid memory (" + std::to_string(grid.lag_points) +
                                  " points) shorter than lag count " + std::to_string(spec.lags));

    const int d = spec.dim;
    const int p = spec.lags;
    const int in_dim = 1 + d * p;
    if (spec.drift[0].input_dim != in_dim)
        throw DimensionMismatch("spec nets expect input dim " +
                                std::to_string(spec.drift[0].input_dim) + ", grid implies " +
                                std::to_string(in_dim));

    PathSet set;
    set.grid = grid;
    set.dim = d;
    set.paths.assign(n, Path{grid, d, {}});
    set.increments.resize(n);

    std::string failure;
    std::mutex failure_mu;
    parallel_for(n, [&](std::size_t i) {
        Path& path = set.paths[i];
        path.values.assign(static_cast<std::size_t>(grid.total_points()) * d, 0.0);

        Rng eta_rng(seed, 2 * i);
        std::vector<double> eta_values;
        eta(eta_rng, grid, d, eta_values);
        std::copy(eta_values.begin(), eta_values.end(), path.values.begin());

        set.increments[i] = sample_brownian(grid, d, seed, 2 * i + 1);
        const BrownianIncrements& dw = set.increments[i];

        std::vector<double> drift_in(in_dim), diff_in(in_dim, 0.0);
        // frozen diffusion state: the eta window just before time 0
        if (spec.diffusion_input == DiffusionInput::InitialWindow) {
            const LagVector eta_window = project(path, p, 0);
            assemble_input(0.0, eta_window.entries, d, p, diff_in);
        }

        for (long k = 0; k < grid.step_count; ++k) {
            const double t = grid.time(k);
            const LagVector window = project(path, p, k);
            assemble_input(t, window.entries, d, p, drift_in);
            diff_in[0] = t;
            const auto cur = path.at(k);
            auto next = path.at(k + 1);
            for (int j = 0; j < d; ++j) {
                const double f = spec.drift_value(j, drift_in);
                const double g = spec.diffusion_value(j, diff_in);
                next[j] = cur[j] + f * grid.dt + diffusion_scale * g * dw.at(k + 1, j);
                if (!(std::abs(next[j]) <= blowup_cap)) {
                    std::lock_guard<std::mutex> lock(failure_mu);
                    if (failure.empty())
                        failure = "state magnitude exceeded " + std::to_string(blowup_cap) +
                                  " at path " + std::to_string(i) + ", step " + std::to_string(k + 1);
                    return;
                }
            }
        }
    });
    if (!failure.empty()) throw NumericalBlowup(failure);
    return set;
}

PathSet amplified_diffusion_paths(const SddeSpec& spec, double factor, const EtaGenerator& eta,
                                  const TimeGrid& grid, std::size_t n, std::uint64_t seed) {
    if (!(factor > 0.0)) throw ConfigError("diffusion amplification factor must be positive");
    return simulate_paths(spec, eta, grid, n, seed, factor);
}

std::string SddeSpec::to_json() const {
    nlohmann::json j;
    j["dim"] = dim;
    j["lags"] = lags;
    j["diffusion_input"] =
        diffusion_input == DiffusionInput::InitialWindow ? "initial-window" : "none";
    auto nets = nlohmann::json::array();
    for (const auto& net : drift) nets.push_back(net_to_json(net));
    j["drift"] = std::move(nets);
    nets = nlohmann::json::array();
    for (const auto& net : diffusion) nets.push_back(net_to_json(net));
    j["diffusion"] = std::move(nets);
    return j.dump(2);
}

SddeSpec SddeSpec::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    SddeSpec spec;
    spec.dim = j.at("dim").get<int>();
    spec.lags = j.at("lags").get<int>();
    const auto mode = j.value("diffusion_input", std::string("initial-window"));
    spec.diffusion_input =
        mode == "none" ? DiffusionInput::None : DiffusionInput::InitialWindow;
    for (const auto& net : j.at("drift")) spec.drift.push_back(net_from_json(net));
    for (const auto& net : j.at("diffusion")) spec.diffusion.push_back(net_from_json(net));
    return spec;
}

}  // namespace dsde
