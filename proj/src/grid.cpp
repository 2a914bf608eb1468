#include "dsde/grid.hpp"

#include <cmath>
#include <string>

namespace dsde {
namespace {

long commensurate_ratio(double value, double dt, const char* what) {
    const double ratio = value / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, std::abs(ratio)))
        throw NonCommensurate(std::string(what) + " is not an integer multiple of dt (ratio " +
                              std::to_string(ratio) + ")");
    return static_cast<long>(rounded);
}

}  // namespace

TimeGrid make_time_grid(double tau, double horizon, double dt) {
    if (!(dt > 0.0)) throw NonCommensurate("dt must be positive");
    if (tau < 0.0) throw NonCommensurate("tau must be nonnegative");
    if (!(horizon > 0.0)) throw NonCommensurate("horizon must be positive");
    TimeGrid g;
    g.tau = tau;
    g.horizon = horizon;
    g.dt = dt;
    g.lag_points = commensurate_ratio(tau, dt, "tau");
    g.step_count = commensurate_ratio(horizon, dt, "horizon");
    return g;
}

LagVector project(const Path& path, int p, long k) {
    if (p <= 0) throw InsufficientHistory("lag count must be positive");
    if (k - p < -path.grid.lag_points)
        throw InsufficientHistory("projection at index " + std::to_string(k) + " needs " +
                                  std::to_string(p) + " lags but history starts at -" +
                                  std::to_string(path.grid.lag_points));
    if (k > path.grid.step_count)
        throw InsufficientHistory("projection reference index beyond grid end");
    LagVector lv;
    lv.reference_index = k;
    lv.dim = path.dim;
    lv.lags = p;
    lv.entries.resize(static_cast<std::size_t>(p) * path.dim);
    for (int i = 0; i < p; ++i) {
        const auto src = path.at(k - p + i);
        for (int j = 0; j < path.dim; ++j) lv.entries[static_cast<std::size_t>(i) * path.dim + j] = src[j];
    }
    return lv;
}

std::vector<double> linearize_initial(const std::vector<std::pair<double, double>>& samples,
                                      const TimeGrid& grid) {
    if (samples.size() < 2) throw GapTooLarge("need at least two samples");
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (!(samples[i].first > samples[i - 1].first))
            throw GapTooLarge("sample times must be strictly increasing");

    std::vector<double> out(static_cast<std::size_t>(grid.lag_points) + 1);
    const double slack = 1e-12 * std::max(1.0, grid.tau);
    std::size_t seg = 0;
    for (long k = -grid.lag_points; k <= 0; ++k) {
        const double t = grid.time(k);
        if (t < samples.front().first - slack || t > samples.back().first + slack)
            throw GapTooLarge("grid point " + std::to_string(t) + " not bracketed by samples");
        while (seg + 2 < samples.size() && samples[seg + 1].first < t) ++seg;
        const auto& [t0, v0] = samples[seg];
        const auto& [t1, v1] = samples[seg + 1];
        const double w = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
        out[grid.offset(k)] = v0 + w * (v1 - v0);
    }
    return out;
}

}  // namespace dsde
