#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsde/errors.hpp"

namespace dsde {

// Equidistant grid t_k = k*dt for k = -L..K, with L*dt = tau (memory length)
// and K*dt = horizon. The initial segment lives on [-tau, 0], the simulated
// part on (0, horizon].
struct TimeGrid {
    double tau = 0.0;
    double horizon = 0.0;
    double dt = 0.0;
    long lag_points = 0;   // L
    long step_count = 0;   // K

    double time(long k) const { return static_cast<double>(k) * dt; }
    long total_points() const { return lag_points + step_count + 1; }
    // array offset of grid index k in [-L, K]
    std::size_t offset(long k) const { return static_cast<std::size_t>(k + lag_points); }
};

// Throws NonCommensurate unless tau/dt and horizon/dt are integers
// (tolerance 1e-9 on the rounded ratio).
TimeGrid make_time_grid(double tau, double horizon, double dt);

// One sample trajectory on the full grid [-tau, horizon]; values are stored
// per grid point, d entries each, every entry finite.
struct Path {
    TimeGrid grid;
    int dim = 0;
    std::vector<double> values;  // (L+K+1) x dim, grid-point major

    std::span<const double> at(long k) const {
        return {values.data() + grid.offset(k) * dim, static_cast<std::size_t>(dim)};
    }
    std::span<double> at(long k) {
        return {values.data() + grid.offset(k) * dim, static_cast<std::size_t>(dim)};
    }
    double value(long k, int j) const { return values[grid.offset(k) * dim + j]; }
};

// The p lag values (X(t_{k-p}), ..., X(t_{k-1})) seen from reference index k,
// i.e. lag offsets u_i = -(p-i+1)*dt; oldest first, most recent last.
struct LagVector {
    long reference_index = 0;
    int dim = 0;
    int lags = 0;
    std::vector<double> entries;  // p x dim, lag-major
};

// Throws InsufficientHistory if k - p < -L.
LagVector project(const Path& path, int p, long k);

// Piecewise-linear interpolation of (time, value) samples onto the grid
// points of [-tau, 0]. Samples must be strictly increasing in time and
// bracket every such grid point, else GapTooLarge.
std::vector<double> linearize_initial(const std::vector<std::pair<double, double>>& samples,
                                      const TimeGrid& grid);

}  // namespace dsde
