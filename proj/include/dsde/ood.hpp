#pragma once

#include <cstdint>
#include <vector>

#include "dsde/windows.hpp"

namespace dsde {

// Soft Brownian offset: start from a training window and keep adding
// d_plus-scaled Gaussian noise until the nearest training window is at least
// d_minus away. Distances are Euclidean over standardized columns (time
// included), and offsets are applied in the same standardized space so d_plus
// and d_minus share units.
struct SboConfig {
    double d_minus = 0.0;  // 0 = default 2 sqrt(d*p) * median nn-distance
    double d_plus = 0.0;   // 0 = default d_minus / 4
    double noise_mean = 0.0;
    double noise_std = 1.0;
    enum class Mode { PerLagNoise, WholeWindowShift } mode = Mode::PerLagNoise;
    int max_iters = 1000;
};

struct OodResult {
    WindowSet windows;       // targets zeroed; is_ood labels all true
    std::size_t discarded = 0;  // points that hit max_iters and were dropped
    double d_minus_used = 0.0;
    double d_plus_used = 0.0;
};

OodResult soft_brownian_offset(const WindowSet& train, const SboConfig& cfg, std::size_t n,
                               std::uint64_t seed);

// One-shot Gaussian offset baseline; no distance guarantee.
WindowSet gaussian_offset(const WindowSet& train, double sigma, std::size_t n,
                          std::uint64_t seed);

// Median nearest-neighbour distance of the training windows in the
// standardized metric (subsampled above a size cap).
double median_nn_distance(const WindowSet& train);

// --------------------------------------------------- test-set contamination
struct OodInterval {
    std::size_t path = 0;  // index into the test path set
    long k_start = 0;      // inclusive grid step
    long k_end = 0;        // inclusive
};

struct ContaminatedSet {
    PathSet paths;                          // test paths with replaced stretches
    std::vector<std::uint8_t> point_mask;   // per path x grid point, replaced?
    double contamination = 0.0;             // replaced fraction of forward points
    std::vector<OodInterval> intervals;
};

// Replaces the given day intervals of the test paths with the matching days
// of the OOD paths. The mask marks replaced points; window labels derive from
// it (a window is OOD when any of its lags or its target was replaced).
ContaminatedSet inject_ood_intervals(const PathSet& test, const PathSet& ood_source,
                                     const std::vector<OodInterval>& intervals);

// Draws n intervals with lengths in [min_len, max_len] uniformly over the
// test paths, accepting only intervals whose replacement values all fall
// outside the per-coordinate min-max envelope of the training data in at
// least one coordinate. Throws GuardUnsatisfiable after max_tries rejections
// per interval.
std::vector<OodInterval> draw_guarded_intervals(const PathSet& ood_source,
                                                const std::vector<double>& train_min,
                                                const std::vector<double>& train_max,
                                                std::size_t n, long min_len, long max_len,
                                                std::uint64_t seed, int max_tries = 500);

// Windows over contaminated paths, labeled via the point mask.
WindowSet build_labeled_windows(const ContaminatedSet& set, int p, int N,
                                long k_min = kNoKMin);

// Per-coordinate envelope of the training paths' forward values.
void training_envelope(const PathSet& train, std::vector<double>& min_out,
                       std::vector<double>& max_out);

}  // namespace dsde
