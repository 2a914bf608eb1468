#pragma once

#include <cstdint>
#include <vector>

#include "dsde/sdde.hpp"

namespace dsde {

// Supervised rows (t_k, lag window x_{t_{k+1-p}}..x_{t_k}, target x_{t_{k+N}}).
// Windows are lag-major like LagVector (oldest first). ood_mask, when
// nonempty, labels rows for classifier evaluation.
struct WindowSet {
    int dim = 0;
    int lags = 0;      // p
    int horizon = 1;   // N
    double dt = 1.0;
    std::vector<double> times;
    std::vector<double> windows;  // rows x (p*dim)
    std::vector<double> targets;  // rows x dim
    std::vector<long> path_index;
    std::vector<long> k_index;
    std::vector<std::uint8_t> ood_mask;

    std::size_t rows() const { return times.size(); }
    std::span<const double> window(std::size_t r) const {
        return {windows.data() + r * static_cast<std::size_t>(lags) * dim,
                static_cast<std::size_t>(lags) * dim};
    }
    std::span<const double> target(std::size_t r) const {
        return {targets.data() + r * dim, static_cast<std::size_t>(dim)};
    }
    void append(double t, std::span<const double> window, std::span<const double> target,
                long path, long k);
};

// All admissible windows of the given paths, in deterministic (path, k)
// order. A window at k covers values up to x_{t_k} and targets x_{t_{k+N}};
// admissible means p history points and the target exist on the grid. k_min
// restricts windows to k >= k_min (e.g. k_min = p keeps lag windows out of
// the initial segment). Throws PathTooShort if a path admits no window.
inline constexpr long kNoKMin = -(1L << 60);
WindowSet build_windows(const PathSet& paths, int p, int N, long k_min = kNoKMin);
WindowSet build_windows(const PathSet& paths, int p, int N,
                        const std::vector<std::size_t>& path_ids, long k_min = kNoKMin);

// Contiguous split by path (never by window, so no path leaks across splits).
struct PathSplit {
    std::vector<std::size_t> train, validation, test;
};
PathSplit split_paths(std::size_t n, double train_frac, double validation_frac);

// Per-column affine normalization of net inputs, fitted on training data.
// Series coordinate j is centred/scaled by (mean[j], sd[j]); the time feature
// by (t_mean, t_sd). Degenerate columns keep sd = 1.
struct InputNormalization {
    std::vector<double> mean, sd;
    double t_mean = 0.0, t_sd = 1.0;

    static InputNormalization fit(const WindowSet& train);
    static InputNormalization identity(int dim);
};

// Normalized net input [t, coordinate-major window] (see assemble_input).
void assemble_normalized(double t, std::span<const double> window, int dim, int p,
                         const InputNormalization& norm, std::span<double> out);

// Column-major (dim_in x rows) input matrix for a whole window set.
std::vector<double> input_matrix(const WindowSet& set, const InputNormalization& norm);

}  // namespace dsde
