#include "dsde/ood.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>

#include "dsde/kernels.hpp"
#include "dsde/parallel.hpp"
#include "dsde/rng.hpp"

namespace dsde {
namespace {

// Standardization stats in net-input layout: one (mean, sd) per series
// coordinate shared across its lags, plus the time column. Sharing across
// lags keeps whole-window shifts difference-preserving in raw units.
struct ColumnStats {
    std::vector<double> mean, sd;  // 1 + d*p entries, slot-aligned
};

ColumnStats column_stats(const WindowSet& set) {
    const std::size_t dims = 1 + static_cast<std::size_t>(set.dim) * set.lags;
    ColumnStats st;
    st.mean.assign(dims, 0.0);
    st.sd.assign(dims, 1.0);
    const std::size_t rows = set.rows();
    if (rows == 0) return st;
    const InputNormalization norm = InputNormalization::fit(set);
    st.mean[0] = norm.t_mean;
    st.sd[0] = norm.t_sd;
    for (int l = 0; l < set.lags; ++l)
        for (int c = 0; c < set.dim; ++c) {
            const std::size_t slot = 1 + static_cast<std::size_t>(l) * set.dim + c;
            st.mean[slot] = norm.mean[c];
            st.sd[slot] = norm.sd[c];
        }
    return st;
}

// column-major standardized matrix of the training windows
std::vector<double> standardized_matrix(const WindowSet& set, const ColumnStats& st) {
    const std::size_t dims = st.mean.size();
    const std::size_t rows = set.rows();
    std::vector<double> cols(dims * rows);
    std::vector<double> in(dims);
    for (std::size_t r = 0; r < rows; ++r) {
        assemble_input(set.times[r], set.window(r), set.dim, set.lags, in);
        for (std::size_t c = 0; c < dims; ++c) cols[c * rows + r] = (in[c] - st.mean[c]) / st.sd[c];
    }
    return cols;
}

}  // namespace

double median_nn_distance(const WindowSet& train) {
    const std::size_t rows = train.rows();
    if (rows < 2) return 1.0;
    const ColumnStats st = column_stats(train);
    const auto cols = standardized_matrix(train, st);
    const std::size_t dims = st.mean.size();

    const std::size_t queries = std::min<std::size_t>(rows, 1024);
    const std::size_t stride = rows / queries;
    std::vector<double> dists(queries);
    parallel_for(queries, [&](std::size_t qi) {
        const std::size_t self = qi * stride;
        double best = HUGE_VAL;
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == self) continue;
            double acc = 0.0;
            for (std::size_t c = 0; c < dims; ++c) {
                const double diff = cols[c * rows + r] - cols[c * rows + self];
                acc += diff * diff;
            }
            best = std::min(best, acc);
        }
        dists[qi] = std::sqrt(best);
    });
    std::sort(dists.begin(), dists.end());
    return dists[queries / 2];
}

OodResult soft_brownian_offset(const WindowSet& train, const SboConfig& cfg, std::size_t n,
                               std::uint64_t seed) {
    if (train.rows() == 0) throw PathTooShort("soft Brownian offset needs training windows");
    if (cfg.max_iters < 1) throw ConfigError("max_iters must be >= 1");
    const int d = train.dim, p = train.lags;
    const std::size_t dims = 1 + static_cast<std::size_t>(d) * p;
    const std::size_t rows = train.rows();

    const ColumnStats st = column_stats(train);
    const auto cols = standardized_matrix(train, st);

    OodResult out;
    out.d_minus_used =
        cfg.d_minus > 0.0
            ? cfg.d_minus
            : 2.0 * std::sqrt(static_cast<double>(d) * p) * median_nn_distance(train);
    out.d_plus_used = cfg.d_plus > 0.0 ? cfg.d_plus : out.d_minus_used / 4.0;
    if (!(out.d_minus_used > 0.0)) throw ConfigError("d_minus must be positive");

    WindowSet& set = out.windows;
    set.dim = d;
    set.lags = p;
    set.horizon = train.horizon;
    set.dt = train.dt;

    const std::vector<double> zero_target(static_cast<std::size_t>(d), 0.0);
    std::vector<std::vector<double>> results(n);  // std-space inputs; empty = discarded
    std::vector<double> times(n);
    std::vector<long> sources(n);
    std::atomic<std::size_t> discarded{0};

    parallel_for(n, [&](std::size_t i) {
        Rng rng(seed, 600 + i);
        const std::size_t src = rng.below(rows);
        std::vector<double> q(dims);
        for (std::size_t c = 0; c < dims; ++c) q[c] = cols[c * rows + src];

        bool ok = false;
        for (int iter = 0; iter < cfg.max_iters; ++iter) {
            const double dist = std::sqrt(kernels::active().min_sqdist_cols(
                cols.data(), rows, dims, q.data()));
            if (dist >= out.d_minus_used) {
                ok = true;
                break;
            }
            if (cfg.mode == SboConfig::Mode::PerLagNoise) {
                for (std::size_t c = 1; c < dims; ++c)
                    q[c] += out.d_plus_used * (cfg.noise_mean + cfg.noise_std * rng.normal());
            } else {
                for (int coord = 0; coord < d; ++coord) {
                    const double e = cfg.noise_mean + cfg.noise_std * rng.normal();
                    for (int l = 0; l < p; ++l)
                        q[1 + static_cast<std::size_t>(l) * d + coord] += out.d_plus_used * e;
                }
            }
        }
        if (!ok) {
            discarded.fetch_add(1);
            return;
        }
        results[i] = std::move(q);
        times[i] = train.times[src];
        sources[i] = static_cast<long>(src);
    });

    std::vector<double> window(static_cast<std::size_t>(p) * d);
    for (std::size_t i = 0; i < n; ++i) {
        if (results[i].empty()) continue;
        const auto& q = results[i];
        // back to raw units; the untouched time column keeps its source value
        for (int l = 0; l < p; ++l)
            for (int coord = 0; coord < d; ++coord) {
                const std::size_t slot = 1 + static_cast<std::size_t>(l) * d + coord;
                window[static_cast<std::size_t>(l) * d + coord] =
                    q[slot] * st.sd[slot] + st.mean[slot];
            }
        set.append(times[i], window, zero_target, -1, sources[i]);
        set.ood_mask.push_back(1);
    }
    out.discarded = discarded.load();
    return out;
}

WindowSet gaussian_offset(const WindowSet& train, double sigma, std::size_t n,
                          std::uint64_t seed) {
    const int d = train.dim, p = train.lags;
    WindowSet set;
    set.dim = d;
    set.lags = p;
    set.horizon = train.horizon;
    set.dt = train.dt;
    if (n == 0) return set;
    if (train.rows() == 0) throw PathTooShort("gaussian offset needs training windows");

    const ColumnStats st = column_stats(train);
    const std::vector<double> zero_target(static_cast<std::size_t>(d), 0.0);
    std::vector<double> window(static_cast<std::size_t>(p) * d);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(seed, 600 + i);
        const std::size_t src = rng.below(train.rows());
        const auto base = train.window(src);
        std::copy(base.begin(), base.end(), window.begin());
        for (int l = 0; l < p; ++l)
            for (int coord = 0; coord < d; ++coord) {
                const std::size_t slot = 1 + static_cast<std::size_t>(l) * d + coord;
                window[static_cast<std::size_t>(l) * d + coord] +=
                    sigma * st.sd[slot] * rng.normal();
            }
        set.append(train.times[src], window, zero_target, -1, static_cast<long>(src));
        set.ood_mask.push_back(1);
    }
    return set;
}

void training_envelope(const PathSet& train, std::vector<double>& min_out,
                       std::vector<double>& max_out) {
    const int d = train.dim;
    min_out.assign(d, HUGE_VAL);
    max_out.assign(d, -HUGE_VAL);
    for (const Path& path : train.paths)
        for (long k = 1; k <= train.grid.step_count; ++k)
            for (int j = 0; j < d; ++j) {
                const double v = path.value(k, j);
                min_out[j] = std::min(min_out[j], v);
                max_out[j] = std::max(max_out[j], v);
            }
}

ContaminatedSet inject_ood_intervals(const PathSet& test, const PathSet& ood_source,
                                     const std::vector<OodInterval>& intervals) {
    if (ood_source.paths.size() < test.paths.size())
        throw ConfigError("need one OOD path per test path");
    ContaminatedSet out;
    out.paths = test;
    out.intervals = intervals;
    const std::size_t per_path = static_cast<std::size_t>(test.grid.total_points());
    out.point_mask.assign(test.paths.size() * per_path, 0);

    std::size_t replaced = 0;
    for (const OodInterval& iv : intervals) {
        if (iv.path >= test.paths.size())
            throw ConfigError("interval path index out of range");
        if (iv.k_start < 1 || iv.k_end > test.grid.step_count || iv.k_start > iv.k_end)
            throw ConfigError("interval outside the test range");
        Path& path = out.paths.paths[iv.path];
        const Path& source = ood_source.paths[iv.path];
        for (long k = iv.k_start; k <= iv.k_end; ++k) {
            auto dst = path.at(k);
            const auto src = source.at(k);
            std::copy(src.begin(), src.end(), dst.begin());
            auto& mask = out.point_mask[iv.path * per_path + test.grid.offset(k)];
            if (!mask) ++replaced;
            mask = 1;
        }
    }
    out.contamination = static_cast<double>(replaced) /
                        (static_cast<double>(test.paths.size()) * test.grid.step_count);
    return out;
}

std::vector<OodInterval> draw_guarded_intervals(const PathSet& ood_source,
                                                const std::vector<double>& train_min,
                                                const std::vector<double>& train_max,
                                                std::size_t n, long min_len, long max_len,
                                                std::uint64_t seed, int max_tries) {
    const long K = ood_source.grid.step_count;
    const int d = ood_source.dim;

    // maximal runs of points outside the training envelope (any coordinate)
    struct Run {
        std::size_t path;
        long start, end;
    };
    std::vector<Run> runs;
    for (std::size_t path = 0; path < ood_source.paths.size(); ++path) {
        long run_start = 0;
        for (long k = 1; k <= K + 1; ++k) {
            bool outside = false;
            if (k <= K)
                for (int j = 0; j < d && !outside; ++j) {
                    const double v = ood_source.paths[path].value(k, j);
                    outside = v < train_min[j] || v > train_max[j];
                }
            if (outside) {
                if (run_start == 0) run_start = k;
            } else if (run_start != 0) {
                if (k - run_start >= min_len) runs.push_back({path, run_start, k - 1});
                run_start = 0;
            }
        }
    }
    if (runs.empty())
        throw GuardUnsatisfiable(
            "the amplified paths never leave the training envelope for " +
            std::to_string(min_len) + " consecutive steps");

    Rng rng(seed, 700);
    std::vector<OodInterval> intervals;
    std::vector<std::vector<std::uint8_t>> used(ood_source.paths.size(),
                                                std::vector<std::uint8_t>(K + 1, 0));
    int failures = 0;
    while (intervals.size() < n && failures < max_tries) {
        const Run& run = runs[rng.below(runs.size())];
        const long span = run.end - run.start + 1;
        const long len = std::min(max_len, min_len + static_cast<long>(rng.below(
                                               static_cast<std::uint64_t>(span - min_len + 1))));
        const long start = run.start + static_cast<long>(rng.below(
                                           static_cast<std::uint64_t>(span - len + 1)));
        const long end = start + len - 1;
        bool free = true;
        for (long k = start; k <= end && free; ++k) free = !used[run.path][k];
        if (!free) {
            ++failures;
            continue;
        }
        for (long k = start; k <= end; ++k) used[run.path][k] = 1;
        intervals.push_back({run.path, start, end});
    }
    if (intervals.empty())
        throw GuardUnsatisfiable("no non-overlapping guarded interval found in " +
                                 std::to_string(max_tries) + " tries");
    return intervals;
}

WindowSet build_labeled_windows(const ContaminatedSet& set, int p, int N, long k_min) {
    WindowSet windows = build_windows(set.paths, p, N, k_min);
    const std::size_t per_path = static_cast<std::size_t>(set.paths.grid.total_points());
    windows.ood_mask.assign(windows.rows(), 0);
    // a window is OOD when any of its lag values was replaced; the label
    // matches what the (t, lag window) classifier can observe
    for (std::size_t r = 0; r < windows.rows(); ++r) {
        const std::size_t path = static_cast<std::size_t>(windows.path_index[r]);
        const long k = windows.k_index[r];
        for (long q = k - p + 1; q <= k; ++q) {
            if (set.point_mask[path * per_path + set.paths.grid.offset(q)]) {
                windows.ood_mask[r] = 1;
                break;
            }
        }
    }
    return windows;
}

}  // namespace dsde
