#include "dsde/windows.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace dsde {

void WindowSet::append(double t, std::span<const double> win, std::span<const double> tgt,
                       long path, long k) {
    times.push_back(t);
    windows.insert(windows.end(), win.begin(), win.end());
    targets.insert(targets.end(), tgt.begin(), tgt.end());
    path_index.push_back(path);
    k_index.push_back(k);
}

WindowSet build_windows(const PathSet& paths, int p, int N, long k_min) {
    std::vector<std::size_t> ids(paths.paths.size());
    std::iota(ids.begin(), ids.end(), 0);
    return build_windows(paths, p, N, ids, k_min);
}

WindowSet build_windows(const PathSet& paths, int p, int N,
                        const std::vector<std::size_t>& path_ids, long k_min) {
    if (p <= 0 || N <= 0) throw ConfigError("window builder needs p >= 1 and N >= 1");
    WindowSet set;
    set.dim = paths.dim;
    set.lags = p;
    set.horizon = N;
    set.dt = paths.grid.dt;
    const long L = paths.grid.lag_points;
    const long K = paths.grid.step_count;
    // window ends at k, needs k-p+1 >= -L; target at k+N <= K
    const long k_first = std::max(-L + p - 1, k_min == kNoKMin ? -L + p - 1 : k_min);
    const long k_last = K - N;
    if (k_last < k_first)
        throw PathTooShort("paths hold " + std::to_string(L + K + 1) + " points, need " +
                           std::to_string(p + N) + " for one window");
    for (std::size_t id : path_ids) {
        const Path& path = paths.paths.at(id);
        for (long k = k_first; k <= k_last; ++k) {
            const LagVector window = project(path, p, k + 1);
            set.append(paths.grid.time(k), window.entries, path.at(k + N),
                       static_cast<long>(id), k);
        }
    }
    return set;
}

PathSplit split_paths(std::size_t n, double train_frac, double validation_frac) {
    if (train_frac < 0 || validation_frac < 0 || train_frac + validation_frac > 1.0 + 1e-12)
        throw ConfigError("split fractions out of range");
    PathSplit split;
    const auto n_train = static_cast<std::size_t>(std::llround(train_frac * n));
    const auto n_val = static_cast<std::size_t>(std::llround(validation_frac * n));
    for (std::size_t i = 0; i < n; ++i) {
        if (i < n_train) split.train.push_back(i);
        else if (i < n_train + n_val) split.validation.push_back(i);
        else split.test.push_back(i);
    }
    return split;
}

InputNormalization InputNormalization::fit(const WindowSet& train) {
    InputNormalization norm;
    const int d = train.dim;
    norm.mean.assign(d, 0.0);
    norm.sd.assign(d, 1.0);
    const std::size_t rows = train.rows();
    if (rows == 0) return norm;

    std::vector<double> acc(d, 0.0), acc2(d, 0.0);
    std::size_t count = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        const auto win = train.window(r);
        for (int l = 0; l < train.lags; ++l)
            for (int j = 0; j < d; ++j) {
                const double v = win[static_cast<std::size_t>(l) * d + j];
                acc[j] += v;
                acc2[j] += v * v;
            }
        ++count;
    }
    const double n_vals = static_cast<double>(count) * train.lags;
    for (int j = 0; j < d; ++j) {
        norm.mean[j] = acc[j] / n_vals;
        const double var = acc2[j] / n_vals - norm.mean[j] * norm.mean[j];
        norm.sd[j] = var > 1e-24 ? std::sqrt(var) : 1.0;
    }

    double t_acc = 0.0, t_acc2 = 0.0;
    for (double t : train.times) {
        t_acc += t;
        t_acc2 += t * t;
    }
    norm.t_mean = t_acc / static_cast<double>(rows);
    const double t_var = t_acc2 / static_cast<double>(rows) - norm.t_mean * norm.t_mean;
    norm.t_sd = t_var > 1e-24 ? std::sqrt(t_var) : 1.0;
    return norm;
}

InputNormalization InputNormalization::identity(int dim) {
    InputNormalization norm;
    norm.mean.assign(dim, 0.0);
    norm.sd.assign(dim, 1.0);
    return norm;
}

void assemble_normalized(double t, std::span<const double> window, int dim, int p,
                         const InputNormalization& norm, std::span<double> out) {
    out[0] = (t - norm.t_mean) / norm.t_sd;
    for (int l = 0; l < p; ++l)
        for (int c = 0; c < dim; ++c)
            out[1 + static_cast<std::size_t>(l) * dim + c] =
                (window[static_cast<std::size_t>(l) * dim + c] - norm.mean[c]) / norm.sd[c];
}

std::vector<double> input_matrix(const WindowSet& set, const InputNormalization& norm) {
    const std::size_t rows = set.rows();
    const int d = set.dim, p = set.lags;
    const std::size_t dim_in = 1 + static_cast<std::size_t>(d) * p;
    std::vector<double> cols(dim_in * rows);
    std::vector<double> input(dim_in);
    for (std::size_t r = 0; r < rows; ++r) {
        assemble_normalized(set.times[r], set.window(r), d, p, norm, input);
        for (std::size_t j = 0; j < dim_in; ++j) cols[j * rows + r] = input[j];
    }
    return cols;
}

}  // namespace dsde
