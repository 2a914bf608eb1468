#include "dsde/model.hpp"

#include <cmath>
#include <cstring>
#include <mutex>
#include <numeric>

#include "dsde/kernels.hpp"
#include "dsde/parallel.hpp"
#include "net_json.hpp"

namespace dsde {
namespace {

constexpr std::size_t kChunkRows = 2048;

inline double logistic(double y) { return 1.0 / (1.0 + std::exp(-y)); }

std::vector<std::size_t> iteration_rows(std::size_t total, long minibatch, Rng& sampler) {
    std::vector<std::size_t> rows;
    if (minibatch <= 0 || static_cast<std::size_t>(minibatch) >= total) {
        rows.resize(total);
        std::iota(rows.begin(), rows.end(), 0);
    } else {
        rows.resize(static_cast<std::size_t>(minibatch));
        for (auto& r : rows) r = sampler.below(total);
    }
    return rows;
}

// Combines per-chunk partial gradients in chunk order; the chunk layout is
// fixed, so results do not depend on the worker count.
struct ChunkAccumulator {
    std::vector<std::vector<NetGrad>> grads;  // per chunk, per net
    std::vector<double> loss;                 // per chunk

    void init(std::size_t chunks, const std::vector<TwoLayerNet>& nets) {
        grads.assign(chunks, {});
        loss.assign(chunks, 0.0);
        for (auto& g : grads) {
            g.resize(nets.size());
            for (std::size_t j = 0; j < nets.size(); ++j) g[j].resize_like(nets[j]);
        }
    }
    void reduce(std::vector<NetGrad>& total, double& loss_sum) {
        for (std::size_t c = 0; c < grads.size(); ++c) {
            for (std::size_t j = 0; j < total.size(); ++j) total[j].add(grads[c][j]);
            loss_sum += loss[c];
        }
    }
};

}  // namespace

double DelaySdeNet::drift_value(int j, double t, std::span<const double> window) const {
    std::vector<double> in(input_dim());
    assemble_normalized(t, window, dim, lags, norm, in);
    return drift[j].forward(in);
}

void DelaySdeNet::aleatoric_sq(double t, std::span<const double> window,
                               std::span<double> out) const {
    std::vector<double> in(input_dim());
    assemble_normalized(t, window, dim, lags, norm, in);
    for (int j = 0; j < dim; ++j) {
        const double g = aleatoric[j].forward(in);
        out[j] = g * g;
    }
}

double DelaySdeNet::epistemic_prob(double t, std::span<const double> window) const {
    std::vector<double> in(input_dim());
    assemble_normalized(t, window, dim, lags, norm, in);
    return logistic(epistemic.forward(in));
}

DelaySdeNet init_model(const WindowSet& train, int N, const ModelConfig& cfg,
                       std::uint64_t seed) {
    DelaySdeNet model;
    model.dim = train.dim;
    model.lags = train.lags;
    model.dt = train.dt;
    model.horizon = N;
    model.norm = InputNormalization::fit(train);
    const int in_dim = model.input_dim();
    for (int j = 0; j < model.dim; ++j) {
        Rng rng(seed, 100 + static_cast<std::uint64_t>(j));
        model.drift.push_back(make_net(cfg.width, in_dim, cfg.drift_act, cfg.output_bias, rng));
    }
    for (int j = 0; j < model.dim; ++j) {
        Rng rng(seed, 200 + static_cast<std::uint64_t>(j));
        model.aleatoric.push_back(
            make_net(cfg.width, in_dim, cfg.aleatoric_act, cfg.output_bias, rng));
    }
    Rng rng(seed, 300);
    model.epistemic = make_net(cfg.width, in_dim, cfg.epistemic_act, cfg.output_bias, rng);
    model.sigma_e = 0.0;
    return model;
}

// ------------------------------------------------------------------ rollout
namespace {

// N-step drift rollout over a chunk of rows. Forward always; when grads is
// non-null, runs the adjoint sweep through every step, including prediction
// values re-entering later lag windows.
void drift_rollout_chunk(const DelaySdeNet& model, const WindowSet& data,
                         const std::vector<std::size_t>& rows, std::size_t begin,
                         std::size_t end, double inv_rows, std::vector<NetGrad>* grads,
                         double* sq_loss_sum, double* predictions) {
    const std::size_t R = end - begin;
    if (R == 0) return;
    const int d = model.dim, p = model.lags, N = model.horizon;
    const std::size_t in_dim = static_cast<std::size_t>(model.input_dim());
    const double dt = model.dt;

    std::vector<double> ring(R * static_cast<std::size_t>(p) * d);  // raw lag windows
    std::vector<double> inputs(static_cast<std::size_t>(N) * in_dim * R);  // per step, col-major
    std::vector<double> xhat(static_cast<std::size_t>(N + 1) * R * d, 0.0);
    std::vector<double> in_row(in_dim);

    for (std::size_t r = 0; r < R; ++r) {
        const std::size_t row = rows[begin + r];
        const auto win = data.window(row);
        std::copy(win.begin(), win.end(), ring.begin() + r * static_cast<std::size_t>(p) * d);
        for (int j = 0; j < d; ++j)
            xhat[r * d + j] = win[static_cast<std::size_t>(p - 1) * d + j];  // x_{t_k}
    }

    std::vector<double> y(R), s(static_cast<std::size_t>(model.drift[0].width) * R);
    for (int i = 0; i < N; ++i) {
        double* X = inputs.data() + static_cast<std::size_t>(i) * in_dim * R;
        for (std::size_t r = 0; r < R; ++r) {
            const std::size_t row = rows[begin + r];
            const double t = data.times[row] + i * dt;
            assemble_normalized(
                t, {ring.data() + r * static_cast<std::size_t>(p) * d, static_cast<std::size_t>(p) * d},
                d, p, model.norm, in_row);
            for (std::size_t c = 0; c < in_dim; ++c) X[c * R + r] = in_row[c];
        }
        const double* prev = xhat.data() + static_cast<std::size_t>(i) * R * d;
        double* next = xhat.data() + static_cast<std::size_t>(i + 1) * R * d;
        for (int j = 0; j < d; ++j) {
            forward_batch(model.drift[j], X, R, y.data(), s.data());
            for (std::size_t r = 0; r < R; ++r) next[r * d + j] = prev[r * d + j] + y[r] * dt;
        }
        // shift the lag ring and append the new predictions
        for (std::size_t r = 0; r < R; ++r) {
            double* win = ring.data() + r * static_cast<std::size_t>(p) * d;
            std::memmove(win, win + d, sizeof(double) * static_cast<std::size_t>(p - 1) * d);
            for (int j = 0; j < d; ++j) win[static_cast<std::size_t>(p - 1) * d + j] = next[r * d + j];
        }
    }

    const double* final_pred = xhat.data() + static_cast<std::size_t>(N) * R * d;
    if (predictions) {
        for (std::size_t r = 0; r < R; ++r)
            for (int j = 0; j < d; ++j)
                predictions[rows[begin + r] * d + j] = final_pred[r * d + j];
    }
    if (sq_loss_sum) {
        double acc = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
            const auto tgt = data.target(rows[begin + r]);
            for (int j = 0; j < d; ++j) {
                const double res = final_pred[r * d + j] - tgt[j];
                acc += res * res;
            }
        }
        *sq_loss_sum += acc;
    }
    if (!grads) return;

    // adjoint sweep
    std::vector<double> lambda(static_cast<std::size_t>(N + 1) * R * d, 0.0);
    for (std::size_t r = 0; r < R; ++r) {
        const auto tgt = data.target(rows[begin + r]);
        for (int j = 0; j < d; ++j)
            lambda[(static_cast<std::size_t>(N) * R + r) * d + j] =
                2.0 * (final_pred[r * d + j] - tgt[j]) * inv_rows;
    }
    std::vector<double> delta(R), xadj(in_dim * R);
    for (int i = N; i >= 1; --i) {
        const double* X = inputs.data() + static_cast<std::size_t>(i - 1) * in_dim * R;
        const double* lam_i = lambda.data() + static_cast<std::size_t>(i) * R * d;
        std::fill(xadj.begin(), xadj.end(), 0.0);
        for (int j = 0; j < d; ++j) {
            forward_batch(model.drift[j], X, R, y.data(), s.data());
            for (std::size_t r = 0; r < R; ++r) delta[r] = lam_i[r * d + j] * dt;
            backward_batch(model.drift[j], X, R, s.data(), delta.data(), (*grads)[j],
                           xadj.data());
        }
        // window entry (lag l, coord c) of step i-1 holds prediction m = i - p + l
        for (int l = 0; l < p; ++l) {
            const int m = i - p + l;
            if (m < 1) continue;
            double* lam_m = lambda.data() + static_cast<std::size_t>(m) * R * d;
            for (int c = 0; c < d; ++c) {
                const double inv_sd = 1.0 / model.norm.sd[c];
                const double* col =
                    xadj.data() + (1 + static_cast<std::size_t>(l) * d + c) * R;
                for (std::size_t r = 0; r < R; ++r) lam_m[r * d + c] += col[r] * inv_sd;
            }
        }
        if (i - 1 >= 1) {
            double* lam_prev = lambda.data() + static_cast<std::size_t>(i - 1) * R * d;
            for (std::size_t r = 0; r < R * static_cast<std::size_t>(d); ++r)
                lam_prev[r] += lam_i[r];
        }
    }
}

double drift_pass(const DelaySdeNet& model, const WindowSet& data,
                  const std::vector<std::size_t>& rows, std::vector<NetGrad>* total_grads,
                  double* predictions) {
    const std::size_t n = rows.size();
    const double inv_rows = n ? 1.0 / static_cast<double>(n) : 0.0;
    const std::size_t chunks = (n + kChunkRows - 1) / kChunkRows;
    ChunkAccumulator acc;
    if (total_grads) acc.init(chunks, model.drift);
    else acc.loss.assign(chunks, 0.0);
    parallel_blocks(n, kChunkRows, [&](std::size_t chunk, std::size_t b, std::size_t e) {
        drift_rollout_chunk(model, data, rows, b, e, inv_rows,
                            total_grads ? &acc.grads[chunk] : nullptr, &acc.loss[chunk],
                            predictions);
    });
    double sq_sum = 0.0;
    if (total_grads) acc.reduce(*total_grads, sq_sum);
    else for (double l : acc.loss) sq_sum += l;
    return sq_sum * inv_rows;
}

}  // namespace

void train_drift(DelaySdeNet& model, const WindowSet& train, const SgdConfig& cfg,
                 std::uint64_t seed, TrainLog* log, const WindowSet* validation,
                 long check_every) {
    if (train.rows() == 0) throw PathTooShort("drift training needs at least one window");
    model.horizon = train.horizon;
    Rng sampler(seed, 400);
    std::vector<SgdState> states(model.drift.size());
    std::vector<NetGrad> grads(model.drift.size());
    for (std::size_t j = 0; j < grads.size(); ++j) grads[j].resize_like(model.drift[j]);

    const bool track = validation && validation->rows() > 0 && check_every > 0;
    std::vector<std::size_t> val_rows;
    if (track) {
        val_rows.resize(validation->rows());
        std::iota(val_rows.begin(), val_rows.end(), 0);
    }
    auto val_loss = [&] { return drift_pass(model, *validation, val_rows, nullptr, nullptr); };
    std::vector<TwoLayerNet> best = model.drift;
    double best_loss = track ? val_loss() : 0.0;

    for (long it = 0; it < cfg.iterations; ++it) {
        const auto rows = iteration_rows(train.rows(), cfg.minibatch, sampler);
        for (auto& g : grads) g.clear();
        const double loss = drift_pass(model, train, rows, &grads, nullptr);
        if (!std::isfinite(loss))
            throw Divergence("drift loss became non-finite at iteration " + std::to_string(it));
        if (log) log->push_back(loss);
        for (std::size_t j = 0; j < model.drift.size(); ++j)
            sgd_step(model.drift[j], grads[j], cfg, states[j]);
        if (track && ((it + 1) % check_every == 0 || it + 1 == cfg.iterations)) {
            const double v = val_loss();
            if (v < best_loss) {
                best_loss = v;
                best = model.drift;
            }
        }
    }
    if (track) model.drift = std::move(best);
}

std::vector<double> residuals(const DelaySdeNet& model, const WindowSet& windows) {
    std::vector<std::size_t> rows(windows.rows());
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<double> pred(windows.rows() * static_cast<std::size_t>(model.dim));
    drift_pass(model, windows, rows, nullptr, pred.data());
    std::vector<double> e(pred.size());
    for (std::size_t r = 0; r < windows.rows(); ++r) {
        const auto tgt = windows.target(r);
        for (int j = 0; j < model.dim; ++j)
            e[r * model.dim + j] = pred[r * model.dim + j] - tgt[j];
    }
    return e;
}

// ------------------------------------------------------------- aleatoric fit
namespace {

// forward of net j at time offset i*dt for a chunk; X time column rewritten
void aleatoric_chunk(const DelaySdeNet& model, const WindowSet& data,
                     const std::vector<std::size_t>& rows, std::size_t begin, std::size_t end,
                     const std::vector<double>& e_sq, double inv_rows,
                     std::vector<NetGrad>* grads, double* sq_loss_sum) {
    const std::size_t R = end - begin;
    if (R == 0) return;
    const int d = model.dim, p = model.lags, N = model.horizon;
    const std::size_t in_dim = static_cast<std::size_t>(model.input_dim());
    const double dt = model.dt;

    std::vector<double> X(in_dim * R);
    std::vector<double> in_row(in_dim);
    for (std::size_t r = 0; r < R; ++r) {
        const std::size_t row = rows[begin + r];
        assemble_normalized(data.times[row], data.window(row), d, p, model.norm, in_row);
        for (std::size_t c = 0; c < in_dim; ++c) X[c * R + r] = in_row[c];
    }

    std::vector<double> g(static_cast<std::size_t>(N) * d * R);
    std::vector<double> s(static_cast<std::size_t>(model.aleatoric[0].width) * R);
    std::vector<double> V(R * d, 0.0);
    for (int i = 0; i < N; ++i) {
        for (std::size_t r = 0; r < R; ++r) {
            const std::size_t row = rows[begin + r];
            X[r] = (data.times[row] + i * dt - model.norm.t_mean) / model.norm.t_sd;
        }
        for (int j = 0; j < d; ++j) {
            double* gij = g.data() + (static_cast<std::size_t>(i) * d + j) * R;
            forward_batch(model.aleatoric[j], X.data(), R, gij, s.data());
            for (std::size_t r = 0; r < R; ++r) V[r * d + j] += gij[r] * gij[r];
        }
    }

    std::vector<double> common(R * d);
    double acc = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
        const std::size_t row = rows[begin + r];
        for (int j = 0; j < d; ++j) {
            const double res = V[r * d + j] * dt - e_sq[row * d + j];
            acc += res * res;
            common[r * d + j] = 2.0 * res * dt * inv_rows;
        }
    }
    if (sq_loss_sum) *sq_loss_sum += acc;
    if (!grads) return;

    std::vector<double> delta(R);
    for (int i = 0; i < N; ++i) {
        for (std::size_t r = 0; r < R; ++r) {
            const std::size_t row = rows[begin + r];
            X[r] = (data.times[row] + i * dt - model.norm.t_mean) / model.norm.t_sd;
        }
        for (int j = 0; j < d; ++j) {
            const double* gij = g.data() + (static_cast<std::size_t>(i) * d + j) * R;
            forward_batch(model.aleatoric[j], X.data(), R, delta.data(), s.data());  // rebuild s
            for (std::size_t r = 0; r < R; ++r) delta[r] = common[r * d + j] * 2.0 * gij[r];
            backward_batch(model.aleatoric[j], X.data(), R, s.data(), delta.data(), (*grads)[j],
                           nullptr);
        }
    }
}

}  // namespace

void train_aleatoric(DelaySdeNet& model, const WindowSet& train,
                     const std::vector<double>& resid, const SgdConfig& cfg,
                     std::uint64_t seed, TrainLog* log, const WindowSet* validation,
                     const std::vector<double>* val_resid, long check_every) {
    if (resid.size() != train.rows() * static_cast<std::size_t>(model.dim))
        throw DimensionMismatch("residual count does not match window count");
    std::vector<double> e_sq(resid.size());
    for (std::size_t i = 0; i < resid.size(); ++i) e_sq[i] = resid[i] * resid[i];

    const bool track = validation && val_resid && validation->rows() > 0 && check_every > 0;
    std::vector<double> val_e_sq;
    std::vector<std::size_t> val_rows;
    if (track) {
        val_e_sq.resize(val_resid->size());
        for (std::size_t i = 0; i < val_e_sq.size(); ++i)
            val_e_sq[i] = (*val_resid)[i] * (*val_resid)[i];
        val_rows.resize(validation->rows());
        std::iota(val_rows.begin(), val_rows.end(), 0);
    }
    auto val_loss = [&] {
        double sq = 0.0;
        aleatoric_chunk(model, *validation, val_rows, 0, val_rows.size(), val_e_sq,
                        1.0 / static_cast<double>(val_rows.size()), nullptr, &sq);
        return sq / static_cast<double>(val_rows.size());
    };
    std::vector<TwoLayerNet> best = model.aleatoric;
    double best_loss = track ? val_loss() : 0.0;

    Rng sampler(seed, 401);
    std::vector<SgdState> states(model.aleatoric.size());
    std::vector<NetGrad> grads(model.aleatoric.size());
    for (std::size_t j = 0; j < grads.size(); ++j) grads[j].resize_like(model.aleatoric[j]);
    for (long it = 0; it < cfg.iterations; ++it) {
        const auto rows = iteration_rows(train.rows(), cfg.minibatch, sampler);
        const double inv_rows = 1.0 / static_cast<double>(rows.size());
        for (auto& g : grads) g.clear();
        const std::size_t chunks = (rows.size() + kChunkRows - 1) / kChunkRows;
        ChunkAccumulator acc;
        acc.init(chunks, model.aleatoric);
        parallel_blocks(rows.size(), kChunkRows,
                        [&](std::size_t chunk, std::size_t b, std::size_t e) {
                            aleatoric_chunk(model, train, rows, b, e, e_sq, inv_rows,
                                            &acc.grads[chunk], &acc.loss[chunk]);
                        });
        double sq_sum = 0.0;
        acc.reduce(grads, sq_sum);
        const double loss = sq_sum * inv_rows;
        if (!std::isfinite(loss))
            throw Divergence("aleatoric loss became non-finite at iteration " +
                             std::to_string(it));
        if (log) log->push_back(loss);
        for (std::size_t j = 0; j < model.aleatoric.size(); ++j)
            sgd_step(model.aleatoric[j], grads[j], cfg, states[j]);
        if (track && ((it + 1) % check_every == 0 || it + 1 == cfg.iterations)) {
            const double v = val_loss();
            if (v < best_loss) {
                best_loss = v;
                best = model.aleatoric;
            }
        }
    }
    if (track) model.aleatoric = std::move(best);
}

// ------------------------------------------------------------- epistemic fit
namespace {

double epistemic_side(const DelaySdeNet& model, const WindowSet& data, double sign,
                      NetGrad* grad) {
    const std::size_t n = data.rows();
    const std::size_t in_dim = static_cast<std::size_t>(model.input_dim());
    const std::size_t chunks = (n + kChunkRows - 1) / kChunkRows;
    std::vector<NetGrad> partial(grad ? chunks : 0);
    std::vector<double> loss(chunks, 0.0);
    for (auto& g : partial) g.resize_like(model.epistemic);
    const double inv = sign / static_cast<double>(n);
    parallel_blocks(n, kChunkRows, [&](std::size_t chunk, std::size_t b, std::size_t e) {
        const std::size_t R = e - b;
        std::vector<double> X(in_dim * R), in_row(in_dim);
        for (std::size_t r = 0; r < R; ++r) {
            assemble_normalized(data.times[b + r], data.window(b + r), model.dim, model.lags,
                                model.norm, in_row);
            for (std::size_t c = 0; c < in_dim; ++c) X[c * R + r] = in_row[c];
        }
        std::vector<double> y(R), s(static_cast<std::size_t>(model.epistemic.width) * R);
        forward_batch(model.epistemic, X.data(), R, y.data(), s.data());
        std::vector<double> delta(R);
        double acc = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
            const double prob = logistic(y[r]);
            acc += prob;
            delta[r] = inv * prob * (1.0 - prob);
        }
        loss[chunk] = acc;
        if (grad)
            backward_batch(model.epistemic, X.data(), R, s.data(), delta.data(), partial[chunk],
                           nullptr);
    });
    double total = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
        total += loss[c];
        if (grad) grad->add(partial[c]);
    }
    return sign * total / static_cast<double>(n);
}

}  // namespace

void train_epistemic(DelaySdeNet& model, const WindowSet& id_windows,
                     const WindowSet& ood_windows, const SgdConfig& cfg, std::uint64_t seed,
                     TrainLog* log) {
    if (id_windows.rows() == 0 || ood_windows.rows() == 0)
        throw PathTooShort("classifier training needs nonempty ID and OOD sets");
    (void)seed;  // full-batch; kept for interface symmetry
    SgdState state;
    NetGrad grad;
    grad.resize_like(model.epistemic);
    for (long it = 0; it < cfg.iterations; ++it) {
        grad.clear();
        const double id_term = epistemic_side(model, id_windows, 1.0, &grad);
        const double ood_term = epistemic_side(model, ood_windows, -1.0, &grad);
        const double loss = id_term + ood_term;
        if (!std::isfinite(loss))
            throw Divergence("classifier loss became non-finite at iteration " +
                             std::to_string(it));
        if (log) log->push_back(loss);
        sgd_step(model.epistemic, grad, cfg, state);
    }
}

// ------------------------------------------------------------ sigma_e tuning
double tune_sigma_e(DelaySdeNet& model, const WindowSet& validation) {
    const std::size_t n = validation.rows();
    const int d = model.dim;
    if (n == 0) {
        model.sigma_e = 0.0;
        return 0.0;
    }
    const std::vector<double> e = residuals(model, validation);
    std::vector<double> prob(n), astd(n * d);
    std::vector<double> vsq(d);
    double max_abs_e = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        prob[r] = model.epistemic_prob(validation.times[r], validation.window(r));
        std::fill(vsq.begin(), vsq.end(), 0.0);
        std::vector<double> step(d);
        for (int i = 0; i < model.horizon; ++i) {
            model.aleatoric_sq(validation.times[r] + i * model.dt, validation.window(r), step);
            for (int j = 0; j < d; ++j) vsq[j] += step[j];
        }
        for (int j = 0; j < d; ++j) {
            astd[r * d + j] = std::sqrt(vsq[j] * model.dt);
            max_abs_e = std::max(max_abs_e, std::abs(e[r * d + j]));
        }
    }
    auto objective = [&](double sigma) {
        double acc = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            for (int j = 0; j < d; ++j) {
                const double total = sigma * prob[r] + astd[r * d + j];
                const double res = total * total - e[r * d + j] * e[r * d + j];
                acc += res * res;
            }
        return acc / static_cast<double>(n);
    };

    const double hi = 3.0 * max_abs_e;
    if (hi == 0.0) {
        model.sigma_e = 0.0;
        return 0.0;
    }
    const int grid_n = 96;
    double best_x = 0.0, best_f = objective(0.0);
    for (int i = 1; i <= grid_n; ++i) {
        const double x = hi * static_cast<double>(i) / grid_n;
        const double f = objective(x);
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }
    }
    double lo = std::max(0.0, best_x - hi / grid_n);
    double up = std::min(hi, best_x + hi / grid_n);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = up - phi * (up - lo), x2 = lo + phi * (up - lo);
    double f1 = objective(x1), f2 = objective(x2);
    while (up - lo > 1e-4 * std::max(1.0, best_x)) {
        if (f1 < f2) {
            up = x2;
            x2 = x1;
            f2 = f1;
            x1 = up - phi * (up - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (up - lo);
            f2 = objective(x2);
        }
    }
    double result = 0.5 * (lo + up);
    // a flat objective (dead classifier, perfect aleatoric fit) resolves to 0
    const double f0 = objective(0.0);
    if (f0 <= objective(result) + 1e-12 * (1.0 + std::abs(f0))) result = 0.0;
    model.sigma_e = result;
    return result;
}

// ------------------------------------------------------------------- predict
double normal_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile level must be in (0,1)");
    double z = 0.0;
    const double lo = std::min(q, 1.0 - q);
    if (lo < 0.5) z = std::sqrt(-2.0 * std::log(lo));
    if (q < 0.5) z = -z;
    for (int it = 0; it < 100; ++it) {
        const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
        const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
        const double step = (cdf - q) / std::max(pdf, 1e-300);
        z -= step;
        if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(z))) break;
    }
    return z;
}

PredictionBundle predict(const DelaySdeNet& model, double t_k, std::span<const double> history,
                         int N, double ci_level) {
    const int d = model.dim, p = model.lags;
    if (history.size() % d != 0 || static_cast<int>(history.size() / d) < p)
        throw InsufficientHistory("prediction needs at least " + std::to_string(p) +
                                  " history points");
    PredictionBundle out;
    out.dim = d;
    out.steps = N;
    out.ci_level = ci_level;

    std::vector<double> window(history.end() - static_cast<std::size_t>(p) * d, history.end());
    const std::vector<double> frozen = window;

    out.epistemic_prob = model.epistemic_prob(t_k, frozen);
    out.epistemic_std = model.sigma_e * out.epistemic_prob;

    std::vector<double> current(window.end() - d, window.end());
    std::vector<double> vsq(d, 0.0), step_sq(d);
    const double z = normal_quantile(0.5 + 0.5 * ci_level);
    for (int i = 0; i < N; ++i) {
        const double t = t_k + i * model.dt;
        for (int j = 0; j < d; ++j) current[j] += model.drift_value(j, t, window) * model.dt;
        // shift window, append the new mean
        std::memmove(window.data(), window.data() + d,
                     sizeof(double) * static_cast<std::size_t>(p - 1) * d);
        std::copy(current.begin(), current.end(),
                  window.begin() + static_cast<std::size_t>(p - 1) * d);

        model.aleatoric_sq(t, frozen, step_sq);
        for (int j = 0; j < d; ++j) vsq[j] += step_sq[j];

        for (int j = 0; j < d; ++j) {
            const double mean = current[j];
            const double avar = vsq[j] * model.dt;
            const double tstd = std::sqrt(avar) + out.epistemic_std;
            out.mean.push_back(mean);
            out.aleatoric_var.push_back(avar);
            out.total_std.push_back(tstd);
            out.ci_lo.push_back(mean - z * tstd);
            out.ci_hi.push_back(mean + z * tstd);
        }
    }
    return out;
}

// --------------------------------------------------------------- error bound
BoundResult theoretical_bound(const BoundConstants& c, double dt) {
    BoundResult r;
    const double inner =
        c.C_ge + 2.0 * c.C_B * c.eps_F + (3.0 * c.C_sigma / c.m) * (2.0 * c.C_g + c.T * c.C_f);
    r.c_m = std::sqrt(4.0 * c.T * inner * std::exp(2.0 * c.p * c.C_L * (4.0 + 2.0 * c.T) * c.T));
    r.total = std::sqrt(c.C_T) * std::pow(dt, c.gamma) + r.c_m;
    return r;
}

BoundConstants estimate_bound_constants(const SddeSpec& truth, const DelaySdeNet& model,
                                        const WindowSet& data, std::uint64_t seed,
                                        std::size_t samples) {
    BoundConstants c;
    c.p = model.lags;
    c.m = model.drift[0].width;
    for (const auto& net : model.drift) c.m = std::min(c.m, static_cast<double>(net.width));
    for (const auto& net : model.aleatoric) c.m = std::min(c.m, static_cast<double>(net.width));
    c.T = 0.0;
    for (double t : data.times) c.T = std::max(c.T, t);
    c.T += model.horizon * model.dt;

    for (const auto& net : truth.drift) c.C_f = std::max(c.C_f, path_norm(net));
    for (const auto& net : truth.diffusion) c.C_g = std::max(c.C_g, path_norm(net));
    c.C_f *= c.C_f;
    c.C_g *= c.C_g;
    c.C_ge = model.sigma_e * model.sigma_e;
    c.eps_F = 0.0;

    c.C_sigma = 0.0;
    for (const Activation& act :
         {model.drift[0].act, model.aleatoric[0].act, model.epistemic.act})
        c.C_sigma = std::max(c.C_sigma, activation_constant(act).c_sigma);

    // bounding box of the observed inputs
    const int d = model.dim, p = model.lags;
    const std::size_t w_len = static_cast<std::size_t>(p) * d;
    std::vector<double> lo(w_len, HUGE_VAL), hi(w_len, -HUGE_VAL);
    double t_lo = HUGE_VAL, t_hi = -HUGE_VAL;
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const auto win = data.window(r);
        for (std::size_t i = 0; i < w_len; ++i) {
            lo[i] = std::min(lo[i], win[i]);
            hi[i] = std::max(hi[i], win[i]);
        }
        t_lo = std::min(t_lo, data.times[r]);
        t_hi = std::max(t_hi, data.times[r]);
    }

    Rng rng(seed, 500);
    std::vector<double> wx(w_len), wy(w_len), in_x(1 + w_len), in_y(1 + w_len);
    std::vector<double> gx(d), gmx(d);
    auto draw = [&](std::vector<double>& w, double& t) {
        for (std::size_t i = 0; i < w_len; ++i) w[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform();
        t = t_lo + (t_hi - t_lo) * rng.uniform();
    };
    for (std::size_t it = 0; it < samples; ++it) {
        double tx, ty;
        draw(wx, tx);
        draw(wy, ty);
        assemble_input(tx, wx, d, p, in_x);
        assemble_input(ty, wy, d, p, in_y);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < in_x.size(); ++i) {
            const double diff = in_x[i] - in_y[i];
            den += diff * diff;
        }
        for (int j = 0; j < d; ++j) {
            const double df = truth.drift_value(j, in_x) - truth.drift_value(j, in_y);
            const double dg = truth.diffusion_value(j, in_x) - truth.diffusion_value(j, in_y);
            num += df * df + dg * dg;
        }
        if (den > 1e-12) c.C_L = std::max(c.C_L, std::sqrt(num / den));

        // coefficient gap (f_m - f)^2 and (g_m - g)^2 at the first sample
        const double prob = model.epistemic_prob(tx, wx);
        model.aleatoric_sq(tx, wx, gmx);
        for (int j = 0; j < d; ++j) {
            const double fm = model.drift_value(j, tx, wx);
            const double f_true = truth.drift_value(j, in_x);
            const double gm = std::sqrt(gmx[j]) + model.sigma_e * prob;
            const double g_true = truth.diffusion_value(j, in_x);
            c.C_B = std::max(c.C_B, (fm - f_true) * (fm - f_true));
            c.C_B = std::max(c.C_B, (gm - g_true) * (gm - g_true));
        }
    }
    return c;
}

// ------------------------------------------------------------- serialization
std::string DelaySdeNet::to_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["dim"] = dim;
    j["lags"] = lags;
    j["dt"] = dt;
    j["horizon"] = horizon;
    j["sigma_e"] = sigma_e;
    j["normalization"] = {{"mean", norm.mean},
                          {"sd", norm.sd},
                          {"t_mean", norm.t_mean},
                          {"t_sd", norm.t_sd}};
    auto nets = nlohmann::json::array();
    for (const auto& net : drift) nets.push_back(net_to_json(net));
    j["drift"] = std::move(nets);
    nets = nlohmann::json::array();
    for (const auto& net : aleatoric) nets.push_back(net_to_json(net));
    j["aleatoric"] = std::move(nets);
    j["epistemic"] = net_to_json(epistemic);
    return j.dump(2);
}

DelaySdeNet DelaySdeNet::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    DelaySdeNet model;
    model.dim = j.at("dim").get<int>();
    model.lags = j.at("lags").get<int>();
    model.dt = j.at("dt").get<double>();
    model.horizon = j.at("horizon").get<int>();
    model.sigma_e = j.at("sigma_e").get<double>();
    const auto& n = j.at("normalization");
    model.norm.mean = n.at("mean").get<std::vector<double>>();
    model.norm.sd = n.at("sd").get<std::vector<double>>();
    model.norm.t_mean = n.at("t_mean").get<double>();
    model.norm.t_sd = n.at("t_sd").get<double>();
    for (const auto& net : j.at("drift")) model.drift.push_back(net_from_json(net));
    for (const auto& net : j.at("aleatoric")) model.aleatoric.push_back(net_from_json(net));
    model.epistemic = net_from_json(j.at("epistemic"));
    return model;
}

}  // namespace dsde
