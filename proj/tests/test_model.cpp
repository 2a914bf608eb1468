#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "dsde/experiments.hpp"
#include "dsde/metrics.hpp"
#include "dsde/model.hpp"

using namespace dsde;

namespace {

// synthetic path set driven by a caller-supplied recursion
template <typename Step>
PathSet synth_paths(double tau, double horizon, double dt, int dim, std::size_t n,
                    std::uint64_t seed, const Step& step) {
    PathSet set;
    set.grid = make_time_grid(tau, horizon, dt);
    set.dim = dim;
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(seed, i);
        Path p{set.grid, dim, {}};
        p.values.assign(static_cast<std::size_t>(set.grid.total_points()) * dim, 0.0);
        for (long k = -set.grid.lag_points; k < set.grid.step_count; ++k) {
            const auto cur = p.at(k);
            auto nxt = p.at(k + 1);
            step(cur, nxt, rng);
        }
        set.paths.push_back(std::move(p));
    }
    return set;
}

double drift_rollout_loss(const DelaySdeNet& model, const WindowSet& windows) {
    const auto e = residuals(model, windows);
    double acc = 0.0;
    for (double v : e) acc += v * v;
    return acc / static_cast<double>(windows.rows());
}

PipelineConfig quiet_pipeline(std::uint64_t seed) {
    PipelineConfig cfg;
    cfg.net.width = 8;
    cfg.drift_sgd = {0.05, 0.9, 0.0, 150, 0};
    cfg.aleatoric_sgd = {0.05, 0.9, 0.0, 150, 0};
    cfg.epistemic_sgd = {0.01, 0.9, 0.0, 20, 0};
    cfg.sbo_count = 200;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("drift rollout gradient matches finite differences through the whole rollout") {
    // d=2, p=2, N=3: predictions re-enter the lag window
    const auto paths = synth_paths(2.0, 12.0, 1.0, 2, 2, 5,
                                   [](auto cur, auto nxt, Rng& rng) {
                                       nxt[0] = 0.8 * cur[0] + 0.3 * rng.normal();
                                       nxt[1] = -0.5 * cur[1] + 0.2 * rng.normal();
                                   });
    const auto windows = build_windows(paths, 2, 3);
    ModelConfig mc;
    mc.width = 3;
    DelaySdeNet model = init_model(windows, 3, mc, 11);

    // analytic gradient recovered from a single momentum-free SGD step with
    // lr = 1: grad = theta_before - theta_after
    const double h = 1e-5;
    double worst = 0.0;
    DelaySdeNet stepped = model;
    train_drift(stepped, windows, {1.0, 0.0, 0.0, 1, 0}, 77, nullptr);
    for (int j = 0; j < 2; ++j) {
        auto probe_block = [&](std::vector<double> TwoLayerNet::* member) {
            auto& params = model.drift[j].*member;
            const auto& stepped_params = stepped.drift[j].*member;
            for (std::size_t i = 0; i < params.size(); ++i) {
                const double analytic = params[i] - stepped_params[i];  // lr = 1
                const double keep = params[i];
                params[i] = keep + h;
                const double up = drift_rollout_loss(model, windows);
                params[i] = keep - h;
                const double down = drift_rollout_loss(model, windows);
                params[i] = keep;
                const double fd = (up - down) / (2.0 * h);
                worst = std::max(worst,
                                 std::abs(analytic - fd) / std::max(std::abs(fd), 1e-6));
            }
        };
        probe_block(&TwoLayerNet::a);
        probe_block(&TwoLayerNet::w);
        probe_block(&TwoLayerNet::b);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("identity dynamics drive the drift net toward zero") {
    // x(t+1) = x(t): the best drift is identically 0
    const auto paths = synth_paths(4.0, 40.0, 1.0, 1, 3, 3,
                                   [](auto cur, auto nxt, Rng&) { nxt[0] = cur[0] + 0.0; });
    // constant paths are degenerate; jitter the initial segments
    auto jittered = paths;
    for (std::size_t i = 0; i < jittered.paths.size(); ++i) {
        Rng rng(50, i);
        for (long k = -4; k <= 40; ++k)
            jittered.paths[i].at(k)[0] = std::sin(0.3 * (k + 11.0 * i)) + 0.1 * rng.normal() * 0;
    }
    const auto windows = build_windows(jittered, 4, 1);
    ModelConfig mc;
    mc.width = 8;
    DelaySdeNet model = init_model(windows, 1, mc, 2);
    const double before = drift_rollout_loss(model, windows);
    train_drift(model, windows, {0.05, 0.9, 0.0, 200, 0}, 2);
    const double after = drift_rollout_loss(model, windows);
    CHECK(after < before);
    CHECK(after < 1e-3);
}

TEST_CASE("drift matches the OLS AR(1) oracle on linear data") {
    const double phi = 0.85, noise = 0.05;
    const auto paths = synth_paths(1.0, 300.0, 1.0, 1, 4, 17,
                                   [&](auto cur, auto nxt, Rng& rng) {
                                       nxt[0] = phi * cur[0] + noise * rng.normal();
                                   });
    const auto train_w = build_windows(paths, 1, 1, std::vector<std::size_t>{0, 1, 2});
    const auto test_w = build_windows(paths, 1, 1, std::vector<std::size_t>{3});

    // closed-form OLS for x(t+1) = a + b x(t) on the training windows
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(train_w.rows());
    for (std::size_t r = 0; r < train_w.rows(); ++r) {
        const double x = train_w.window(r)[0], y = train_w.target(r)[0];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double a = (sy - b * sx) / n;

    std::vector<double> ols_pred(test_w.rows()), truth(test_w.rows());
    for (std::size_t r = 0; r < test_w.rows(); ++r) {
        ols_pred[r] = a + b * test_w.window(r)[0];
        truth[r] = test_w.target(r)[0];
    }
    const double ols_rmse = rmse(ols_pred, truth);

    ModelConfig mc;
    mc.width = 8;
    DelaySdeNet model = init_model(train_w, 1, mc, 5);
    train_drift(model, train_w, {0.05, 0.9, 0.0, 400, 0}, 5);
    std::vector<double> net_pred = rollout_means(model, test_w);
    const double net_rmse = rmse(net_pred, truth);
    CHECK(net_rmse <= 1.05 * ols_rmse);
}

TEST_CASE("residual sign convention is prediction minus truth") {
    const auto paths = synth_paths(1.0, 6.0, 1.0, 1, 1, 23,
                                   [](auto cur, auto nxt, Rng& rng) {
                                       nxt[0] = cur[0] + 1.0 + 0.0 * rng.normal();
                                   });
    const auto windows = build_windows(paths, 1, 1);
    ModelConfig mc;
    mc.width = 2;
    DelaySdeNet model = init_model(windows, 1, mc, 1);
    for (auto& net : model.drift) {
        std::fill(net.a.begin(), net.a.end(), 0.0);  // f = 0
        net.output_bias = 0.0;
    }
    const auto e = residuals(model, windows);
    // xhat = x_k, truth = x_k + 1, so e = -1
    for (double v : e) CHECK(v == doctest::Approx(-1.0));
}

TEST_CASE("aleatoric net recovers a constant variance level") {
    const double s = 0.7;
    const auto paths = synth_paths(4.0, 120.0, 1.0, 1, 4, 29,
                                   [&](auto cur, auto nxt, Rng& rng) {
                                       nxt[0] = 0.2 * cur[0] + s * rng.normal();
                                   });
    const auto windows = build_windows(paths, 4, 1);
    ModelConfig mc;
    mc.width = 6;
    DelaySdeNet model = init_model(windows, 1, mc, 7);
    train_drift(model, windows, {0.02, 0.9, 0.0, 200, 0}, 7);
    const auto e = residuals(model, windows);
    train_aleatoric(model, windows, e, {0.05, 0.9, 0.0, 400, 0}, 7);

    double acc = 0.0;
    std::vector<double> gsq(1);
    for (std::size_t r = 0; r < windows.rows(); ++r) {
        model.aleatoric_sq(windows.times[r], windows.window(r), gsq);
        acc += gsq[0];
    }
    const double fitted = acc / static_cast<double>(windows.rows());
    CHECK(fitted == doctest::Approx(s * s).epsilon(0.25));
}

TEST_CASE("aleatoric fit scales quadratically with the residuals on a width-1 toy") {
    // width-1 sigmoid net with frozen input weights: fitting g^2 dt = e^2 is a
    // 1-parameter problem, so scaling e by c must scale the fitted g by c
    const auto paths = synth_paths(2.0, 60.0, 1.0, 1, 2, 31,
                                   [](auto cur, auto nxt, Rng& rng) {
                                       nxt[0] = 0.5 * cur[0] + 0.4 * rng.normal();
                                   });
    const auto windows = build_windows(paths, 2, 1);
    ModelConfig mc;
    mc.width = 1;
    const double c = 3.0;

    auto fitted_level = [&](double residual_scale) {
        DelaySdeNet model = init_model(windows, 1, mc, 13);
        for (auto& net : model.aleatoric) {
            std::fill(net.w.begin(), net.w.end(), 0.0);  // constant-output net
            std::fill(net.b.begin(), net.b.end(), 0.0);
            net.output_bias = 0.0;
        }
        std::vector<double> e(windows.rows(), 0.0);
        Rng rng(77, 0);
        for (auto& v : e) v = residual_scale * rng.normal();
        train_aleatoric(model, windows, e, {0.5, 0.9, 0.0, 600, 0}, 13);
        std::vector<double> gsq(1);
        model.aleatoric_sq(windows.times[0], windows.window(0), gsq);
        return std::sqrt(gsq[0]);
    };
    const double g1 = fitted_level(0.2);
    const double g2 = fitted_level(0.2 * c);
    CHECK(g2 == doctest::Approx(c * g1).epsilon(0.05));
}

TEST_CASE("classifier separates linearly separable clouds") {
    // ID windows near 0, OOD windows near 10
    WindowSet id, ood;
    id.dim = ood.dim = 1;
    id.lags = ood.lags = 2;
    id.horizon = ood.horizon = 1;
    Rng rng(3, 0);
    const std::vector<double> target{0.0};
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> wa{rng.normal(), rng.normal()};
        id.append(static_cast<double>(i % 50), wa, target, 0, i);
        const std::vector<double> wb{10.0 + rng.normal(), 10.0 + rng.normal()};
        ood.append(static_cast<double>(i % 50), wb, target, 0, i);
    }
    ModelConfig mc;
    mc.width = 4;
    DelaySdeNet model = init_model(id, 1, mc, 9);
    train_epistemic(model, id, ood, {0.5, 0.9, 0.0, 200, 0}, 9);

    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
    for (std::size_t r = 0; r < id.rows(); ++r) {
        scores.push_back(model.epistemic_prob(id.times[r], id.window(r)));
        labels.push_back(0);
    }
    for (std::size_t r = 0; r < ood.rows(); ++r) {
        scores.push_back(model.epistemic_prob(ood.times[r], ood.window(r)));
        labels.push_back(1);
    }
    CHECK(rocauc(scores, labels) > 0.999);
}

TEST_CASE("identical ID and OOD sets leave the classifier uninformative") {
    WindowSet id;
    id.dim = 1;
    id.lags = 2;
    id.horizon = 1;
    Rng rng(4, 0);
    for (int i = 0; i < 100; ++i)
        id.append(static_cast<double>(i), {std::vector<double>{rng.normal(), rng.normal()}},
                  std::vector<double>{0.0}, 0, i);
    ModelConfig mc;
    mc.width = 4;
    DelaySdeNet model = init_model(id, 1, mc, 10);
    TrainLog log;
    train_epistemic(model, id, id, {0.1, 0.9, 0.0, 50, 0}, 10, &log);
    // the min and max terms cancel: loss 0, gradients 0, net unchanged
    for (double loss : log) CHECK(loss == doctest::Approx(0.0));
}

TEST_CASE("epistemic probability stays in [0,1] for extreme inputs") {
    WindowSet w;
    w.dim = 1;
    w.lags = 2;
    w.horizon = 1;
    Rng seed_rng(5, 0);
    for (int i = 0; i < 32; ++i)
        w.append(static_cast<double>(i),
                 {std::vector<double>{seed_rng.normal(), seed_rng.normal()}},
                 std::vector<double>{0.0}, 0, i);
    ModelConfig mc;
    mc.width = 8;
    const DelaySdeNet model = init_model(w, 1, mc, 6);
    Rng rng(6, 1);
    for (int i = 0; i < 1000000; ++i) {
        const double mag = (i % 3 == 0) ? 1e6 : (i % 3 == 1) ? 1.0 : 1e-3;
        const std::vector<double> window{mag * (2.0 * rng.uniform() - 1.0),
                                         mag * (2.0 * rng.uniform() - 1.0)};
        const double prob = model.epistemic_prob(mag * (2.0 * rng.uniform() - 1.0), window);
        REQUIRE(prob >= 0.0);
        REQUIRE(prob <= 1.0);
    }
}

TEST_CASE("retraining the diffusion nets never touches the drift parameters") {
    const auto paths = synth_paths(2.0, 30.0, 1.0, 1, 2, 37,
                                   [](auto cur, auto nxt, Rng& rng) {
                                       nxt[0] = 0.6 * cur[0] + 0.3 * rng.normal();
                                   });
    const auto windows = build_windows(paths, 2, 1);
    ModelConfig mc;
    mc.width = 4;
    DelaySdeNet model = init_model(windows, 1, mc, 21);
    train_drift(model, windows, {0.05, 0.9, 0.0, 50, 0}, 21);
    const auto drift_a = model.drift[0].a;
    const auto drift_w = model.drift[0].w;

    const auto e = residuals(model, windows);
    train_aleatoric(model, windows, e, {0.05, 0.9, 0.0, 50, 0}, 21);
    train_epistemic(model, windows, windows, {0.05, 0.9, 0.0, 10, 0}, 21);
    tune_sigma_e(model, windows);

    CHECK(model.drift[0].a == drift_a);
    CHECK(model.drift[0].w == drift_w);
}

TEST_CASE("training is deterministic given seed and config") {
    const auto paths = synth_paths(2.0, 40.0, 1.0, 2, 2, 41,
                                   [](auto cur, auto nxt, Rng& rng) {
                                       nxt[0] = 0.7 * cur[0] + 0.2 * rng.normal();
                                       nxt[1] = -0.4 * cur[1] + 0.1 * rng.normal();
                                   });
    const auto windows = build_windows(paths, 2, 2);
    auto run = [&] {
        ModelConfig mc;
        mc.width = 5;
        DelaySdeNet model = init_model(windows, 2, mc, 55);
        train_drift(model, windows, {0.02, 0.9, 1e-5, 40, 16}, 55);
        return model;
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.drift[0].w == b.drift[0].w);
    CHECK(a.drift[1].a == b.drift[1].a);
}

TEST_CASE("sigma_e tuning") {
    WindowSet val;
    val.dim = 1;
    val.lags = 1;
    val.horizon = 1;
    Rng rng(8, 0);
    for (int i = 0; i < 64; ++i)
        val.append(static_cast<double>(i), {std::vector<double>{rng.normal()}},
                   std::vector<double>{0.0}, 0, i);

    ModelConfig mc;
    mc.width = 2;
    SUBCASE("dead classifier returns zero") {
        DelaySdeNet model = init_model(val, 1, mc, 3);
        // force prob = 0 by a huge negative output bias
        model.epistemic.has_output_bias = true;
        model.epistemic.output_bias = -1e9;
        std::fill(model.epistemic.a.begin(), model.epistemic.a.end(), 0.0);
        CHECK(tune_sigma_e(model, val) == 0.0);
    }
    SUBCASE("constructed minimizer is recovered") {
        // aleatoric std = 1 exactly, residuals e = 1 + prob: optimum sigma = 1
        DelaySdeNet model = init_model(val, 1, mc, 3);
        // aleatoric net: relu(0x + 1) => constant 1; dt = 1 so std = 1
        model.aleatoric[0].act = {Activation::Kind::Relu, 1.0};
        model.aleatoric[0].a = {1.0, 0.0};
        model.aleatoric[0].b = {1.0, 0.0};
        std::fill(model.aleatoric[0].w.begin(), model.aleatoric[0].w.end(), 0.0);
        model.aleatoric[0].has_output_bias = false;
        model.dt = 1.0;
        model.horizon = 1;

        // windows whose targets realize e = 1 + prob exactly: residuals are
        // e = xhat - x = (x_k + f) - target; with f = 0 set target = x_k - (1+prob)
        for (auto& net : model.drift) {
            std::fill(net.a.begin(), net.a.end(), 0.0);
            net.output_bias = 0.0;
        }
        for (std::size_t r = 0; r < val.rows(); ++r) {
            const double prob = model.epistemic_prob(val.times[r], val.window(r));
            val.targets[r] = val.window(r)[0] - (1.0 + prob);
        }
        const double sigma = tune_sigma_e(model, val);
        CHECK(sigma == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("prediction bundle") {
    WindowSet w;
    w.dim = 1;
    w.lags = 2;
    w.horizon = 1;
    for (int i = 0; i < 8; ++i)
        w.append(static_cast<double>(i), {std::vector<double>{0.1 * i, 0.1 * i + 0.05}},
                 std::vector<double>{0.0}, 0, i);
    ModelConfig mc;
    mc.width = 2;
    DelaySdeNet model = init_model(w, 1, mc, 12);
    model.sigma_e = 0.0;
    // flat aleatoric level s: relu(0x+1)*s
    const double s = 0.8;
    model.aleatoric[0].act = {Activation::Kind::Relu, 1.0};
    model.aleatoric[0].a = {s, 0.0};
    model.aleatoric[0].b = {1.0, 0.0};
    std::fill(model.aleatoric[0].w.begin(), model.aleatoric[0].w.end(), 0.0);
    model.aleatoric[0].has_output_bias = false;
    // zero drift
    for (auto& net : model.drift) {
        std::fill(net.a.begin(), net.a.end(), 0.0);
        net.output_bias = 0.0;
    }

    SUBCASE("CI half-width at one step is z * s * sqrt(dt)") {
        const auto bundle =
            predict(model, 3.0, std::vector<double>{0.2, 0.4}, 1, 0.95);
        const double z = normal_quantile(0.975);
        CHECK(bundle.ci_hi[0] - bundle.mean[0] ==
              doctest::Approx(z * s * std::sqrt(model.dt)).epsilon(1e-10));
        CHECK(bundle.mean[0] == doctest::Approx(0.4));  // zero drift keeps the last value
    }
    SUBCASE("noise-free rollout equals deterministic Euler and variance accumulates") {
        const auto bundle = predict(model, 3.0, std::vector<double>{0.2, 0.4}, 5, 0.9);
        for (int i = 0; i < 5; ++i) {
            CHECK(bundle.mean[i] == doctest::Approx(0.4));
            CHECK(bundle.aleatoric_var[i] ==
                  doctest::Approx(s * s * model.dt * (i + 1)).epsilon(1e-12));
        }
    }
    SUBCASE("short history throws") {
        CHECK_THROWS_AS(predict(model, 3.0, std::vector<double>{0.2}, 1, 0.95),
                        InsufficientHistory);
    }
}

TEST_CASE("normal quantile") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-8));
    CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963985).epsilon(1e-8));
    CHECK(normal_quantile(0.841344746) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("theoretical bound") {
    BoundConstants c;
    c.T = 5.0;
    c.p = 4;
    c.m = 64;
    c.C_L = 0.1;
    c.C_B = 2.0;
    c.eps_F = 0.0;
    c.C_ge = 0.0;
    c.C_f = 3.0;
    c.C_g = 1.5;
    c.C_sigma = 25.0;
    c.gamma = 1.0;
    c.C_T = 1.0;

    SUBCASE("doubling m shrinks c_m by exactly sqrt(2)") {
        const auto r1 = theoretical_bound(c, 0.01);
        BoundConstants c2 = c;
        c2.m = 2 * c.m;
        const auto r2 = theoretical_bound(c2, 0.01);
        CHECK(r1.c_m / r2.c_m == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    }
    SUBCASE("total bound is increasing in dt") {
        double prev = 0.0;
        for (double dt : {0.001, 0.01, 0.1, 1.0}) {
            const auto r = theoretical_bound(c, dt);
            CHECK(r.total > prev);
            prev = r.total;
        }
    }
    SUBCASE("m to infinity sends c_m to zero when C_ge = eps_F = 0") {
        BoundConstants big = c;
        big.C_L = 0.01;  // keep the Gronwall factor from swamping the limit
        big.m = 1e16;
        CHECK(theoretical_bound(big, 0.01).c_m < 1e-4);
        big.m = 1e30;
        CHECK(theoretical_bound(big, 0.01).c_m < 1e-10);
    }
}

TEST_CASE("model json round trip") {
    const auto paths = synth_paths(2.0, 20.0, 1.0, 2, 1, 71,
                                   [](auto cur, auto nxt, Rng& rng) {
                                       nxt[0] = 0.5 * cur[0] + 0.1 * rng.normal();
                                       nxt[1] = cur[1];
                                   });
    const auto windows = build_windows(paths, 2, 1);
    ModelConfig mc;
    mc.width = 3;
    DelaySdeNet model = init_model(windows, 1, mc, 91);
    model.sigma_e = 0.375;
    const auto back = DelaySdeNet::from_json(model.to_json());
    CHECK(back.sigma_e == model.sigma_e);
    CHECK(back.norm.mean == model.norm.mean);
    CHECK(back.drift[0].w == model.drift[0].w);
    CHECK(back.aleatoric[1].a == model.aleatoric[1].a);
    CHECK(back.epistemic.b == model.epistemic.b);
    // predictions agree bit for bit
    const std::vector<double> hist{0.1, 0.2, 0.3, 0.4};
    const auto p1 = predict(model, 5.0, hist, 3);
    const auto p2 = predict(back, 5.0, hist, 3);
    CHECK(p1.mean == p2.mean);
    CHECK(p1.total_std == p2.total_std);
}
