#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "dsde/rng.hpp"
#include "dsde/var.hpp"

using namespace dsde;

namespace {

// simulate a known VAR(1) with intercept
std::vector<double> var1_series(const std::vector<double>& phi, const std::vector<double>& c,
                                double noise, long len, std::uint64_t seed) {
    Rng rng(seed, 0);
    const int d = static_cast<int>(c.size());
    std::vector<double> out(static_cast<std::size_t>(len) * d, 0.0);
    for (long t = 1; t < len; ++t)
        for (int r = 0; r < d; ++r) {
            double v = c[r];
            for (int j = 0; j < d; ++j)
                v += phi[static_cast<std::size_t>(r) * d + j] *
                     out[static_cast<std::size_t>(t - 1) * d + j];
            out[static_cast<std::size_t>(t) * d + r] = v + noise * rng.normal();
        }
    return out;
}

}  // namespace

TEST_CASE("VAR(1) generator recovery with tiny noise") {
    const std::vector<double> phi{0.6, -0.2, 0.1, 0.7};
    const std::vector<double> c{0.3, -0.1};
    const auto series = var1_series(phi, c, 1e-3, 4000, 12);
    const auto fit = fit_var({series}, 2, 1);
    for (int r = 0; r < 2; ++r) {
        CHECK(std::abs(fit.model.intercept[r] - c[r]) < 1e-2);
        for (int j = 0; j < 2; ++j)
            CHECK(std::abs(fit.model.coefficient(1, r, j) -
                           phi[static_cast<std::size_t>(r) * 2 + j]) < 1e-2);
    }
}

TEST_CASE("white noise has no autoregressive structure") {
    Rng rng(7, 0);
    std::vector<double> series(6000);
    for (auto& v : series) v = rng.normal();
    const auto fit = fit_var({series}, 1, 3);
    // standard error of a lag coefficient is about 1/sqrt(n)
    const double se = 1.0 / std::sqrt(6000.0);
    for (int lag = 1; lag <= 3; ++lag)
        CHECK(std::abs(fit.model.coefficient(lag, 0, 0)) < 3.5 * se);
}

TEST_CASE("OLS residuals are orthogonal to the regressors") {
    const std::vector<double> phi{0.5, 0.1, -0.3, 0.8};
    const auto series = var1_series(phi, {0.0, 0.0}, 0.5, 2000, 3);
    const auto fit = fit_var({series}, 2, 2);
    // reconstruct X^T e for equation 0 over lag-1 regressors
    double scale = 0.0;
    std::vector<double> xte(5, 0.0);
    std::size_t row = 0;
    for (long t = 2; t < 2000; ++t, ++row) {
        const double e = fit.residuals[row * 2 + 0];
        xte[0] += e;
        for (int lag = 1; lag <= 2; ++lag)
            for (int j = 0; j < 2; ++j) {
                const double x = series[static_cast<std::size_t>(t - lag) * 2 + j];
                xte[static_cast<std::size_t>((lag - 1) * 2 + j) + 1] += e * x;
                scale = std::max(scale, std::abs(x));
            }
    }
    for (double v : xte) CHECK(std::abs(v) <= 1e-8 * std::max(1.0, scale) * 2000);
}

TEST_CASE("one-step prediction equals the closed form") {
    const std::vector<double> phi{0.4, 0.2, -0.1, 0.9};
    const auto series = var1_series(phi, {0.1, -0.2}, 0.3, 500, 9);
    const auto fit = fit_var({series}, 2, 2);
    const std::vector<double> history{series[200 * 2], series[200 * 2 + 1],
                                      series[201 * 2], series[201 * 2 + 1]};
    const auto pred = var_predict(fit.model, history, 202, 1);
    for (int r = 0; r < 2; ++r) {
        double want = fit.model.intercept[r];
        for (int j = 0; j < 2; ++j)
            want += fit.model.coefficient(1, r, j) * history[2 + j] +
                    fit.model.coefficient(2, r, j) * history[j];
        CHECK(pred.mean[r] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("zero coefficients predict the intercept and accumulate fitted variance") {
    VarModel model;
    model.dim = 1;
    model.order = 1;
    model.intercept = {2.5};
    model.coef = {0.0};
    model.var_a = {std::log(0.16)};
    model.var_b = {0.0};
    const auto pred = var_predict(model, std::vector<double>{1.0}, 10, 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(pred.mean[i] == doctest::Approx(2.5));
        CHECK(pred.variance[i] == doctest::Approx(0.16 * (i + 1)).epsilon(1e-12));
    }
}

TEST_CASE("insufficient history throws") {
    VarModel model;
    model.dim = 1;
    model.order = 4;
    model.intercept = {0.0};
    model.coef.assign(4, 0.0);
    CHECK_THROWS_AS(var_predict(model, std::vector<double>{1.0, 2.0}, 5, 1),
                    InsufficientHistory);
}

TEST_CASE("exponential variance fit") {
    SUBCASE("constant residual variance gives b near 0 and a near log s^2") {
        Rng rng(21, 0);
        const double s = 0.8;
        std::vector<double> resid(20000);
        std::vector<long> days(resid.size());
        for (std::size_t i = 0; i < resid.size(); ++i) {
            resid[i] = s * rng.normal();
            days[i] = static_cast<long>(i % 365) + 1;
        }
        const auto fit = fit_exp_variance(resid, days);
        CHECK(std::abs(fit.b) < 5e-4);
        CHECK(fit.a == doctest::Approx(std::log(s * s)).epsilon(0.1));
    }
    SUBCASE("noiseless exponential data is recovered exactly") {
        const double a = 1.0, b = -0.02;
        std::vector<double> resid;
        std::vector<long> days;
        for (long x = 1; x <= 365; ++x) {
            resid.push_back(std::sqrt(std::exp(a + b * x)));
            days.push_back(x);
        }
        const auto fit = fit_exp_variance(resid, days);
        CHECK(std::abs(fit.a - a) < 1e-9);
        CHECK(std::abs(fit.b - b) < 1e-9);
        CHECK_FALSE(fit.clamped);
    }
    SUBCASE("all-zero residuals are clamped and flagged") {
        const std::vector<double> resid(100, 0.0);
        std::vector<long> days(100);
        for (std::size_t i = 0; i < 100; ++i) days[i] = static_cast<long>(i % 365) + 1;
        const auto fit = fit_exp_variance(resid, days);
        CHECK(fit.clamped);
        CHECK(fit.a == doctest::Approx(std::log(1e-12)).epsilon(1e-6));
    }
}

TEST_CASE("var model json round trip") {
    const auto series = var1_series({0.5, 0.0, 0.0, 0.5}, {1.0, -1.0}, 0.2, 300, 4);
    auto fit = fit_var({series}, 2, 2);
    fit.model.var_a = {0.5, -0.5};
    fit.model.var_b = {-0.01, 0.02};
    const auto back = VarModel::from_json(fit.model.to_json());
    CHECK(back.intercept == fit.model.intercept);
    CHECK(back.coef == fit.model.coef);
    CHECK(back.var_a == fit.model.var_a);
    CHECK(back.var_b == fit.model.var_b);
}

TEST_CASE("singular designs are rejected") {
    const std::vector<double> series(50, 1.0);  // constant: lag columns collinear
    CHECK_THROWS_AS(fit_var({series}, 1, 2), SingularDesign);
}

TEST_CASE("day-of-year helper") {
    CHECK(day_of_year(1) == 2);
    CHECK(day_of_year(364) == 365);
    CHECK(day_of_year(365) == 1);
}
