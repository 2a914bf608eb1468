#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <functional>

#include "doctest.h"
#include "dsde/activation.hpp"

using namespace dsde;

namespace {

// independent check: composite Simpson on a fixed fine partition
double simpson_fixed(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

double gamma0_oracle(const Activation& act, double b) {
    auto integrand = [&](double x) {
        return std::abs(act.second_deriv(x)) * (std::abs(x) + 1.0);
    };
    return simpson_fixed(integrand, -b, 0.0, 200001) + simpson_fixed(integrand, 0.0, b, 200001);
}

}  // namespace

TEST_CASE("relu constants are the analytic values") {
    const auto c = activation_constant({Activation::Kind::Relu, 1.0});
    CHECK(c.gamma0 == 1.0);           // unit point mass at 0 times (|0|+1)
    CHECK(c.inf_u == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c.gamma == doctest::Approx(1.0));
    CHECK(c.c_sigma == doctest::Approx(1.0));
}

TEST_CASE("tanh gamma0 cross-checked against a second quadrature rule") {
    for (double alpha : {0.5, 1.0, 2.0}) {
        const Activation act{Activation::Kind::Tanh, alpha};
        const auto c = activation_constant(act);
        CHECK(c.gamma0 == doctest::Approx(gamma0_oracle(act, 60.0 / alpha)).epsilon(1e-6));
        // closed form: int |sigma''|(|x|+1) dx = 2 + 2 alpha for tanh(alpha x)
        CHECK(c.gamma0 == doctest::Approx(2.0 + 2.0 * alpha).epsilon(1e-8));
    }
}

TEST_CASE("sigmoid gamma0 cross-checked against a second quadrature rule") {
    for (double lambda : {0.5, 1.0, 3.0}) {
        const Activation act{Activation::Kind::Sigmoid, lambda};
        const auto c = activation_constant(act);
        CHECK(c.gamma0 == doctest::Approx(gamma0_oracle(act, 120.0 / lambda)).epsilon(1e-6));
        // closed form: 1 + lambda / 2
        CHECK(c.gamma0 == doctest::Approx(1.0 + 0.5 * lambda).epsilon(1e-8));
    }
}

TEST_CASE("infimum of u") {
    // tanh: u -> |tanh| = 1 as |x| grows; sigmoid: u -> 0 as x -> -inf
    CHECK(activation_constant({Activation::Kind::Tanh, 1.0}).inf_u ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(activation_constant({Activation::Kind::Sigmoid, 1.0}).inf_u ==
          doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("sigmoid c_sigma includes the 0.5 offset at zero") {
    const auto c = activation_constant({Activation::Kind::Sigmoid, 1.0});
    // (gamma + 0 + |sigma(0)|)^2 with sigma(0) = 0.5
    CHECK(c.c_sigma == doctest::Approx((c.gamma + 0.5) * (c.gamma + 0.5)).epsilon(1e-12));
    CHECK(c.c_sigma == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("tanh c_sigma") {
    const auto c = activation_constant({Activation::Kind::Tanh, 1.0});
    CHECK(c.c_sigma == doctest::Approx(25.0).epsilon(1e-6));
}

TEST_CASE("activation values and derivatives") {
    const Activation tanh2{Activation::Kind::Tanh, 2.0};
    CHECK(tanh2.value(0.3) == doctest::Approx(std::tanh(0.6)));
    const double h = 1e-6;
    CHECK(tanh2.deriv(0.3) ==
          doctest::Approx((tanh2.value(0.3 + h) - tanh2.value(0.3 - h)) / (2 * h))
              .epsilon(1e-8));
    const Activation sig{Activation::Kind::Sigmoid, 1.5};
    CHECK(sig.deriv(-0.7) ==
          doctest::Approx((sig.value(-0.7 + h) - sig.value(-0.7 - h)) / (2 * h)).epsilon(1e-8));
    CHECK(sig.second_deriv(-0.7) ==
          doctest::Approx((sig.deriv(-0.7 + h) - sig.deriv(-0.7 - h)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("bad activation parameters are rejected") {
    CHECK_THROWS_AS(Activation::parse("tanh", 0.0), ConfigError);
    CHECK_THROWS_AS(Activation::parse("swish", 1.0), ConfigError);
}
