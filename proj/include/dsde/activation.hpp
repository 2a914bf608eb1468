#pragma once

#include <string>

#include "dsde/errors.hpp"

namespace dsde {

// Scalar activation with a shape parameter: tanh(alpha*z), logistic
// 1/(1+exp(-lambda*z)), or relu. The parameter must be positive.
struct Activation {
    enum class Kind { Tanh, Sigmoid, Relu };
    Kind kind = Kind::Tanh;
    double param = 1.0;

    double value(double z) const;
    double deriv(double z) const;
    double second_deriv(double z) const;  // classical part; relu handled analytically

    std::string name() const;
    static Activation parse(const std::string& name, double param);
};

// Constants entering the width-m approximation bound:
//   gamma0 = integral |sigma''(x)| (|x|+1) dx
//   gamma  = gamma0 + inf_x ( |sigma(x)| + (|x|+2)|sigma'(x)| )
//   c_sigma = (gamma + min(|sigma'(+inf)|, |sigma'(-inf)|) + |sigma(0)|)^2
// gamma0 is computed by adaptive Simpson quadrature on [-B,B] with B grown
// until the analytic tail bound is below 1e-10 (relu: unit point mass at 0,
// evaluated analytically). The infimum is located by a coarse scan plus
// golden-section refinement.
struct ActivationConstants {
    double gamma0 = 0.0;
    double inf_u = 0.0;
    double gamma = 0.0;
    double c_sigma = 0.0;
};

ActivationConstants activation_constant(const Activation& act);

}  // namespace dsde
