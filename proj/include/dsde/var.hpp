#pragma once

#include <span>
#include <string>
#include <vector>

#include "dsde/errors.hpp"

namespace dsde {

// VAR(p) with intercept, fitted per equation by ordinary least squares, plus
// a per-coordinate residual-variance function y = exp(a + b*x) over the
// day-of-year x = (k mod 365) + 1.
struct VarModel {
    int dim = 0;
    int order = 0;
    std::vector<double> intercept;  // dim
    // coef[((lag-1)*dim + r)*dim + c] = weight of x_{t-lag, c} in equation r
    std::vector<double> coef;
    std::vector<double> var_a, var_b;  // per coordinate

    double coefficient(int lag, int r, int c) const {
        return coef[(static_cast<std::size_t>(lag - 1) * dim + r) * dim + c];
    }

    std::string to_json() const;
    static VarModel from_json(const std::string& text);
};

struct VarFit {
    VarModel model;
    std::vector<double> residuals;  // rows x dim, e = xhat - x (one-step, in-sample)
    std::vector<long> target_step;  // absolute step index of each residual's target
};

// segments: independent stretches (length x dim, row-major); regression rows
// never straddle segments. Throws SingularDesign on a rank-deficient design.
VarFit fit_var(const std::vector<std::vector<double>>& segments, int dim, int order);

struct VarPrediction {
    std::vector<double> mean;      // steps x dim
    std::vector<double> variance;  // steps x dim, accumulated over steps
};

// history: at least `order` points, newest last (rows x dim); k_current is
// the absolute step index of the newest point (feeds the day-of-year clock).
VarPrediction var_predict(const VarModel& model, std::span<const double> history,
                          long k_current, int steps);

struct ExpVarianceFit {
    double a = 0.0;
    double b = 0.0;
    bool clamped = false;  // some day-mean was zero and clamped to 1e-12
};

// Least squares of ln(mean squared residual per day) on the day index.
ExpVarianceFit fit_exp_variance(std::span<const double> residuals,
                                std::span<const long> day_index);

inline long day_of_year(long k) { return (k % 365) + 1; }

}  // namespace dsde
