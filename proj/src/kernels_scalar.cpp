#include <cmath>

#include "dsde/kernels.hpp"

// Scalar reference kernels. These spell out the exact same fma/lane pattern
// the AVX2 variant uses, so both backends produce identical bits.

namespace dsde::kernels {
namespace {

void matvec_cols_scalar(const double* cols, std::size_t rows, std::size_t dim,
                        const double* w, double* out) {
    for (std::size_t r = 0; r < rows; ++r) out[r] = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        const double wj = w[j];
        const double* col = cols + j * rows;
        for (std::size_t r = 0; r < rows; ++r) out[r] = std::fma(wj, col[r], out[r]);
    }
}

void weighted_sum_cols_scalar(const double* cols, std::size_t rows, std::size_t dim,
                              const double* s, double* out) {
    for (std::size_t j = 0; j < dim; ++j) {
        const double* col = cols + j * rows;
        double p[4] = {0.0, 0.0, 0.0, 0.0};
        for (std::size_t r = 0; r < rows; ++r) p[r & 3] = std::fma(s[r], col[r], p[r & 3]);
        out[j] += (p[0] + p[2]) + (p[1] + p[3]);
    }
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

double sum_scalar(const double* x, std::size_t n) {
    double p[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) p[i & 3] += x[i];
    return (p[0] + p[2]) + (p[1] + p[3]);
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double p[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) p[i & 3] = std::fma(x[i], y[i], p[i & 3]);
    return (p[0] + p[2]) + (p[1] + p[3]);
}

double min_sqdist_cols_scalar(const double* cols, std::size_t rows, std::size_t dim,
                              const double* q) {
    double best = HUGE_VAL;
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double diff = cols[j * rows + r] - q[j];
            acc = std::fma(diff, diff, acc);
        }
        if (acc < best) best = acc;
    }
    return best;
}

}  // namespace

const Ops scalar_ops = {
    matvec_cols_scalar, weighted_sum_cols_scalar, axpy_scalar,
    sum_scalar,         dot_scalar,               min_sqdist_cols_scalar,
};

}  // namespace dsde::kernels
