#include <immintrin.h>

#include <cmath>

#include "dsde/kernels.hpp"

// AVX2/FMA kernels. Same lane discipline as the scalar reference: vector lane
// l accumulates elements with index ≡ l (mod 4), partials combined as
// (p0+p2) + (p1+p3), tails folded into the matching lane.

namespace dsde::kernels {
namespace {

void matvec_cols_avx2(const double* cols, std::size_t rows, std::size_t dim,
                      const double* w, double* out) {
    const std::size_t main = rows & ~std::size_t(3);
    for (std::size_t r = 0; r < main; r += 4) _mm256_storeu_pd(out + r, _mm256_setzero_pd());
    for (std::size_t r = main; r < rows; ++r) out[r] = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        const double wj = w[j];
        const __m256d wv = _mm256_set1_pd(wj);
        const double* col = cols + j * rows;
        for (std::size_t r = 0; r < main; r += 4) {
            __m256d o = _mm256_loadu_pd(out + r);
            o = _mm256_fmadd_pd(wv, _mm256_loadu_pd(col + r), o);
            _mm256_storeu_pd(out + r, o);
        }
        for (std::size_t r = main; r < rows; ++r) out[r] = std::fma(wj, col[r], out[r]);
    }
}

void weighted_sum_cols_avx2(const double* cols, std::size_t rows, std::size_t dim,
                            const double* s, double* out) {
    const std::size_t main = rows & ~std::size_t(3);
    for (std::size_t j = 0; j < dim; ++j) {
        const double* col = cols + j * rows;
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t r = 0; r < main; r += 4)
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(s + r), _mm256_loadu_pd(col + r), acc);
        alignas(32) double p[4];
        _mm256_store_pd(p, acc);
        for (std::size_t r = main; r < rows; ++r) p[r & 3] = std::fma(s[r], col[r], p[r & 3]);
        out[j] += (p[0] + p[2]) + (p[1] + p[3]);
    }
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    const std::size_t main = n & ~std::size_t(3);
    for (std::size_t i = 0; i < main; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (std::size_t i = main; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

double sum_avx2(const double* x, std::size_t n) {
    const std::size_t main = n & ~std::size_t(3);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < main; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    alignas(32) double p[4];
    _mm256_store_pd(p, acc);
    for (std::size_t i = main; i < n; ++i) p[i & 3] += x[i];
    return (p[0] + p[2]) + (p[1] + p[3]);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    const std::size_t main = n & ~std::size_t(3);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < main; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    alignas(32) double p[4];
    _mm256_store_pd(p, acc);
    for (std::size_t i = main; i < n; ++i) p[i & 3] = std::fma(x[i], y[i], p[i & 3]);
    return (p[0] + p[2]) + (p[1] + p[3]);
}

double min_sqdist_cols_avx2(const double* cols, std::size_t rows, std::size_t dim,
                            const double* q) {
    const std::size_t main = rows & ~std::size_t(3);
    __m256d best = _mm256_set1_pd(HUGE_VAL);
    for (std::size_t r = 0; r < main; r += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t j = 0; j < dim; ++j) {
            const __m256d diff =
                _mm256_sub_pd(_mm256_loadu_pd(cols + j * rows + r), _mm256_set1_pd(q[j]));
            acc = _mm256_fmadd_pd(diff, diff, acc);
        }
        best = _mm256_min_pd(best, acc);
    }
    alignas(32) double p[4];
    _mm256_store_pd(p, best);
    double out = p[0];
    for (int l = 1; l < 4; ++l)
        if (p[l] < out) out = p[l];
    for (std::size_t r = main; r < rows; ++r) {
        double acc = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double diff = cols[j * rows + r] - q[j];
            acc = std::fma(diff, diff, acc);
        }
        if (acc < out) out = acc;
    }
    return out;
}

}  // namespace

const Ops avx2_ops = {
    matvec_cols_avx2, weighted_sum_cols_avx2, axpy_avx2,
    sum_avx2,         dot_avx2,               min_sqdist_cols_avx2,
};

}  // namespace dsde::kernels
