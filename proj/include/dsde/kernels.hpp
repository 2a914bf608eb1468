#pragma once

#include <cstddef>
#include <string>

namespace dsde::kernels {

// Batched double-precision primitives behind the hot loops (net evaluation,
// gradient accumulation, nearest-neighbour scans). Two implementations exist:
// a scalar reference and an AVX2 variant, selected once at startup.
//
// Both variants follow the same numeric contract so results are bit-identical
// regardless of the selected backend:
//   * every multiply-add is a fused std::fma / vfmadd,
//   * cross-element reductions use four strided partial accumulators
//     (element i goes to accumulator i % 4) combined as (p0+p2) + (p1+p3).
// Row-parallel operations carry no reduction at all and are trivially exact.
struct Ops {
    // out[r] = sum_j w[j] * cols[j*rows + r]   (row-parallel, rows per column
    // contiguous; `cols` is a dim x rows column-major matrix)
    void (*matvec_cols)(const double* cols, std::size_t rows, std::size_t dim,
                        const double* w, double* out);
    // out[j] += sum_r s[r] * cols[j*rows + r]  (4-lane strided reduction per j)
    void (*weighted_sum_cols)(const double* cols, std::size_t rows, std::size_t dim,
                              const double* s, double* out);
    // y[r] += a * x[r]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // sum_i x[i]            (4-lane strided reduction)
    double (*sum)(const double* x, std::size_t n);
    // sum_i x[i] * y[i]     (4-lane strided reduction)
    double (*dot)(const double* x, const double* y, std::size_t n);
    // min_r sum_j (cols[j*rows + r] - q[j])^2
    double (*min_sqdist_cols)(const double* cols, std::size_t rows, std::size_t dim,
                              const double* q);
};

extern const Ops scalar_ops;
#ifdef DSDE_HAVE_AVX2
extern const Ops avx2_ops;
#endif

// Active backend. Chosen from CPU features at first use; the DSDE_KERNEL
// environment variable ("scalar" or "avx2") overrides.
const Ops& active();
std::string backend_name();
void force_backend(const std::string& name);  // for tests; throws on unknown

}  // namespace dsde::kernels
