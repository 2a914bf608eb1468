#pragma once

#include <functional>
#include <vector>

#include "dsde/brownian.hpp"
#include "dsde/grid.hpp"
#include "dsde/net.hpp"

namespace dsde {

// Net input layout shared by the generating system and the fitted model:
// [ t, X(u_1), X(u_2), ..., X(u_p) ] with each X(u) a d-vector, i.e. the
// time feature followed by the flattened lag-major projection (oldest lag
// first, most recent last); input_dim = 1 + dim*p.
void assemble_input(double t, std::span<const double> window, int dim, int p,
                    std::span<double> out);

// Coefficients of the data-generating system: one drift net and one diffusion
// net per coordinate (independent driving noise per coordinate). Diffusion is
// state-independent; it sees either the frozen initial-segment window or no
// state at all (time only, lag inputs zero).
enum class DiffusionInput { InitialWindow, None };

struct SddeSpec {
    int dim = 0;
    int lags = 0;
    std::vector<TwoLayerNet> drift;      // dim nets, input 1 + dim*lags
    std::vector<TwoLayerNet> diffusion;  // dim nets, input 1 + dim*lags
    DiffusionInput diffusion_input = DiffusionInput::InitialWindow;

    double drift_value(int j, std::span<const double> input) const {
        return drift[j].forward(input);
    }
    double diffusion_value(int j, std::span<const double> input) const {
        return diffusion[j].forward(input);
    }

    std::string to_json() const;
    static SddeSpec from_json(const std::string& text);
};

// The two-dimensional benchmark system used by the simulation experiments:
// tanh drift nets of width 2 (outer weights 5), sigmoid diffusion nets of
// width 1 with a slow seasonal decay on the first coordinate.
SddeSpec benchmark_sdde();

struct PathSet {
    TimeGrid grid;
    int dim = 0;
    std::vector<Path> paths;
    // per-path driving increments, retained so predictions can reuse the
    // exact Brownian path that generated the data
    std::vector<BrownianIncrements> increments;
};

// Fills the initial segment (grid points -L..0, lag-major into values).
using EtaGenerator =
    std::function<void(Rng&, const TimeGrid&, int dim, std::vector<double>& values)>;

EtaGenerator eta_constant(std::vector<double> point);
// [sin(z1 t), cos(z2 t)] with z1, z2 ~ N(0,1) redrawn per path; dim must be 2
EtaGenerator eta_sin_cos();

// Euler forward recursion
//   X^j(t_{k+1}) = X^j(t_k) + f^j(t_k, window(t_{k-p}..t_{k-1})) dt
//                + scale * g^j(t_k, frozen eta window) dW^j_{k+1}
// Each path draws its initial segment from stream (seed, 2i) and its
// increments from stream (seed, 2i+1), so paths are independent and the set
// is reproducible from (spec, grid, n, seed) alone. Throws NumericalBlowup
// if any |X| exceeds blowup_cap.
PathSet simulate_paths(const SddeSpec& spec, const EtaGenerator& eta, const TimeGrid& grid,
                       std::size_t n, std::uint64_t seed, double diffusion_scale = 1.0,
                       double blowup_cap = 1e12);

// Same dynamics with diffusion outputs scaled by factor > 0 (drift unchanged).
PathSet amplified_diffusion_paths(const SddeSpec& spec, double factor, const EtaGenerator& eta,
                                  const TimeGrid& grid, std::size_t n, std::uint64_t seed);

}  // namespace dsde
