#pragma once

#include <optional>
#include <vector>

#include "dsde/windows.hpp"

namespace dsde {

// The model: drift nets f (one per coordinate), aleatoric diffusion nets g_a
// (one per coordinate, raw output h with std |h|*sqrt(dt) and variance
// h^2*dt), and a single shared OOD classifier whose raw output is squashed by
// a logistic so the probability always lands in [0,1]. The epistemic std is
// sigma_e * probability. All nets see normalized inputs [t, window].
struct DelaySdeNet {
    int dim = 0;
    int lags = 0;       // p
    double dt = 1.0;
    int horizon = 1;    // N the drift was trained for
    std::vector<TwoLayerNet> drift;
    std::vector<TwoLayerNet> aleatoric;
    TwoLayerNet epistemic;
    double sigma_e = 0.0;
    InputNormalization norm;

    int input_dim() const { return 1 + dim * lags; }

    double drift_value(int j, double t, std::span<const double> window) const;
    // squared per-step diffusion outputs g_a^2 (variance per step is g_a^2*dt)
    void aleatoric_sq(double t, std::span<const double> window, std::span<double> out) const;
    double epistemic_prob(double t, std::span<const double> window) const;

    std::string to_json() const;
    static DelaySdeNet from_json(const std::string& text);
};

struct ModelConfig {
    int width = 32;
    Activation drift_act{Activation::Kind::Tanh, 1.0};
    Activation aleatoric_act{Activation::Kind::Sigmoid, 1.0};
    Activation epistemic_act{Activation::Kind::Relu, 1.0};  // grows with distance, so the
                                                            // classifier extrapolates outward
    bool output_bias = true;
};

// Untrained model with seeded initialization and normalization fitted on the
// training windows.
DelaySdeNet init_model(const WindowSet& train, int N, const ModelConfig& cfg,
                       std::uint64_t seed);

using TrainLog = std::vector<double>;  // loss per iteration

// N-step rollout fit of the drift nets: predictions re-enter the lag window
// as the horizon exceeds history and gradients flow through the whole
// rollout. When a validation set is given, the parameters with the best
// validation rollout loss (checked every check_every iterations) win.
// Throws Divergence if the loss stops being finite.
void train_drift(DelaySdeNet& model, const WindowSet& train, const SgdConfig& cfg,
                 std::uint64_t seed, TrainLog* log = nullptr,
                 const WindowSet* validation = nullptr, long check_every = 10);

// e_{t_{k+N}} = xhat - x from the final optimized drift nets; rows x dim.
std::vector<double> residuals(const DelaySdeNet& model, const WindowSet& windows);

// Fits g_a on squared residuals: N=1 minimizes ||g^2 dt - e^2||, N>1 uses the
// accumulated variance V = sum_i g^2(t_{k+i}, window) with the observed
// window held fixed.
void train_aleatoric(DelaySdeNet& model, const WindowSet& train,
                     const std::vector<double>& resid, const SgdConfig& cfg,
                     std::uint64_t seed, TrainLog* log = nullptr,
                     const WindowSet* validation = nullptr,
                     const std::vector<double>* val_resid = nullptr, long check_every = 10);

// Classifier loss: mean prob on ID minus mean prob on OOD.
void train_epistemic(DelaySdeNet& model, const WindowSet& id_windows,
                     const WindowSet& ood_windows, const SgdConfig& cfg, std::uint64_t seed,
                     TrainLog* log = nullptr);

// sigma_e = argmin mean ||(sigma*prob + aleatoric_std)^2 - e^2||^2 over the
// validation windows; coarse grid on [0, 3*max|e|] refined by golden section
// to 1e-4 relative. Returns 0 whenever it ties with the best (dead
// classifier, perfect aleatoric fit).
double tune_sigma_e(DelaySdeNet& model, const WindowSet& validation);

struct PredictionBundle {
    int dim = 0;
    int steps = 0;
    std::vector<double> mean;           // steps x dim
    std::vector<double> aleatoric_var;  // steps x dim, cumulative V*dt
    double epistemic_prob = 0.0;
    double epistemic_std = 0.0;         // sigma_e * prob
    std::vector<double> total_std;      // steps x dim
    std::vector<double> ci_lo, ci_hi;   // steps x dim at the requested level
    double ci_level = 0.95;
};

// history: at least p points (lag-major, newest last) ending at time t_k.
PredictionBundle predict(const DelaySdeNet& model, double t_k,
                         std::span<const double> history, int N, double ci_level = 0.95);

double normal_quantile(double q);

// ---------------------------------------------------------------- error bound
struct BoundConstants {
    double T = 1.0;
    double p = 1.0;
    double m = 1.0;
    double C_L = 0.0;
    double C_B = 0.0;
    double eps_F = 0.0;
    double C_ge = 0.0;
    double C_f = 0.0;
    double C_g = 0.0;
    double C_sigma = 0.0;
    double gamma = 1.0;  // Hoelder exponent of the initial path
    double C_T = 1.0;
};

struct BoundResult {
    double c_m = 0.0;
    double total = 0.0;
};

// c_m = sqrt(4T (C_ge + 2 C_B eps_F + (3 C_sigma / m)(2 C_g + T C_f))
//            * exp(2 p C_L (4 + 2T) T))
// total = sqrt(C_T) * dt^gamma + c_m
BoundResult theoretical_bound(const BoundConstants& c, double dt);

// Samples C_L (max difference quotient of the generating coefficients) and
// C_B (max squared coefficient gap between model and generator) over the
// bounding box of the given windows. C_f, C_g come from squared path norms,
// C_ge = sigma_e^2, eps_F = 0 (bounded domain). Only feeds reporting.
BoundConstants estimate_bound_constants(const SddeSpec& truth, const DelaySdeNet& model,
                                        const WindowSet& data, std::uint64_t seed,
                                        std::size_t samples = 100000);

}  // namespace dsde
