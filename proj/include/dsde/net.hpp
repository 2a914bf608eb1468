#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dsde/activation.hpp"
#include "dsde/rng.hpp"

namespace dsde {

// Width-m two-layer network  y(x) = sum_i a_i * sigma(w_i.x + b_i) [+ c].
// Weights are stored neuron-major (w_i is a contiguous row of input_dim).
struct TwoLayerNet {
    int width = 0;
    int input_dim = 0;
    Activation act;
    std::vector<double> a;
    std::vector<double> w;
    std::vector<double> b;
    bool has_output_bias = false;
    double output_bias = 0.0;

    double forward(std::span<const double> x) const;

    std::span<const double> weights(int i) const {
        return {w.data() + static_cast<std::size_t>(i) * input_dim,
                static_cast<std::size_t>(input_dim)};
    }

    std::string to_json() const;
    static TwoLayerNet from_json(const std::string& text);
};

// Fan-in uniform initialization: w, b ~ U(-1/sqrt(input_dim), 1/sqrt(input_dim)),
// a (and the output bias) ~ U(-1/sqrt(width), 1/sqrt(width)). Draw order is
// fixed (per neuron w then b, then all a, then the bias) so a seed pins the net.
TwoLayerNet make_net(int width, int input_dim, Activation act, bool output_bias, Rng& rng);

// sum_i |a_i| (||w_i||_1 + |b_i| + 1); an upper bound on the Barron norm of
// the represented function.
double path_norm(const TwoLayerNet& net);

struct NetGrad {
    std::vector<double> a, w, b;
    double output_bias = 0.0;

    void resize_like(const TwoLayerNet& net);
    void clear();
    void add(const NetGrad& other);  // fixed-order accumulation
};

// Batched evaluation over a column-major input block cols[j*rows + r].
// Writes y[r] and the activation values s[i*rows + r] needed by the backward
// pass (sigma' is recovered from sigma for all supported activations).
void forward_batch(const TwoLayerNet& net, const double* cols, std::size_t rows, double* y,
                   double* s);

// Accumulates d(sum_r delta[r] * y_r)/dtheta into grad. When x_adj is non-null
// (dim x rows, column-major) also accumulates the input adjoints, which is how
// outer losses are chained through rollouts and squared outputs.
void backward_batch(const TwoLayerNet& net, const double* cols, std::size_t rows,
                    const double* s, const double* delta, NetGrad& grad, double* x_adj);

// Mean-squared-error convenience wrapper: loss = (1/n) sum_r (y_r - target_r)^2.
// Returns the loss; gradient of the mean loss is accumulated into grad.
double mse_gradient(const TwoLayerNet& net, const double* cols, std::size_t rows,
                    const double* targets, NetGrad& grad);

struct SgdConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    double weight_decay = 0.0;
    long iterations = 100;
    long minibatch = 0;  // 0 = full batch
};

struct SgdState {
    NetGrad velocity;
};

// Classical SGD with momentum and coupled weight decay:
//   v <- momentum*v + g + weight_decay*theta;  theta <- theta - lr*v
void sgd_step(TwoLayerNet& net, const NetGrad& grad, const SgdConfig& cfg, SgdState& state);

}  // namespace dsde
