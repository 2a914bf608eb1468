#include "dsde/net.hpp"

#include <cmath>

#include "dsde/kernels.hpp"
#include "net_json.hpp"

namespace dsde {

double TwoLayerNet::forward(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_dim)
        throw DimensionMismatch("forward: got input of size " + std::to_string(x.size()) +
                                ", net expects " + std::to_string(input_dim));
    double y = has_output_bias ? output_bias : 0.0;
    for (int i = 0; i < width; ++i) {
        const double* wi = w.data() + static_cast<std::size_t>(i) * input_dim;
        double z = b[i];
        for (int j = 0; j < input_dim; ++j) z = std::fma(wi[j], x[j], z);
        y = std::fma(a[i], act.value(z), y);
    }
    return y;
}

TwoLayerNet make_net(int width, int input_dim, Activation act, bool output_bias, Rng& rng) {
    TwoLayerNet net;
    net.width = width;
    net.input_dim = input_dim;
    net.act = act;
    net.has_output_bias = output_bias;
    net.a.resize(width);
    net.b.resize(width);
    net.w.resize(static_cast<std::size_t>(width) * input_dim);
    const double in_scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
    const double out_scale = 1.0 / std::sqrt(static_cast<double>(width));
    auto unit = [&rng](double scale) { return scale * (2.0 * rng.uniform() - 1.0); };
    for (int i = 0; i < width; ++i) {
        for (int j = 0; j < input_dim; ++j)
            net.w[static_cast<std::size_t>(i) * input_dim + j] = unit(in_scale);
        net.b[i] = unit(in_scale);
    }
    for (int i = 0; i < width; ++i) net.a[i] = unit(out_scale);
    net.output_bias = output_bias ? unit(out_scale) : 0.0;
    return net;
}

double path_norm(const TwoLayerNet& net) {
    double total = 0.0;
    for (int i = 0; i < net.width; ++i) {
        double l1 = 0.0;
        for (double wj : net.weights(i)) l1 += std::abs(wj);
        total += std::abs(net.a[i]) * (l1 + std::abs(net.b[i]) + 1.0);
    }
    return total;
}

void NetGrad::resize_like(const TwoLayerNet& net) {
    a.assign(net.a.size(), 0.0);
    w.assign(net.w.size(), 0.0);
    b.assign(net.b.size(), 0.0);
    output_bias = 0.0;
}

void NetGrad::clear() {
    std::fill(a.begin(), a.end(), 0.0);
    std::fill(w.begin(), w.end(), 0.0);
    std::fill(b.begin(), b.end(), 0.0);
    output_bias = 0.0;
}

void NetGrad::add(const NetGrad& other) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += other.a[i];
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += other.w[i];
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += other.b[i];
    output_bias += other.output_bias;
}

namespace {

// sigma'(z) recovered from s = sigma(z); valid for all supported activations
inline double deriv_from_value(const Activation& act, double s) {
    switch (act.kind) {
        case Activation::Kind::Tanh: return act.param * (1.0 - s * s);
        case Activation::Kind::Sigmoid: return act.param * s * (1.0 - s);
        case Activation::Kind::Relu: return s > 0.0 ? 1.0 : 0.0;
    }
    return 0.0;
}

}  // namespace

void forward_batch(const TwoLayerNet& net, const double* cols, std::size_t rows, double* y,
                   double* s) {
    const auto& k = kernels::active();
    const double c = net.has_output_bias ? net.output_bias : 0.0;
    for (std::size_t r = 0; r < rows; ++r) y[r] = c;
    for (int i = 0; i < net.width; ++i) {
        double* si = s + static_cast<std::size_t>(i) * rows;
        k.matvec_cols(cols, rows, net.input_dim, net.w.data() + static_cast<std::size_t>(i) * net.input_dim, si);
        const double bi = net.b[i];
        for (std::size_t r = 0; r < rows; ++r) si[r] = net.act.value(si[r] + bi);
        k.axpy(net.a[i], si, y, rows);
    }
}

void backward_batch(const TwoLayerNet& net, const double* cols, std::size_t rows,
                    const double* s, const double* delta, NetGrad& grad, double* x_adj) {
    const auto& k = kernels::active();
    std::vector<double> u(rows);
    for (int i = 0; i < net.width; ++i) {
        const double* si = s + static_cast<std::size_t>(i) * rows;
        grad.a[i] += k.dot(delta, si, rows);
        const double ai = net.a[i];
        for (std::size_t r = 0; r < rows; ++r)
            u[r] = delta[r] * ai * deriv_from_value(net.act, si[r]);
        grad.b[i] += k.sum(u.data(), rows);
        k.weighted_sum_cols(cols, rows, net.input_dim, u.data(),
                            grad.w.data() + static_cast<std::size_t>(i) * net.input_dim);
        if (x_adj) {
            const double* wi = net.w.data() + static_cast<std::size_t>(i) * net.input_dim;
            for (int j = 0; j < net.input_dim; ++j)
                k.axpy(wi[j], u.data(), x_adj + static_cast<std::size_t>(j) * rows, rows);
        }
    }
    if (net.has_output_bias) grad.output_bias += k.sum(delta, rows);
}

double mse_gradient(const TwoLayerNet& net, const double* cols, std::size_t rows,
                    const double* targets, NetGrad& grad) {
    std::vector<double> y(rows), s(static_cast<std::size_t>(net.width) * rows);
    forward_batch(net, cols, rows, y.data(), s.data());
    std::vector<double> delta(rows);
    const double inv = 1.0 / static_cast<double>(rows);
    double loss = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double res = y[r] - targets[r];
        loss += res * res;
        delta[r] = 2.0 * res * inv;
    }
    backward_batch(net, cols, rows, s.data(), delta.data(), grad, nullptr);
    return loss * inv;
}

void sgd_step(TwoLayerNet& net, const NetGrad& grad, const SgdConfig& cfg, SgdState& state) {
    if (state.velocity.a.size() != net.a.size()) state.velocity.resize_like(net);
    auto& v = state.velocity;
    const double mu = cfg.momentum, wd = cfg.weight_decay, lr = cfg.learning_rate;
    for (std::size_t i = 0; i < net.a.size(); ++i) {
        v.a[i] = mu * v.a[i] + grad.a[i] + wd * net.a[i];
        net.a[i] -= lr * v.a[i];
    }
    for (std::size_t i = 0; i < net.w.size(); ++i) {
        v.w[i] = mu * v.w[i] + grad.w[i] + wd * net.w[i];
        net.w[i] -= lr * v.w[i];
    }
    for (std::size_t i = 0; i < net.b.size(); ++i) {
        v.b[i] = mu * v.b[i] + grad.b[i] + wd * net.b[i];
        net.b[i] -= lr * v.b[i];
    }
    if (net.has_output_bias) {
        v.output_bias = mu * v.output_bias + grad.output_bias + wd * net.output_bias;
        net.output_bias -= lr * v.output_bias;
    }
}

nlohmann::json net_to_json(const TwoLayerNet& net) {
    nlohmann::json j;
    j["width"] = net.width;
    j["input_dim"] = net.input_dim;
    j["activation"] = {{"kind", net.act.name()}, {"param", net.act.param}};
    j["a"] = net.a;
    auto rows = nlohmann::json::array();
    for (int i = 0; i < net.width; ++i) {
        const auto wi = net.weights(i);
        rows.push_back(std::vector<double>(wi.begin(), wi.end()));
    }
    j["w"] = std::move(rows);
    j["b"] = net.b;
    if (net.has_output_bias) j["output_bias"] = net.output_bias;
    return j;
}

TwoLayerNet net_from_json(const nlohmann::json& j) {
    TwoLayerNet net;
    net.width = j.at("width").get<int>();
    net.input_dim = j.at("input_dim").get<int>();
    net.act = Activation::parse(j.at("activation").at("kind").get<std::string>(),
                                j.at("activation").at("param").get<double>());
    net.a = j.at("a").get<std::vector<double>>();
    net.b = j.at("b").get<std::vector<double>>();
    net.w.reserve(static_cast<std::size_t>(net.width) * net.input_dim);
    for (const auto& row : j.at("w")) {
        const auto vals = row.get<std::vector<double>>();
        if (static_cast<int>(vals.size()) != net.input_dim)
            throw DimensionMismatch("net json: weight row length mismatch");
        net.w.insert(net.w.end(), vals.begin(), vals.end());
    }
    if (j.contains("output_bias")) {
        net.has_output_bias = true;
        net.output_bias = j.at("output_bias").get<double>();
    }
    if (static_cast<int>(net.a.size()) != net.width || static_cast<int>(net.b.size()) != net.width ||
        net.w.size() != static_cast<std::size_t>(net.width) * net.input_dim)
        throw DimensionMismatch("net json: parameter counts inconsistent with width");
    return net;
}

std::string TwoLayerNet::to_json() const { return net_to_json(*this).dump(2); }

TwoLayerNet TwoLayerNet::from_json(const std::string& text) {
    return net_from_json(nlohmann::json::parse(text));
}

}  // namespace dsde
