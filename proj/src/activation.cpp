#include "dsde/activation.hpp"

#include <cmath>
#include <functional>

namespace dsde {

double Activation::value(double z) const {
    switch (kind) {
        case Kind::Tanh: return std::tanh(param * z);
        case Kind::Sigmoid: return 1.0 / (1.0 + std::exp(-param * z));
        case Kind::Relu: return z > 0.0 ? z : 0.0;
    }
    return 0.0;
}

double Activation::deriv(double z) const {
    switch (kind) {
        case Kind::Tanh: {
            const double t = std::tanh(param * z);
            return param * (1.0 - t * t);
        }
        case Kind::Sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-param * z));
            return param * s * (1.0 - s);
        }
        case Kind::Relu: return z > 0.0 ? 1.0 : 0.0;
    }
    return 0.0;
}

double Activation::second_deriv(double z) const {
    switch (kind) {
        case Kind::Tanh: {
            const double t = std::tanh(param * z);
            return -2.0 * param * param * t * (1.0 - t * t);
        }
        case Kind::Sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-param * z));
            return param * param * s * (1.0 - s) * (1.0 - 2.0 * s);
        }
        case Kind::Relu: return 0.0;
    }
    return 0.0;
}

std::string Activation::name() const {
    switch (kind) {
        case Kind::Tanh: return "tanh";
        case Kind::Sigmoid: return "sigmoid";
        case Kind::Relu: return "relu";
    }
    return "?";
}

Activation Activation::parse(const std::string& name, double param) {
    Activation a;
    a.param = param;
    if (name == "tanh") a.kind = Kind::Tanh;
    else if (name == "sigmoid") a.kind = Kind::Sigmoid;
    else if (name == "relu") a.kind = Kind::Relu;
    else throw ConfigError("unknown activation: " + name);
    if (a.kind != Kind::Relu && !(param > 0.0))
        throw ConfigError("activation parameter must be positive");
    return a;
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    if (depth > 60) throw QuadratureFailure("adaptive Simpson recursion limit reached");
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 0);
}

// bound on int_B^inf |sigma''(x)| (x+1) dx for the smooth activations
double tail_bound(const Activation& act, double b) {
    const double p = act.param;
    switch (act.kind) {
        case Activation::Kind::Tanh: {
            // |sigma''| <= 8 p^2 exp(-2p|x|)
            const double c = 2.0 * p;
            return 8.0 * p * p * std::exp(-c * b) * ((b + 1.0) / c + 1.0 / (c * c));
        }
        case Activation::Kind::Sigmoid: {
            // |sigma''| <= p^2 exp(-p|x|)
            return p * p * std::exp(-p * b) * ((b + 1.0) / p + 1.0 / (p * p));
        }
        case Activation::Kind::Relu: return 0.0;
    }
    return 0.0;
}

double infimum_of_u(const Activation& act) {
    auto u = [&](double x) {
        return std::abs(act.value(x)) + (std::abs(x) + 2.0) * std::abs(act.deriv(x));
    };
    // coarse scan, symmetric and wide enough to capture the x -> +-inf limits
    double best_x = 0.0, best = u(0.0);
    for (double mag = 1e-3; mag <= 4096.0; mag *= 1.25) {
        for (double x : {mag, -mag}) {
            const double v = u(x);
            if (v < best) {
                best = v;
                best_x = x;
            }
        }
    }
    // golden-section refinement around the best sample
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = best_x - std::max(1.0, std::abs(best_x)) * 0.5;
    double hi = best_x + std::max(1.0, std::abs(best_x)) * 0.5;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = u(x1), f2 = u(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(best_x)); ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = u(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = u(x2);
        }
    }
    return std::min(best, std::min(f1, f2));
}

}  // namespace

ActivationConstants activation_constant(const Activation& act) {
    ActivationConstants out;

    if (act.kind == Activation::Kind::Relu) {
        // sigma'' is a unit point mass at 0, so gamma0 = (|0|+1) * 1 = 1
        out.gamma0 = 1.0;
    } else {
        double b = 8.0 / act.param;
        while (tail_bound(act, b) > 1e-10) b *= 2.0;
        auto integrand = [&](double x) {
            return std::abs(act.second_deriv(x)) * (std::abs(x) + 1.0);
        };
        out.gamma0 = integrate(integrand, -b, 0.0, 5e-12) + integrate(integrand, 0.0, b, 5e-12);
    }

    out.inf_u = infimum_of_u(act);
    out.gamma = out.gamma0 + out.inf_u;

    double dpos, dneg;
    switch (act.kind) {
        case Activation::Kind::Relu:
            dpos = 1.0;
            dneg = 0.0;
            break;
        default:
            dpos = dneg = 0.0;  // both smooth activations flatten out
            break;
    }
    const double base = out.gamma + std::min(std::abs(dpos), std::abs(dneg)) +
                        std::abs(act.value(0.0));
    out.c_sigma = base * base;
    return out;
}

}  // namespace dsde
