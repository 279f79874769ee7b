#pragma once

// Complex scalar helpers: the 3-multiplication product used by the FLOP
// model, the split-complex ReLU, and a plain Adam optimizer over real views
// of complex parameters.

#include <sic/errors.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace sic {

using Cx = std::complex<double>;

/// Complex parameters flattened as consecutive (re, im) real pairs.
using ParamVector = std::vector<double>;
using ParamView = std::span<double>;
using ConstParamView = std::span<const double>;

/// (a+jb)(c+jd) with three real multiplications and five real additions.
inline Cx cx_mul_reduced(Cx x, Cx y) noexcept {
    const double a = x.real(), b = x.imag(), c = y.real(), d = y.imag();
    const double k1 = c * (a + b);
    const double k2 = a * (d - c);
    const double k3 = b * (c + d);
    return {k1 - k3, k1 + k2};
}

inline Cx crelu(Cx z) noexcept {
    return {z.real() > 0.0 ? z.real() : 0.0, z.imag() > 0.0 ? z.imag() : 0.0};
}

struct CreluGrad {
    double re;
    double im;
};

/// Subgradient at exactly zero is 0.
inline CreluGrad crelu_grad(Cx z) noexcept {
    return {z.real() > 0.0 ? 1.0 : 0.0, z.imag() > 0.0 ? 1.0 : 0.0};
}

inline bool is_finite(Cx z) noexcept { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long t = 0;

    AdamState() = default;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

inline void adam_step(ParamView params, ConstParamView grads, AdamState& state, const AdamConfig& cfg) {
    if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size())
        throw ContractError("adam_step: length mismatch (params " + std::to_string(params.size()) + ", grads " +
                            std::to_string(grads.size()) + ", state " + std::to_string(state.m.size()) + ")");
    if (!(cfg.lr > 0.0)) throw ContractError("adam_step: learning rate must be positive");

    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

/// Central-difference gradient of a scalar loss, one coordinate at a time.
inline ParamVector finite_diff_grad(const std::function<double(ConstParamView)>& loss, ConstParamView params,
                                    double h) {
    if (!(h > 0.0)) throw ContractError("finite_diff_grad: step must be positive");
    ParamVector probe(params.begin(), params.end());
    ParamVector grad(params.size(), 0.0);
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + h;
        const double up = loss(probe);
        probe[i] = saved - h;
        const double down = loss(probe);
        probe[i] = saved;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

} // namespace sic
