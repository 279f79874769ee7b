#pragma once

// Sparse single-hidden-layer complex networks.
//
// A GridLayout lists, for every hidden neuron, the tap delays it reads from
// the input buffer x(n), x(n-1), ..., x(n-M+1). The dense CV-FFNN, the
// ladder (LWGS) and the moving-window (MWGS) structures differ only in this
// mask. Hidden neurons use the split-complex ReLU; the output neuron is
// linear and reads every hidden neuron.

#include <sic/cxnum.hpp>
#include <sic/errors.hpp>
#include <sic/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace sic {

enum class GridKind { ffnn, lwgs, mwgs };

inline const char* to_string(GridKind k) {
    switch (k) {
    case GridKind::ffnn: return "ffnn";
    case GridKind::lwgs: return "lwgs";
    case GridKind::mwgs: return "mwgs";
    }
    return "?";
}

struct GridLayout {
    GridKind kind = GridKind::ffnn;
    int M = 1;
    int N = 1;
    int W = 0; // window width, mwgs only
    /// fanin[j] = ascending tap delays read by hidden neuron j (0-based).
    std::vector<std::vector<int>> fanin;

    std::size_t hidden_connections() const {
        std::size_t c = 0;
        for (const auto& f : fanin) c += f.size();
        return c;
    }
    /// Complex multiplications per output sample: hidden connections plus the N output weights.
    std::size_t total_connections() const { return hidden_connections() + static_cast<std::size_t>(N); }
    std::size_t complex_param_count() const { return hidden_connections() + 2 * static_cast<std::size_t>(N) + 1; }
    std::size_t real_param_count() const { return 2 * complex_param_count(); }

    bool operator==(const GridLayout&) const = default;
};

inline void check_layout(const GridLayout& L) {
    if (L.M < 1 || L.N < 1 || static_cast<int>(L.fanin.size()) != L.N) throw ConfigError("malformed grid layout");
    for (const auto& f : L.fanin) {
        if (f.empty()) throw ConfigError("grid layout: hidden neuron without inputs");
        for (std::size_t k = 0; k < f.size(); ++k) {
            if (f[k] < 0 || f[k] >= L.M) throw ConfigError("grid layout: delay out of range");
            if (k > 0 && f[k] <= f[k - 1]) throw ConfigError("grid layout: delays must be strictly ascending");
        }
    }
}

namespace detail {
inline std::vector<int> delay_range(int first, int count) {
    std::vector<int> d(static_cast<std::size_t>(count));
    std::iota(d.begin(), d.end(), first);
    return d;
}
} // namespace detail

/// Ladder: neurons 1..N-1 read the j most recent taps, neuron N reads the whole buffer.
inline GridLayout build_lwgs_layout(int N, int M) {
    if (M < 1) throw ConfigError("lwgs: memory M must be >= 1");
    if (N < 1 || N > M)
        throw ConfigError("lwgs: need 1 <= N <= M, got N=" + std::to_string(N) + ", M=" + std::to_string(M));
    GridLayout L{GridKind::lwgs, M, N, 0, {}};
    for (int j = 1; j < N; ++j) L.fanin.push_back(detail::delay_range(0, j));
    L.fanin.push_back(detail::delay_range(0, M));
    return L;
}

/// Moving window: neuron 1 reads the whole buffer, neuron k >= 2 reads W
/// consecutive taps starting at min(k-1, M-W).
inline GridLayout build_mwgs_layout(int N, int W, int M) {
    if (M < 1) throw ConfigError("mwgs: memory M must be >= 1");
    if (N < 1) throw ConfigError("mwgs: N must be >= 1");
    if (N >= 2 && (W < 1 || W > M - 1))
        throw ConfigError("mwgs: need 1 <= W <= M-1 when N >= 2, got W=" + std::to_string(W) +
                          ", M=" + std::to_string(M));
    GridLayout L{GridKind::mwgs, M, N, W, {}};
    L.fanin.push_back(detail::delay_range(0, M));
    for (int k = 2; k <= N; ++k) L.fanin.push_back(detail::delay_range(std::min(k - 1, M - W), W));
    return L;
}

inline GridLayout build_ffnn_layout(int N, int M) {
    if (M < 1 || N < 1) throw ConfigError("ffnn: need N >= 1 and M >= 1");
    GridLayout L{GridKind::ffnn, M, N, 0, {}};
    L.fanin.assign(static_cast<std::size_t>(N), detail::delay_range(0, M));
    return L;
}

inline GridLayout build_layout(GridKind kind, int N, int M, int W = 0) {
    switch (kind) {
    case GridKind::ffnn: return build_ffnn_layout(N, M);
    case GridKind::lwgs: return build_lwgs_layout(N, M);
    case GridKind::mwgs: return build_mwgs_layout(N, W, M);
    }
    throw ConfigError("unknown grid kind");
}

struct GridParams {
    std::vector<std::vector<Cx>> hidden_w;
    std::vector<Cx> hidden_b;
    std::vector<Cx> out_w;
    Cx out_b{};

    bool operator==(const GridParams&) const = default;
};

inline GridParams zero_params(const GridLayout& L) {
    GridParams p;
    for (const auto& f : L.fanin) p.hidden_w.emplace_back(f.size());
    p.hidden_b.assign(static_cast<std::size_t>(L.N), Cx{});
    p.out_w.assign(static_cast<std::size_t>(L.N), Cx{});
    return p;
}

inline bool matches(const GridLayout& L, const GridParams& p) {
    if (p.hidden_w.size() != L.fanin.size() || p.hidden_b.size() != L.fanin.size() || p.out_w.size() != L.fanin.size())
        return false;
    for (std::size_t j = 0; j < L.fanin.size(); ++j)
        if (p.hidden_w[j].size() != L.fanin[j].size()) return false;
    return true;
}

// Flat real view ordering: hidden weights (neuron-major, ascending delay),
// hidden biases, output weights, output bias; each complex value as (re, im).

inline ParamVector pack(const GridParams& p) {
    ParamVector v;
    auto put = [&v](Cx c) {
        v.push_back(c.real());
        v.push_back(c.imag());
    };
    for (const auto& row : p.hidden_w)
        for (auto c : row) put(c);
    for (auto c : p.hidden_b) put(c);
    for (auto c : p.out_w) put(c);
    put(p.out_b);
    return v;
}

inline GridParams unpack(const GridLayout& L, ConstParamView v) {
    if (v.size() != L.real_param_count())
        throw ContractError("unpack: expected " + std::to_string(L.real_param_count()) + " reals, got " +
                            std::to_string(v.size()));
    GridParams p = zero_params(L);
    std::size_t i = 0;
    auto take = [&]() {
        const Cx c{v[i], v[i + 1]};
        i += 2;
        return c;
    };
    for (auto& row : p.hidden_w)
        for (auto& c : row) c = take();
    for (auto& c : p.hidden_b) c = take();
    for (auto& c : p.out_w) c = take();
    p.out_b = take();
    return p;
}

/// Glorot-style: re and im uniform in +-sqrt(3 / (fan_in + fan_out)) per layer; biases zero.
inline GridParams glorot_init(const GridLayout& L, Rng& rng) {
    GridParams p = zero_params(L);
    const double hidden_lim = std::sqrt(3.0 / (L.M + L.N));
    const double out_lim = std::sqrt(3.0 / (L.N + 1));
    for (auto& row : p.hidden_w)
        for (auto& c : row) {
            const double re = rng.uniform(-hidden_lim, hidden_lim);
            const double im = rng.uniform(-hidden_lim, hidden_lim);
            c = Cx{re, im};
        }
    for (auto& c : p.out_w) {
        const double re = rng.uniform(-out_lim, out_lim);
        const double im = rng.uniform(-out_lim, out_lim);
        c = Cx{re, im};
    }
    return p;
}

/// Hidden pre-activations and activations of one forward pass.
struct ForwardCache {
    std::vector<Cx> pre;
    std::vector<Cx> act;
    Cx out{};
};

/// x_window[d] = x(n - d) for d in [0, M).
inline Cx nn_forward(const GridLayout& L, const GridParams& p, std::span<const Cx> x_window, ForwardCache& cache) {
    cache.pre.resize(L.fanin.size());
    cache.act.resize(L.fanin.size());
    Cx out = p.out_b;
    for (std::size_t j = 0; j < L.fanin.size(); ++j) {
        const auto& taps = L.fanin[j];
        const auto& w = p.hidden_w[j];
        Cx z = p.hidden_b[j];
        for (std::size_t k = 0; k < taps.size(); ++k) z += w[k] * x_window[static_cast<std::size_t>(taps[k])];
        cache.pre[j] = z;
        cache.act[j] = crelu(z);
        out += p.out_w[j] * cache.act[j];
    }
    cache.out = out;
    return out;
}

inline Cx nn_forward(const GridLayout& L, const GridParams& p, std::span<const Cx> x_window) {
    ForwardCache cache;
    return nn_forward(L, p, x_window, cache);
}

/// Adds scale * d(0.5 |y_hat - target|^2)/d(theta) into grad for every real
/// parameter component, given error = y_hat - target and the forward cache.
///
/// For a complex parameter c entering y_hat as c*u, the split-real gradient
/// (dL/dRe c, dL/dIm c) is (Re, Im) of error * conj(u).
inline void nn_backward_accumulate(const GridLayout& L, const GridParams& p, std::span<const Cx> x_window,
                                   const ForwardCache& cache, Cx error, ParamView grad, double scale = 1.0) {
    const std::size_t H = L.hidden_connections();
    const std::size_t N = L.fanin.size();
    const std::size_t b_off = 2 * H;
    const std::size_t ow_off = b_off + 2 * N;
    const std::size_t ob_off = ow_off + 2 * N;
    const Cx e = scale * error;

    grad[ob_off] += e.real();
    grad[ob_off + 1] += e.imag();

    std::size_t w_off = 0;
    for (std::size_t j = 0; j < N; ++j) {
        const Cx gow = e * std::conj(cache.act[j]);
        grad[ow_off + 2 * j] += gow.real();
        grad[ow_off + 2 * j + 1] += gow.imag();

        const Cx dact = e * std::conj(p.out_w[j]);
        const auto mask = crelu_grad(cache.pre[j]);
        const Cx dz{dact.real() * mask.re, dact.imag() * mask.im};

        const auto& taps = L.fanin[j];
        if (dz != Cx{}) {
            grad[b_off + 2 * j] += dz.real();
            grad[b_off + 2 * j + 1] += dz.imag();
            for (std::size_t k = 0; k < taps.size(); ++k) {
                const Cx gw = dz * std::conj(x_window[static_cast<std::size_t>(taps[k])]);
                grad[w_off + 2 * k] += gw.real();
                grad[w_off + 2 * k + 1] += gw.imag();
            }
        }
        w_off += 2 * taps.size();
    }
}

inline ParamVector nn_backward(const GridLayout& L, const GridParams& p, std::span<const Cx> x_window,
                               Cx residual_error) {
    ForwardCache cache;
    nn_forward(L, p, x_window, cache);
    ParamVector grad(L.real_param_count(), 0.0);
    nn_backward_accumulate(L, p, x_window, cache, residual_error, grad);
    return grad;
}

} // namespace sic
