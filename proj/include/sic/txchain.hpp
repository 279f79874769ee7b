#pragma once

// Synthetic full-duplex self-interference: QPSK-OFDM baseband, transmitter IQ
// imbalance, parallel-Hammerstein PA, FIR leakage channel, and the equivalent
// composite polynomial channel model.

#include <sic/cxnum.hpp>
#include <sic/digest.hpp>
#include <sic/errors.hpp>
#include <sic/poly_terms.hpp>
#include <sic/rng.hpp>

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

namespace sic {

struct TxConfig {
    double psi = 1.05;
    double theta = 0.05;
    int pa_order = 5;
    int pa_memory = 3;
    /// pa_coeffs[m][k] is h_{m,p} for p = 2k+1, m in [0, pa_memory].
    std::vector<std::vector<Cx>> pa_coeffs;
    std::vector<Cx> si_channel;
    double noise_power = 0.0;
    std::uint64_t seed = 1;
    int n_subcarriers = 1024;
    double cp_fraction = 0.25;
};

/// Default impairments: |h_{m,p}| = 0.8^m * 10^-(p-1) with a fixed phase
/// progression, and a 4-tap exponentially decaying leakage channel.
inline TxConfig default_tx_config() {
    TxConfig cfg;
    const int branches = (cfg.pa_order + 1) / 2;
    cfg.pa_coeffs.assign(static_cast<std::size_t>(cfg.pa_memory) + 1, std::vector<Cx>(branches));
    for (int m = 0; m <= cfg.pa_memory; ++m)
        for (int k = 0; k < branches; ++k) {
            const int p = 2 * k + 1;
            const double mag = std::pow(0.8, m) * std::pow(10.0, -(p - 1));
            const double phase = 0.4 * m + 0.25 * (p - 1);
            cfg.pa_coeffs[m][k] = std::polar(mag, phase);
        }
    for (int k = 0; k < 4; ++k) cfg.si_channel.push_back(std::polar(std::exp(-0.5 * k), 0.9 * k));
    return cfg;
}

inline void validate(const TxConfig& cfg) {
    require_odd_order(cfg.pa_order);
    if (cfg.pa_memory < 0) throw ConfigError("pa_memory must be >= 0");
    const auto branches = static_cast<std::size_t>(cfg.pa_order + 1) / 2;
    if (cfg.pa_coeffs.size() != static_cast<std::size_t>(cfg.pa_memory) + 1)
        throw ConfigError("pa_coeffs: expected " + std::to_string(cfg.pa_memory + 1) + " delay rows, got " +
                          std::to_string(cfg.pa_coeffs.size()));
    for (std::size_t m = 0; m < cfg.pa_coeffs.size(); ++m)
        if (cfg.pa_coeffs[m].size() != branches)
            throw ConfigError("pa_coeffs: missing coefficient at delay " + std::to_string(m) + " (expected " +
                              std::to_string(branches) + " odd orders)");
    if (cfg.si_channel.empty()) throw ConfigError("si_channel must be non-empty");
    if (!(cfg.noise_power >= 0.0)) throw ConfigError("noise_power must be >= 0");
    if (cfg.n_subcarriers < 2 || (cfg.n_subcarriers & (cfg.n_subcarriers - 1)) != 0)
        throw ConfigError("n_subcarriers must be a power of two >= 2");
    if (!(cfg.cp_fraction >= 0.0 && cfg.cp_fraction < 1.0)) throw ConfigError("cp_fraction must be in [0, 1)");
}

/// Composite response h_{m,q,p}, stored in the canonical term order.
struct SIChannelModel {
    int P = 1;
    int M = 1;
    std::vector<Cx> h;

    SIChannelModel() = default;
    SIChannelModel(int order, int memory) : P(order), M(memory), h(basis_length(order, memory)) {
        require_odd_order(order);
        if (memory < 1) throw ConfigError("composite model memory must be >= 1");
    }

    Cx& at(int m, int q, int p) { return h[term_index(P, m, q, p)]; }
    Cx at(int m, int q, int p) const { return h[term_index(P, m, q, p)]; }
};

enum class ProvenanceKind { synthetic, imported, file };

struct Provenance {
    ProvenanceKind kind = ProvenanceKind::synthetic;
    Digest digest{};
    std::string source;
};

struct Dataset {
    std::vector<Cx> x;
    std::vector<Cx> y;
    int memory = 13;
    Provenance provenance;

    std::size_t n_samples() const noexcept { return x.size(); }
};

/// Equality over the persisted content (samples, memory, digest).
inline bool same_content(const Dataset& a, const Dataset& b) {
    return a.x == b.x && a.y == b.y && a.memory == b.memory && a.provenance.digest == b.provenance.digest;
}

// ---------------------------------------------------------------------------
// OFDM source

inline void require_ofdm_shape(int n_subcarriers, double cp_fraction) {
    if (n_subcarriers < 2 || (n_subcarriers & (n_subcarriers - 1)) != 0)
        throw ConfigError("n_subcarriers must be a power of two >= 2, got " + std::to_string(n_subcarriers));
    if (!(cp_fraction >= 0.0 && cp_fraction < 1.0)) throw ConfigError("cp_fraction must be in [0, 1)");
}

/// Modulates explicit frequency-domain symbols (one vector per OFDM symbol)
/// with a unitary IDFT and prepends the cyclic prefix.
inline std::vector<Cx> ofdm_modulate(const std::vector<std::vector<Cx>>& symbols, int n_subcarriers,
                                     double cp_fraction) {
    require_ofdm_shape(n_subcarriers, cp_fraction);
    const auto n = static_cast<std::size_t>(n_subcarriers);
    const auto cp = static_cast<std::size_t>(std::floor(cp_fraction * n_subcarriers));
    const double scale = std::sqrt(static_cast<double>(n));

    Eigen::FFT<double> fft;
    std::vector<Cx> out;
    out.reserve(symbols.size() * (n + cp));
    std::vector<Cx> time(n);
    for (const auto& freq : symbols) {
        if (freq.size() != n) throw ConfigError("ofdm_modulate: symbol length does not match subcarrier count");
        fft.inv(time, freq); // includes the 1/N factor
        for (auto& v : time) v *= scale;
        out.insert(out.end(), time.end() - static_cast<std::ptrdiff_t>(cp), time.end());
        out.insert(out.end(), time.begin(), time.end());
    }
    return out;
}

inline std::vector<Cx> gen_qpsk_ofdm(int n_symbols, int n_subcarriers, double cp_fraction, std::uint64_t seed) {
    require_ofdm_shape(n_subcarriers, cp_fraction);
    if (n_symbols < 0) throw ConfigError("n_symbols must be >= 0");
    Rng rng(seed, "ofdm.qpsk");
    const double a = 1.0 / std::sqrt(2.0);
    std::vector<std::vector<Cx>> symbols(static_cast<std::size_t>(n_symbols),
                                         std::vector<Cx>(static_cast<std::size_t>(n_subcarriers)));
    for (auto& sym : symbols)
        for (auto& s : sym) {
            const auto bits = rng.next_u64();
            s = Cx{(bits & 1) ? a : -a, (bits & 2) ? a : -a};
        }
    return ofdm_modulate(symbols, n_subcarriers, cp_fraction);
}

// ---------------------------------------------------------------------------
// Impairment chain

struct IqCoefficients {
    Cx direct;
    Cx image;
};

inline IqCoefficients iq_coefficients(double psi, double theta) {
    const Cx rot = psi * std::polar(1.0, theta);
    return {0.5 * (1.0 + rot), 0.5 * (1.0 - rot)};
}

inline std::vector<Cx> iq_mixer(std::span<const Cx> x, double psi, double theta) {
    const auto [k1, k2] = iq_coefficients(psi, theta);
    std::vector<Cx> out(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) out[n] = k1 * x[n] + k2 * std::conj(x[n]);
    return out;
}

inline std::vector<Cx> pa_hammerstein(std::span<const Cx> x_iq, const TxConfig& cfg) {
    validate(cfg);
    const int branches = (cfg.pa_order + 1) / 2;
    // branch outputs x|x|^(p-1) = x^((p+1)/2) (x*)^((p-1)/2)
    std::vector<std::vector<Cx>> basis(static_cast<std::size_t>(branches), std::vector<Cx>(x_iq.size()));
    for (std::size_t n = 0; n < x_iq.size(); ++n) {
        const double mag2 = std::norm(x_iq[n]);
        Cx v = x_iq[n];
        for (int k = 0; k < branches; ++k) {
            basis[k][n] = v;
            v *= mag2;
        }
    }
    std::vector<Cx> out(x_iq.size());
    for (std::size_t n = 0; n < x_iq.size(); ++n) {
        Cx acc{};
        for (int m = 0; m <= cfg.pa_memory && static_cast<std::size_t>(m) <= n; ++m)
            for (int k = 0; k < branches; ++k) acc += cfg.pa_coeffs[m][k] * basis[k][n - m];
        out[n] = acc;
    }
    return out;
}

/// Causal FIR with zero history.
inline std::vector<Cx> fir_filter(std::span<const Cx> x, std::span<const Cx> taps) {
    std::vector<Cx> out(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        Cx acc{};
        for (std::size_t k = 0; k < taps.size() && k <= n; ++k) acc += taps[k] * x[n - k];
        out[n] = acc;
    }
    return out;
}

inline std::vector<Cx> si_composite(std::span<const Cx> x, const SIChannelModel& model) {
    std::vector<Cx> terms(basis_length(model.P, model.M));
    std::vector<Cx> out(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        fill_poly_terms(x, n, model.P, model.M, terms);
        Cx acc{};
        for (std::size_t i = 0; i < terms.size(); ++i) acc += model.h[i] * terms[i];
        out[n] = acc;
    }
    return out;
}

namespace detail {

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

inline Cx ipow(Cx z, int e) {
    Cx r{1.0, 0.0};
    for (int i = 0; i < e; ++i) r *= z;
    return r;
}

} // namespace detail

/// Expands iq_mixer -> pa_hammerstein -> FIR into the equivalent composite
/// polynomial model. Memory is pa_memory + |si_channel|.
inline SIChannelModel expand_composite(const TxConfig& cfg) {
    validate(cfg);
    const int P = cfg.pa_order;
    const int M = cfg.pa_memory + static_cast<int>(cfg.si_channel.size());
    const auto [a, b] = iq_coefficients(cfg.psi, cfg.theta);
    const Cx ac = std::conj(a), bc = std::conj(b);

    // g[k][q]: coefficient of x^q (x*)^(p-q) in x_iq^(k+1) conj(x_iq)^k, p = 2k+1
    const int branches = (P + 1) / 2;
    std::vector<std::vector<Cx>> g(static_cast<std::size_t>(branches));
    for (int k = 0; k < branches; ++k) {
        const int p = 2 * k + 1;
        g[k].assign(static_cast<std::size_t>(p) + 1, Cx{});
        for (int i = 0; i <= k + 1; ++i) {
            const Cx left = detail::binomial(k + 1, i) * detail::ipow(a, i) * detail::ipow(b, k + 1 - i);
            for (int l = 0; l <= k; ++l) {
                const Cx right = detail::binomial(k, l) * detail::ipow(bc, l) * detail::ipow(ac, k - l);
                g[k][i + l] += left * right;
            }
        }
    }

    SIChannelModel model(P, M);
    for (std::size_t c = 0; c < cfg.si_channel.size(); ++c)
        for (int m = 0; m <= cfg.pa_memory; ++m)
            for (int k = 0; k < branches; ++k) {
                const int p = 2 * k + 1;
                const Cx w = cfg.si_channel[c] * cfg.pa_coeffs[m][k];
                for (int q = 0; q <= p; ++q) model.at(static_cast<int>(c) + m, q, p) += w * g[k][q];
            }
    return model;
}

/// Canonical text of a configuration, hashed into the dataset digest.
inline std::string canonical_text(const TxConfig& cfg, std::size_t n_samples, int memory) {
    std::string s;
    char buf[96];
    auto num = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%s=%.17g\n", key, v);
        s += buf;
    };
    auto cx = [&](const char* key, Cx v) {
        std::snprintf(buf, sizeof buf, "%s=%.17g,%.17g\n", key, v.real(), v.imag());
        s += buf;
    };
    num("psi", cfg.psi);
    num("theta", cfg.theta);
    num("pa_order", cfg.pa_order);
    num("pa_memory", cfg.pa_memory);
    for (const auto& row : cfg.pa_coeffs)
        for (auto v : row) cx("pa", v);
    for (auto v : cfg.si_channel) cx("ch", v);
    num("noise_power", cfg.noise_power);
    s += "seed=" + std::to_string(cfg.seed) + "\n";
    num("n_subcarriers", cfg.n_subcarriers);
    num("cp_fraction", cfg.cp_fraction);
    s += "n_samples=" + std::to_string(n_samples) + "\n";
    s += "memory=" + std::to_string(memory) + "\n";
    return s;
}

inline Dataset synth_dataset(const TxConfig& cfg, std::size_t n_samples, int memory = 13) {
    validate(cfg);
    if (memory < 1) throw ConfigError("memory must be >= 1");
    if (n_samples < static_cast<std::size_t>(memory)) throw ConfigError("n_samples must be >= memory");

    const auto sym_len = static_cast<std::size_t>(cfg.n_subcarriers) +
                         static_cast<std::size_t>(std::floor(cfg.cp_fraction * cfg.n_subcarriers));
    const auto n_symbols = static_cast<int>((n_samples + sym_len - 1) / sym_len);
    auto x = gen_qpsk_ofdm(n_symbols, cfg.n_subcarriers, cfg.cp_fraction, cfg.seed);
    x.resize(n_samples);

    const auto x_iq = iq_mixer(x, cfg.psi, cfg.theta);
    const auto x_pa = pa_hammerstein(x_iq, cfg);
    auto y = fir_filter(x_pa, cfg.si_channel);

    if (cfg.noise_power > 0.0) {
        Rng rng(cfg.seed, "rx.noise");
        const double sigma = std::sqrt(cfg.noise_power / 2.0);
        for (auto& v : y) {
            const double re = rng.normal();
            const double im = rng.normal();
            v += Cx{sigma * re, sigma * im};
        }
    }

    Dataset d;
    d.x = std::move(x);
    d.y = std::move(y);
    d.memory = memory;
    d.provenance.kind = ProvenanceKind::synthetic;
    d.provenance.digest = sha256(canonical_text(cfg, n_samples, memory));
    d.provenance.source = "synthetic";
    return d;
}

} // namespace sic
