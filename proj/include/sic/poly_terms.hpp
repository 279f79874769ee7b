#pragma once

// Indexing of the odd-order polynomial terms x^q (x*)^(p-q).
//
// Canonical ordering, shared by the composite channel model and the
// polynomial canceler: delay m outermost (ascending), then odd order p
// ascending, then q descending from p to 0. With P=1, M=1 the terms are
// [x(n), x*(n)].

#include <sic/cxnum.hpp>
#include <sic/errors.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sic {

inline void require_odd_order(int P) {
    if (P < 1 || P % 2 == 0) throw ConfigError("polynomial order must be an odd integer >= 1, got " + std::to_string(P));
}

/// Number of (p, q) terms per delay: sum over odd p <= P of (p + 1).
constexpr std::size_t terms_per_delay(int P) noexcept {
    const std::size_t k = static_cast<std::size_t>(P + 1) / 2;
    return k * (k + 1);
}

constexpr std::size_t basis_length(int P, int M) noexcept { return static_cast<std::size_t>(M) * terms_per_delay(P); }

/// Position of term (m, q, p) in the canonical ordering.
constexpr std::size_t term_index(int P, int m, int q, int p) noexcept {
    // offset of order p inside one delay block: sum over odd p' < p of (p'+1)
    const std::size_t k = static_cast<std::size_t>(p - 1) / 2;
    const std::size_t off_p = k * (k + 1);
    return static_cast<std::size_t>(m) * terms_per_delay(P) + off_p + static_cast<std::size_t>(p - q);
}

/// Powers table: pw[i] = x^i and cpw[i] = (x*)^i for i in 0..P, by repeated multiplication.
struct PowerTable {
    std::vector<Cx> pw;
    std::vector<Cx> cpw;

    PowerTable(Cx x, int P) : pw(static_cast<std::size_t>(P) + 1), cpw(static_cast<std::size_t>(P) + 1) {
        pw[0] = cpw[0] = Cx{1.0, 0.0};
        const Cx xc = std::conj(x);
        for (int i = 1; i <= P; ++i) {
            pw[i] = pw[i - 1] * x;
            cpw[i] = cpw[i - 1] * xc;
        }
    }
};

/// Writes the M * terms_per_delay(P) features of sample n into out; samples
/// before index 0 are zero.
inline void fill_poly_terms(std::span<const Cx> x, std::size_t n, int P, int M, std::span<Cx> out) {
    std::size_t idx = 0;
    for (int m = 0; m < M; ++m) {
        const bool in_range = n >= static_cast<std::size_t>(m);
        const Cx v = in_range ? x[n - static_cast<std::size_t>(m)] : Cx{};
        const PowerTable t(v, P);
        for (int p = 1; p <= P; p += 2)
            for (int q = p; q >= 0; --q) out[idx++] = t.pw[q] * t.cpw[p - q];
    }
}

} // namespace sic
