#pragma once

#include <sic/cancelers/linear.hpp>
#include <sic/poly_terms.hpp>

#include <span>
#include <vector>

namespace sic {

/// Polynomial canceler over the odd-order basis, coefficients in canonical
/// term order (see poly_terms.hpp).
struct PolyCanceler {
    int P = 1;
    int M = 1;
    std::vector<Cx> coeffs;

    std::size_t size() const noexcept { return coeffs.size(); }
};

inline std::vector<Cx> poly_basis(std::span<const Cx> x, std::size_t n, int P, int M) {
    require_odd_order(P);
    std::vector<Cx> out(basis_length(P, M));
    fill_poly_terms(x, n, P, M, out);
    return out;
}

/// Default ridge: 1e-8 * trace(A^H A) / ncols.
inline double default_poly_ridge(std::span<const Segment> segs, int P, int M) {
    const std::size_t cols = basis_length(P, M);
    std::vector<Cx> terms(cols);
    double trace = 0.0;
    for (const auto& s : segs)
        for (std::size_t n = static_cast<std::size_t>(M) - 1; n < s.x.size(); ++n) {
            fill_poly_terms(s.x, n, P, M, terms);
            for (auto t : terms) trace += std::norm(t);
        }
    return 1e-8 * trace / static_cast<double>(cols);
}

inline PolyCanceler fit_poly_ls(std::span<const Segment> segs, int P, int M, double ridge) {
    require_odd_order(P);
    if (M < 1) throw ConfigError("polynomial canceler memory must be >= 1");
    if (ridge < 0.0) throw ConfigError("ridge must be >= 0");
    const std::size_t cols = basis_length(P, M);
    const std::size_t rows = usable_rows(segs, M);
    if (rows < cols)
        throw ConfigError("fit_poly_ls: " + std::to_string(rows) + " training rows for " + std::to_string(cols) +
                          " basis functions");

    Eigen::MatrixXcd A(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    Eigen::VectorXcd b(static_cast<Eigen::Index>(rows));
    std::vector<Cx> terms(cols);
    Eigen::Index r = 0;
    for (const auto& s : segs)
        for (std::size_t n = static_cast<std::size_t>(M) - 1; n < s.x.size(); ++n, ++r) {
            fill_poly_terms(s.x, n, P, M, terms);
            for (std::size_t c = 0; c < cols; ++c) A(r, static_cast<Eigen::Index>(c)) = terms[c];
            b(r) = s.y[n];
        }
    const Eigen::VectorXcd c = detail::solve_least_squares(A, b, ridge, "fit_poly_ls");
    return {P, M, std::vector<Cx>(c.data(), c.data() + c.size())};
}

inline PolyCanceler fit_poly_ls(const Dataset& d, int P, int M, double ridge) {
    const Segment s = whole(d);
    return fit_poly_ls(std::span<const Segment>(&s, 1), P, M, ridge);
}

inline std::vector<Cx> apply_poly(const PolyCanceler& poly, std::span<const Cx> x) {
    std::vector<Cx> terms(poly.coeffs.size());
    std::vector<Cx> out(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        fill_poly_terms(x, n, poly.P, poly.M, terms);
        Cx acc{};
        for (std::size_t i = 0; i < terms.size(); ++i) acc += poly.coeffs[i] * terms[i];
        out[n] = acc;
    }
    return out;
}

} // namespace sic
