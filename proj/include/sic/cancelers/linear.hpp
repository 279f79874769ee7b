#pragma once

// Least-squares linear canceler and the shared complex LS solver.

#include <sic/cxnum.hpp>
#include <sic/errors.hpp>
#include <sic/txchain.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace sic {

/// A contiguous stretch of paired samples. Fitting rows start at index M-1
/// of each segment so every regressor window lies inside it.
struct Segment {
    std::span<const Cx> x;
    std::span<const Cx> y;
};

inline Segment whole(const Dataset& d) { return {d.x, d.y}; }

inline std::size_t usable_rows(std::span<const Segment> segs, int M) {
    std::size_t rows = 0;
    for (const auto& s : segs)
        if (s.x.size() >= static_cast<std::size_t>(M)) rows += s.x.size() - static_cast<std::size_t>(M) + 1;
    return rows;
}

namespace detail {

inline std::string format_condition(double c) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", c);
    return buf;
}

/// Solves min |A c - b|^2 + ridge |c|^2 by column-pivoted QR of the
/// (optionally ridge-augmented) system.
inline Eigen::VectorXcd solve_least_squares(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b, double ridge,
                                            const char* what) {
    const Eigen::Index cols = A.cols();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr;
    if (ridge > 0.0) {
        Eigen::MatrixXcd aug(A.rows() + cols, cols);
        aug.topRows(A.rows()) = A;
        aug.bottomRows(cols) = std::sqrt(ridge) * Eigen::MatrixXcd::Identity(cols, cols);
        Eigen::VectorXcd baug = Eigen::VectorXcd::Zero(A.rows() + cols);
        baug.head(A.rows()) = b;
        qr.compute(aug);
        return qr.solve(baug);
    }
    qr.compute(A);
    const auto r = qr.matrixQR().diagonal().cwiseAbs();
    const double rmax = r.size() ? r.maxCoeff() : 0.0;
    const double rmin = r.size() ? r.minCoeff() : 0.0;
    const double cond = rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();
    if (qr.rank() < cols || !(cond < 1e13)) {
        throw SingularityError(std::string(what) + ": regressor matrix is rank deficient (rank " +
                                   std::to_string(qr.rank()) + " of " + std::to_string(cols) +
                                   ", condition estimate " + format_condition(cond) + "); consider a positive ridge",
                               cond);
    }
    return qr.solve(b);
}

} // namespace detail

inline std::vector<Cx> fit_linear_ls(std::span<const Segment> segs, int M) {
    if (M < 1) throw ConfigError("linear canceler memory must be >= 1");
    const std::size_t rows = usable_rows(segs, M);
    if (rows < static_cast<std::size_t>(M))
        throw ConfigError("fit_linear_ls: " + std::to_string(rows) + " training rows, need at least " + std::to_string(M));

    Eigen::MatrixXcd A(static_cast<Eigen::Index>(rows), M);
    Eigen::VectorXcd b(static_cast<Eigen::Index>(rows));
    Eigen::Index r = 0;
    for (const auto& s : segs) {
        for (std::size_t n = static_cast<std::size_t>(M) - 1; n < s.x.size(); ++n, ++r) {
            for (int m = 0; m < M; ++m) A(r, m) = s.x[n - static_cast<std::size_t>(m)];
            b(r) = s.y[n];
        }
    }
    const Eigen::VectorXcd h = detail::solve_least_squares(A, b, 0.0, "fit_linear_ls");
    return {h.data(), h.data() + h.size()};
}

inline std::vector<Cx> fit_linear_ls(const Dataset& d, int M) {
    const Segment s = whole(d);
    return fit_linear_ls(std::span<const Segment>(&s, 1), M);
}

/// FIR prediction with zero history before index 0.
inline std::vector<Cx> apply_linear(std::span<const Cx> h, std::span<const Cx> x) {
    std::vector<Cx> out(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        Cx acc{};
        for (std::size_t m = 0; m < h.size() && m <= n; ++m) acc += h[m] * x[n - m];
        out[n] = acc;
    }
    return out;
}

} // namespace sic
