#pragma once

// Two-stage canceler: least-squares linear FIR on x, then a nonlinear stage
// (polynomial or grid network) fitted on the linear residual.

#include <sic/cancelers/grid.hpp>
#include <sic/cancelers/linear.hpp>
#include <sic/cancelers/poly.hpp>
#include <sic/cancelers/train.hpp>

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sic {

enum class CancelerKind { linear, poly, ffnn, lwgs, mwgs };

inline const char* to_string(CancelerKind k) {
    switch (k) {
    case CancelerKind::linear: return "linear";
    case CancelerKind::poly: return "poly";
    case CancelerKind::ffnn: return "ffnn";
    case CancelerKind::lwgs: return "lwgs";
    case CancelerKind::mwgs: return "mwgs";
    }
    return "?";
}

inline CancelerKind parse_canceler_kind(const std::string& s) {
    if (s == "linear") return CancelerKind::linear;
    if (s == "poly" || s == "polynomial") return CancelerKind::poly;
    if (s == "ffnn" || s == "cvffnn") return CancelerKind::ffnn;
    if (s == "lwgs") return CancelerKind::lwgs;
    if (s == "mwgs") return CancelerKind::mwgs;
    throw ConfigError("unknown canceler kind '" + s + "'");
}

inline bool is_grid(CancelerKind k) { return k == CancelerKind::ffnn || k == CancelerKind::lwgs || k == CancelerKind::mwgs; }

inline GridKind grid_kind(CancelerKind k) {
    switch (k) {
    case CancelerKind::ffnn: return GridKind::ffnn;
    case CancelerKind::lwgs: return GridKind::lwgs;
    case CancelerKind::mwgs: return GridKind::mwgs;
    default: throw ConfigError(std::string("canceler kind '") + to_string(k) + "' has no grid layout");
    }
}

/// Structural description of one canceler.
struct CancelerConfig {
    CancelerKind kind = CancelerKind::lwgs;
    int N = 9;
    int M = 13;
    int W = 0;
    int P = 5;
    /// Polynomial ridge; negative selects the default 1e-8 * trace / ncols.
    double ridge = -1.0;

    GridLayout layout() const { return build_layout(grid_kind(kind), N, M, W); }
};

struct Normalization {
    double x_scale = 1.0;
    double r_scale = 1.0;
};

struct GridStage {
    GridLayout layout;
    GridParams params;
};

struct CancelerStack {
    int M = 13;
    std::vector<Cx> h_lin;
    std::variant<std::monostate, PolyCanceler, GridStage> nonlinear;
    Normalization norm;

    CancelerKind kind() const {
        if (std::holds_alternative<PolyCanceler>(nonlinear)) return CancelerKind::poly;
        if (const auto* g = std::get_if<GridStage>(&nonlinear)) {
            switch (g->layout.kind) {
            case GridKind::ffnn: return CancelerKind::ffnn;
            case GridKind::lwgs: return CancelerKind::lwgs;
            case GridKind::mwgs: return CancelerKind::mwgs;
            }
        }
        return CancelerKind::linear;
    }
};

inline void check_stack(const CancelerStack& s) {
    if (static_cast<int>(s.h_lin.size()) != s.M) throw ContractError("stack: linear tap count differs from M");
    if (!(s.norm.x_scale != 0.0 && std::isfinite(s.norm.x_scale) && s.norm.r_scale != 0.0 &&
          std::isfinite(s.norm.r_scale)))
        throw ContractError("stack: normalization scales must be finite and nonzero");
    if (const auto* g = std::get_if<GridStage>(&s.nonlinear)) {
        if (g->layout.M != s.M || !matches(g->layout, g->params)) throw ContractError("stack: grid stage shape mismatch");
    }
}

inline double rms(std::span<const Segment> segs, int M, bool use_y) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& s : segs)
        for (std::size_t i = static_cast<std::size_t>(M) - 1; i < s.x.size(); ++i, ++n)
            acc += std::norm(use_y ? s.y[i] : s.x[i]);
    return n ? std::sqrt(acc / static_cast<double>(n)) : 0.0;
}

/// Residual segments y - apply_linear(h, x), backed by the storage vector.
struct ResidualSet {
    std::vector<std::vector<Cx>> storage;
    std::vector<Segment> segs;
};

inline ResidualSet linear_residuals(std::span<const Segment> segs, std::span<const Cx> h) {
    ResidualSet r;
    r.storage.reserve(segs.size());
    for (const auto& s : segs) {
        auto pred = apply_linear(h, s.x);
        for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = s.y[i] - pred[i];
        r.storage.push_back(std::move(pred));
    }
    for (std::size_t i = 0; i < segs.size(); ++i) r.segs.push_back({segs[i].x, r.storage[i]});
    return r;
}

struct StackFit {
    CancelerStack stack;
    std::vector<double> train_mse; // per epoch, normalized residual units; grid stages only
    std::vector<double> val_mse;
};

/// Fits the linear stage on the training segments, then the nonlinear
/// stage on the residual. Optional validation segments are scored each epoch.
inline StackFit fit_stack(std::span<const Segment> train, const CancelerConfig& cc, const TrainHyper& hyper,
                          std::span<const Segment> validation = {}) {
    StackFit fit;
    auto& st = fit.stack;
    st.M = cc.M;
    st.h_lin = fit_linear_ls(train, cc.M);
    if (cc.kind == CancelerKind::linear) return fit;

    const auto resid = linear_residuals(train, st.h_lin);
    if (cc.kind == CancelerKind::poly) {
        const double ridge = cc.ridge >= 0.0 ? cc.ridge : default_poly_ridge(resid.segs, cc.P, cc.M);
        st.nonlinear = fit_poly_ls(resid.segs, cc.P, cc.M, ridge);
        return fit;
    }

    const GridLayout layout = cc.layout();
    const double xr = rms(resid.segs, cc.M, false);
    const double rr = rms(resid.segs, cc.M, true);
    if (!(xr > 0.0 && rr > 0.0)) throw ConfigError("fit_stack: zero-power input or residual; cannot normalize");
    st.norm = {1.0 / xr, 1.0 / rr};

    const WindowSet tw = make_windows(resid.segs, cc.M, st.norm.x_scale, st.norm.r_scale);
    std::optional<WindowSet> vw;
    std::optional<ResidualSet> vres;
    if (!validation.empty()) {
        vres = linear_residuals(validation, st.h_lin);
        vw = make_windows(vres->segs, cc.M, st.norm.x_scale, st.norm.r_scale);
    }
    auto tr = train_nn(tw, layout, hyper, vw ? &*vw : nullptr);
    st.nonlinear = GridStage{layout, std::move(tr.params)};
    fit.train_mse = std::move(tr.train_mse);
    fit.val_mse = std::move(tr.val_mse);
    return fit;
}

inline StackFit fit_stack(const Dataset& train, const CancelerConfig& cc, const TrainHyper& hyper) {
    const Segment s = whole(train);
    return fit_stack(std::span<const Segment>(&s, 1), cc, hyper);
}

inline std::vector<Cx> predict_linear(const CancelerStack& s, std::span<const Cx> x) { return apply_linear(s.h_lin, x); }

/// Linear plus nonlinear prediction, zero history before x[0].
inline std::vector<Cx> predict_total(const CancelerStack& s, std::span<const Cx> x) {
    check_stack(s);
    auto out = apply_linear(s.h_lin, x);
    if (const auto* poly = std::get_if<PolyCanceler>(&s.nonlinear)) {
        const auto nl = apply_poly(*poly, x);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += nl[i];
    } else if (const auto* g = std::get_if<GridStage>(&s.nonlinear)) {
        const auto M = static_cast<std::size_t>(s.M);
        std::vector<Cx> window(M);
        ForwardCache cache;
        const double inv_r = 1.0 / s.norm.r_scale;
        for (std::size_t n = 0; n < x.size(); ++n) {
            for (std::size_t d = 0; d < M; ++d) window[d] = d <= n ? s.norm.x_scale * x[n - d] : Cx{};
            out[n] += inv_r * nn_forward(g->layout, g->params, window, cache);
        }
    }
    return out;
}

} // namespace sic
