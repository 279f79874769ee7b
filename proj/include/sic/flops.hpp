#pragma once

// Inference cost accounting.
//
// Complex operations are converted to real ones with the reduced-
// multiplication convention: one complex multiply = 3 real multiplies +
// 5 real adds, one complex add = 2 real adds. A split-complex ReLU costs
// 2 real multiplies + 6 real adds (comparators free, one add per
// multiplexer). The M-tap linear stage costs M complex multiplies and M-1
// complex adds; the final subtraction from y is not counted.

#include <sic/cancelers/grid.hpp>
#include <sic/cancelers/stack.hpp>
#include <sic/poly_terms.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sic {

struct ComplexOpCount {
    long cm = 0;
    long ca = 0;
    bool operator==(const ComplexOpCount&) const = default;
};

struct RealOpCount {
    long mults = 0;
    long adds = 0;
    long total() const { return mults + adds; }
    bool operator==(const RealOpCount&) const = default;
    RealOpCount& operator+=(const RealOpCount& o) {
        mults += o.mults;
        adds += o.adds;
        return *this;
    }
};

/// Counts by walking the mask: every connection is one multiply; each
/// neuron (hidden and output) accumulates fan_in products plus its bias.
inline ComplexOpCount count_grid_complex_ops(const GridLayout& L) {
    ComplexOpCount c;
    for (const auto& f : L.fanin) {
        const auto fan = static_cast<long>(f.size());
        c.cm += fan;
        c.ca += (fan - 1) + 1;
    }
    const long out_fan = static_cast<long>(L.fanin.size());
    c.cm += out_fan;
    c.ca += (out_fan - 1) + 1;
    return c;
}

inline ComplexOpCount closed_form(GridKind kind, long N, long M, long W = 0) {
    long cm = 0;
    switch (kind) {
    case GridKind::lwgs:
        if (N < 1 || N > M) throw ConfigError("closed_form: lwgs needs 1 <= N <= M");
        cm = N * (N + 1) / 2 + M;
        break;
    case GridKind::mwgs:
        if (N < 1 || M < 1 || (N >= 2 && (W < 1 || W > M - 1))) throw ConfigError("closed_form: invalid mwgs parameters");
        cm = M + W * (N - 1) + N;
        break;
    case GridKind::ffnn:
        if (N < 1 || M < 1) throw ConfigError("closed_form: invalid ffnn parameters");
        cm = N * (M + 1);
        break;
    }
    return {cm, cm};
}

inline RealOpCount to_real_flops(ComplexOpCount c) { return {3 * c.cm, 5 * c.cm + 2 * c.ca}; }

inline RealOpCount activation_cost(long N) {
    if (N < 0) throw ConfigError("activation_cost: N must be >= 0");
    return {2 * N, 6 * N};
}

inline RealOpCount linear_stage_cost(long M) {
    if (M < 1) throw ConfigError("linear_stage_cost: M must be >= 1");
    return to_real_flops({M, M - 1});
}

/// Polynomial canceler: the M linear taps (p=1, q=1) form their own
/// accumulation chain like the NN rows' linear stage; the remaining
/// coefficients form a second chain. Basis-term generation is not counted.
inline ComplexOpCount poly_complex_ops(int P, int M) {
    const auto coeffs = static_cast<long>(basis_length(P, M));
    const long rest = coeffs - M;
    return {coeffs, (M - 1) + (rest > 0 ? rest - 1 : 0)};
}

inline constexpr const char* kPolyAccountingNote =
    "polynomial: one complex multiply per coefficient (M*sum_{p odd<=P}(p+1)); "
    "the M linear taps accumulate separately (M-1 complex adds) and the remaining coefficients "
    "accumulate with count-1 complex adds; basis terms x^q conj(x)^(p-q) and the final stage sum "
    "are not counted; 3/5/2 real-op conversion as for the networks";

inline long param_count(const CancelerConfig& cc) {
    switch (cc.kind) {
    case CancelerKind::linear: return 2L * cc.M;
    case CancelerKind::poly: return 2L * static_cast<long>(basis_length(cc.P, cc.M));
    default: return static_cast<long>(cc.layout().real_param_count()) + 2L * cc.M;
    }
}

inline RealOpCount canceler_cost(const CancelerConfig& cc) {
    switch (cc.kind) {
    case CancelerKind::linear: return linear_stage_cost(cc.M);
    case CancelerKind::poly: require_odd_order(cc.P); return to_real_flops(poly_complex_ops(cc.P, cc.M));
    default: {
        const auto layout = cc.layout();
        RealOpCount r = to_real_flops(count_grid_complex_ops(layout));
        r += activation_cost(layout.N);
        r += linear_stage_cost(cc.M);
        return r;
    }
    }
}

inline std::string canceler_label(const CancelerConfig& cc) {
    switch (cc.kind) {
    case CancelerKind::linear: return "Linear (M=" + std::to_string(cc.M) + ")";
    case CancelerKind::poly: return "Polynomial (P=" + std::to_string(cc.P) + ")";
    case CancelerKind::ffnn: return "CV-FFNN (" + std::to_string(cc.N) + ")";
    case CancelerKind::lwgs: return "LWGS (" + std::to_string(cc.N) + ")";
    case CancelerKind::mwgs: return "MWGS (" + std::to_string(cc.N) + "," + std::to_string(cc.W) + ")";
    }
    return "?";
}

struct ComplexityReport {
    std::string name;
    CancelerConfig config;
    long params_real = 0;
    long real_mults = 0;
    long real_adds = 0;
    long flops_total = 0;
    bool includes_linear_stage = true;
    std::optional<double> pct_param_reduction;
    std::optional<double> pct_flop_reduction;
};

/// Table rows for each config; percentages relative to the row at
/// baseline_index when given (the baseline row itself carries none).
inline std::vector<ComplexityReport> report_table(const std::vector<CancelerConfig>& configs,
                                                  std::optional<std::size_t> baseline_index = std::nullopt) {
    std::vector<ComplexityReport> rows;
    for (const auto& cc : configs) {
        const auto cost = canceler_cost(cc);
        ComplexityReport r;
        r.name = canceler_label(cc);
        r.config = cc;
        r.params_real = param_count(cc);
        r.real_mults = cost.mults;
        r.real_adds = cost.adds;
        r.flops_total = cost.total();
        rows.push_back(r);
    }
    if (baseline_index) {
        if (*baseline_index >= rows.size()) throw ConfigError("report_table: baseline index out of range");
        const auto& base = rows[*baseline_index];
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == *baseline_index) continue;
            rows[i].pct_param_reduction =
                100.0 * static_cast<double>(rows[i].params_real - base.params_real) / static_cast<double>(base.params_real);
            rows[i].pct_flop_reduction =
                100.0 * static_cast<double>(rows[i].flops_total - base.flops_total) / static_cast<double>(base.flops_total);
        }
    }
    return rows;
}

inline std::vector<CancelerConfig> default_table_configs(int M = 13) {
    return {
        {CancelerKind::poly, 0, M, 0, 5, -1.0},
        {CancelerKind::ffnn, 7, M, 0, 0, -1.0},
        {CancelerKind::lwgs, 9, M, 0, 0, -1.0},
        {CancelerKind::lwgs, 10, M, 0, 0, -1.0},
        {CancelerKind::mwgs, 12, M, 5, 0, -1.0},
    };
}

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

inline std::string format_pct(const std::optional<double>& v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return buf;
}

inline std::string report_csv(const std::vector<ComplexityReport>& rows) {
    std::string out = "name,params,real_mults,real_adds,flops,pct_param_reduction,pct_flop_reduction\n";
    for (const auto& r : rows) {
        out += "\"" + r.name + "\"," + std::to_string(r.params_real) + "," + std::to_string(r.real_mults) + "," +
               std::to_string(r.real_adds) + "," + std::to_string(r.flops_total) + "," +
               format_pct(r.pct_param_reduction) + "," + format_pct(r.pct_flop_reduction) + "\n";
    }
    return out;
}

inline nlohmann::json report_json(const std::vector<ComplexityReport>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    bool has_poly = false;
    for (const auto& r : rows) {
        nlohmann::json j;
        j["name"] = r.name;
        j["params"] = r.params_real;
        j["real_mults"] = r.real_mults;
        j["real_adds"] = r.real_adds;
        j["flops"] = r.flops_total;
        j["pct_param_reduction"] = r.pct_param_reduction ? nlohmann::json(round2(*r.pct_param_reduction)) : nlohmann::json();
        j["pct_flop_reduction"] = r.pct_flop_reduction ? nlohmann::json(round2(*r.pct_flop_reduction)) : nlohmann::json();
        j["includes_linear_stage"] = r.includes_linear_stage;
        has_poly = has_poly || r.config.kind == CancelerKind::poly;
        arr.push_back(std::move(j));
    }
    nlohmann::json doc;
    doc["rows"] = std::move(arr);
    nlohmann::json notes = {
        {"conversion", "complex mult = 3 real mults + 5 real adds; complex add = 2 real adds"},
        {"activation", "split-complex ReLU = 2 real mults + 6 real adds per hidden neuron"},
        {"linear_stage", "M complex mults + (M-1) complex adds, included in every row"},
    };
    if (has_poly) notes["polynomial"] = kPolyAccountingNote;
    doc["methodology"] = std::move(notes);
    return doc;
}

} // namespace sic
