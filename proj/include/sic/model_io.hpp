#pragma once

// Model document (JSON):
//
//   {
//     "format": "sic-model", "version": 1,
//     "kind": "linear" | "poly" | "ffnn" | "lwgs" | "mwgs",
//     "M": 13, "N": 9, "W": 0, "P": 5,
//     "norm": {"x_scale": s, "r_scale": s},
//     "linear": [[re, im], ...],                       M taps
//     "poly": [[re, im], ...],                         poly only, canonical term order
//     "grid": {"fanin": [[d, ...], ...],               grid kinds only
//              "hidden_w": [[[re, im], ...], ...],
//              "hidden_b": [[re, im], ...],
//              "out_w": [[re, im], ...],
//              "out_b": [re, im]},
//     "meta": {...}                                    free-form (split, digests)
//   }
//
// Doubles are written in shortest round-trip form, so load(save(m)) is bit-exact.

#include <sic/cancelers/stack.hpp>
#include <sic/errors.hpp>

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace sic {

namespace detail {

inline nlohmann::json cx_json(Cx c) { return nlohmann::json::array({c.real(), c.imag()}); }

inline nlohmann::json cx_list(const std::vector<Cx>& v) {
    auto a = nlohmann::json::array();
    for (auto c : v) a.push_back(cx_json(c));
    return a;
}

inline Cx cx_from(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError(ParseErrorKind::bad_model, "expected [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline std::vector<Cx> cx_list_from(const nlohmann::json& j) {
    if (!j.is_array()) throw ParseError(ParseErrorKind::bad_model, "expected array of [re, im] pairs");
    std::vector<Cx> v;
    for (const auto& e : j) v.push_back(cx_from(e));
    return v;
}

} // namespace detail

inline nlohmann::json model_to_json(const CancelerStack& s, const nlohmann::json& meta = nlohmann::json::object()) {
    check_stack(s);
    nlohmann::json j;
    j["format"] = "sic-model";
    j["version"] = 1;
    j["kind"] = to_string(s.kind());
    j["M"] = s.M;
    j["N"] = 0;
    j["W"] = 0;
    j["P"] = 0;
    j["norm"] = {{"x_scale", s.norm.x_scale}, {"r_scale", s.norm.r_scale}};
    j["linear"] = detail::cx_list(s.h_lin);
    if (const auto* p = std::get_if<PolyCanceler>(&s.nonlinear)) {
        j["P"] = p->P;
        j["poly"] = detail::cx_list(p->coeffs);
    } else if (const auto* g = std::get_if<GridStage>(&s.nonlinear)) {
        j["N"] = g->layout.N;
        j["W"] = g->layout.W;
        nlohmann::json grid;
        grid["fanin"] = g->layout.fanin;
        auto hw = nlohmann::json::array();
        for (const auto& row : g->params.hidden_w) hw.push_back(detail::cx_list(row));
        grid["hidden_w"] = std::move(hw);
        grid["hidden_b"] = detail::cx_list(g->params.hidden_b);
        grid["out_w"] = detail::cx_list(g->params.out_w);
        grid["out_b"] = detail::cx_json(g->params.out_b);
        j["grid"] = std::move(grid);
    }
    j["meta"] = meta;
    return j;
}

inline CancelerStack model_from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object() || j.value("format", "") != "sic-model")
            throw ParseError(ParseErrorKind::bad_model, "not a sic-model document");
        if (j.at("version").get<int>() != 1) throw ParseError(ParseErrorKind::bad_model, "unsupported model version");
        CancelerStack s;
        s.M = j.at("M").get<int>();
        s.norm.x_scale = j.at("norm").at("x_scale").get<double>();
        s.norm.r_scale = j.at("norm").at("r_scale").get<double>();
        s.h_lin = detail::cx_list_from(j.at("linear"));
        const auto kind = parse_canceler_kind(j.at("kind").get<std::string>());
        if (kind == CancelerKind::poly) {
            PolyCanceler p;
            p.P = j.at("P").get<int>();
            p.M = s.M;
            require_odd_order(p.P);
            p.coeffs = detail::cx_list_from(j.at("poly"));
            if (p.coeffs.size() != basis_length(p.P, p.M))
                throw ParseError(ParseErrorKind::bad_model, "polynomial coefficient count does not match P and M");
            s.nonlinear = std::move(p);
        } else if (is_grid(kind)) {
            const auto& g = j.at("grid");
            GridLayout L = build_layout(grid_kind(kind), j.at("N").get<int>(), s.M, j.at("W").get<int>());
            if (g.at("fanin").get<std::vector<std::vector<int>>>() != L.fanin)
                throw ParseError(ParseErrorKind::bad_model, "stored fan-in does not match the layout rule");
            GridParams p;
            for (const auto& row : g.at("hidden_w")) p.hidden_w.push_back(detail::cx_list_from(row));
            p.hidden_b = detail::cx_list_from(g.at("hidden_b"));
            p.out_w = detail::cx_list_from(g.at("out_w"));
            p.out_b = detail::cx_from(g.at("out_b"));
            if (!matches(L, p)) throw ParseError(ParseErrorKind::bad_model, "grid parameter shapes do not match layout");
            s.nonlinear = GridStage{std::move(L), std::move(p)};
        }
        check_stack(s);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(ParseErrorKind::bad_model, e.what());
    } catch (const ConfigError& e) {
        throw ParseError(ParseErrorKind::bad_model, e.what());
    } catch (const ContractError& e) {
        throw ParseError(ParseErrorKind::bad_model, e.what());
    }
}

inline std::string save_model(const CancelerStack& s, const nlohmann::json& meta = nlohmann::json::object()) {
    return model_to_json(s, meta).dump(2) + "\n";
}

inline CancelerStack load_model(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(ParseErrorKind::bad_model, e.what());
    }
    return model_from_json(j);
}

} // namespace sic
