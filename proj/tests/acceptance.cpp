// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//
//   acceptance [measured.csv]
//
// The measured-data criterion runs only when the CSV exists (argument, or
// the path compiled in as SIC_DEFAULT_MEASURED_CSV).

#include <sic/app.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace sic;
using sic::app::json;
namespace fs = std::filesystem;

namespace {

enum class Outcome { pass, fail, skip };

struct Verdict {
    Outcome outcome;
    std::string detail;
};

Verdict check(bool ok, std::string detail) { return {ok ? Outcome::pass : Outcome::fail, std::move(detail)}; }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_norm_error(const std::vector<Cx>& a, const std::vector<Cx>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return std::sqrt(num / den);
}

// 1 ---------------------------------------------------------------------------
Verdict table_one() {
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream sink;
    const auto rows = app::cmd_flops({}, sink);
    const double dt = seconds_since(t0);
    const std::vector<std::string> names{"Polynomial (P=5)", "CV-FFNN (7)", "LWGS (9)", "LWGS (10)", "MWGS (12,5)"};
    const std::vector<long> params{312, 238, 162, 184, 212};
    const std::vector<long> flops{1556, 1164, 780, 888, 1024};
    bool ok = rows.size() == 5;
    std::string bad;
    for (std::size_t i = 0; ok && i < 5; ++i) {
        // Row 0 FLOPs (the polynomial) depend on the accounting convention; it is reported, and matches here.
        if (rows[i].name != names[i] || rows[i].params_real != params[i] || rows[i].flops_total != flops[i]) {
            ok = false;
            bad = rows[i].name + " params " + std::to_string(rows[i].params_real) + " flops " +
                  std::to_string(rows[i].flops_total);
        }
    }
    const double lw = ok ? round2(*rows[2].pct_flop_reduction) : 0.0;
    const double mw = ok ? round2(*rows[4].pct_flop_reduction) : 0.0;
    ok = ok && lw == -49.87 && mw == -34.19 && dt < 1.0;
    std::string d = "params {312,238,162,184,212}, flops {1556,1164,780,888,1024}; LWGS(9) " + fmt("%.2f%%", lw) +
                    ", MWGS(12,5) " + fmt("%.2f%%", mw) + "; " + fmt("%.3f s", dt);
    if (!bad.empty()) d += "; mismatch at " + bad;
    return check(ok, d);
}

// 2 ---------------------------------------------------------------------------
Verdict closed_form_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    long layouts = 0, mismatches = 0;
    for (long M = 1; M <= 16; ++M) {
        for (long N = 1; N <= M; ++N) {
            const auto c = count_grid_complex_ops(build_lwgs_layout(int(N), int(M)));
            mismatches += !(c == closed_form(GridKind::lwgs, N, M)) || c.ca != c.cm;
            ++layouts;
        }
        for (long N = 1; N <= 32; ++N) {
            const auto f = count_grid_complex_ops(build_ffnn_layout(int(N), int(M)));
            mismatches += !(f == closed_form(GridKind::ffnn, N, M)) || f.ca != f.cm;
            ++layouts;
            if (N == 1) {
                const auto m = count_grid_complex_ops(build_mwgs_layout(1, 0, int(M)));
                mismatches += !(m == closed_form(GridKind::mwgs, 1, M, 0)) || m.ca != m.cm;
                ++layouts;
                continue;
            }
            for (long W = 1; W <= M - 1; ++W) {
                const auto m = count_grid_complex_ops(build_mwgs_layout(int(N), int(W), int(M)));
                mismatches += !(m == closed_form(GridKind::mwgs, N, M, W)) || m.ca != m.cm;
                ++layouts;
            }
        }
    }
    const double dt = seconds_since(t0);
    return check(mismatches == 0 && dt < 5.0, std::to_string(layouts) + " layouts, " + std::to_string(mismatches) +
                                                  " mismatches; " + fmt("%.3f s", dt));
}

// 3 ---------------------------------------------------------------------------
Verdict gradient_check() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(2024, "acceptance.grad");
    double worst = 0.0;
    for (int t = 0; t < 25; ++t) {
        const int M = 1 + int(rng.below(7));
        const int N = 1 + int(rng.below(5));
        GridLayout L;
        switch (t % 3) {
        case 0: L = build_ffnn_layout(N, M); break;
        case 1: L = build_lwgs_layout(std::min(N, M), M); break;
        default: L = M >= 2 ? build_mwgs_layout(N, 1 + int(rng.below(M - 1)), M) : build_mwgs_layout(1, 0, M);
        }
        GridParams p = zero_params(L);
        auto draw = [&] { return Cx{rng.uniform(-1, 1), rng.uniform(-1, 1)}; };
        for (auto& row : p.hidden_w)
            for (auto& c : row) c = draw();
        for (auto& c : p.hidden_b) c = draw();
        for (auto& c : p.out_w) c = draw();
        p.out_b = draw();
        std::vector<Cx> x(M);
        for (auto& v : x) v = {rng.normal(), rng.normal()};
        const Cx target{rng.normal(), rng.normal()};

        const auto g = nn_backward(L, p, x, nn_forward(L, p, x) - target);
        const auto fd = finite_diff_grad(
            [&](ConstParamView v) { return 0.5 * std::norm(nn_forward(L, unpack(L, v), x) - target); }, pack(p), 1e-6);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            num += (g[i] - fd[i]) * (g[i] - fd[i]);
            den += fd[i] * fd[i];
        }
        worst = std::max(worst, std::sqrt(num / den));
    }
    const double dt = seconds_since(t0);
    return check(worst < 1e-5 && dt < 10.0, "25 layouts, worst relative error " + fmt("%.2e", worst) + "; " + fmt("%.3f s", dt));
}

// 4 ---------------------------------------------------------------------------
Verdict composite_consistency() {
    Rng rng(77, "acceptance.composite");
    double worst = 0.0;
    const int configs = 30;
    for (int t = 0; t < configs; ++t) {
        TxConfig cfg;
        cfg.psi = rng.uniform(0.8, 1.2);
        cfg.theta = rng.uniform(-0.3, 0.3);
        cfg.pa_order = rng.below(2) ? 3 : 1;
        cfg.pa_memory = int(rng.below(3));
        cfg.pa_coeffs.assign(cfg.pa_memory + 1, std::vector<Cx>((cfg.pa_order + 1) / 2));
        for (auto& row : cfg.pa_coeffs)
            for (auto& c : row) c = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        cfg.si_channel.resize(3);
        for (auto& c : cfg.si_channel) c = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        std::vector<Cx> x(1000);
        for (auto& v : x) v = {rng.normal() * std::sqrt(0.5), rng.normal() * std::sqrt(0.5)};
        const auto chain = fir_filter(pa_hammerstein(iq_mixer(x, cfg.psi, cfg.theta), cfg), cfg.si_channel);
        worst = std::max(worst, rel_norm_error(si_composite(x, expand_composite(cfg)), chain));
    }
    return check(worst < 1e-9, std::to_string(configs) + " configs x 1000 samples, worst relative error " + fmt("%.2e", worst));
}

// 5 ---------------------------------------------------------------------------
Verdict matched_model() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto data = synth_dataset(default_tx_config(), 20480, 13);
    const auto split = split_dataset(data, {});
    TrainHyper hyper; // 0.0045 / 62 / 50 epochs

    auto score = [&](CancelerConfig cc) { return evaluate(fit_stack(split.train, cc, hyper).stack, split.test); };
    CancelerConfig poly;
    poly.kind = CancelerKind::poly;
    poly.P = 5;
    poly.M = 13;
    CancelerConfig lw;
    lw.kind = CancelerKind::lwgs;
    lw.N = 9;
    CancelerConfig mw;
    mw.kind = CancelerKind::mwgs;
    mw.N = 12;
    mw.W = 5;

    const auto p = score(poly);
    const double linear = p.linear_db;
    const auto l = score(lw);
    const auto m = score(mw);
    const double dt = seconds_since(t0);
    const bool ok = p.total_db > 60.0 && linear < p.total_db && l.total_db - linear >= 5.0 &&
                    m.total_db - linear >= 5.0 && dt < 300.0;
    return check(ok, "linear " + fmt("%.2f dB", linear) + ", poly " + fmt("%.2f dB", p.total_db) + ", LWGS(9) " +
                         fmt("%.2f dB", l.total_db) + " (" + fmt("%+.2f", l.total_db - linear) + "), MWGS(12,5) " +
                         fmt("%.2f dB", m.total_db) + " (" + fmt("%+.2f", m.total_db - linear) + "); " + fmt("%.1f s", dt));
}

// 6 ---------------------------------------------------------------------------
Verdict measured(const fs::path& csv) {
    if (csv.empty() || !fs::exists(csv))
        return {Outcome::skip, "external data absent (" + (csv.empty() ? std::string("no path") : csv.string()) + ")"};
    const auto data = import_csv(csv, 13);
    const auto split = split_dataset(data, {});
    CancelerConfig poly;
    poly.kind = CancelerKind::poly;
    poly.P = 5;
    const double poly_db = evaluate(fit_stack(split.train, poly, {}).stack, split.test).total_db;
    CancelerConfig lw;
    lw.kind = CancelerKind::lwgs;
    lw.N = 9;
    const auto run = run_seeds(split.train, split.test, lw, {}, 20, 0, 1);
    const double med = run.stats ? run.stats->median : std::numeric_limits<double>::quiet_NaN();
    const bool ok = std::fabs(poly_db - 44.45) <= 1.0 && std::fabs(med - 44.50) <= 1.0;
    return check(ok, std::to_string(data.n_samples()) + " samples; poly " + fmt("%.2f dB", poly_db) +
                         " (target 44.45 +-1), LWGS(9) 20-seed median " + fmt("%.2f dB", med) + " (target 44.50 +-1)");
}

// 7 ---------------------------------------------------------------------------
json strip_timing(json j) {
    j.erase("timing");
    return j;
}

std::string canonical_file(const fs::path& p) {
    const std::string text = sic::detail::read_file(p);
    if (p.extension() == ".json") return strip_timing(json::parse(text)).dump();
    return text;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = canonical_file(e.path());
    return files;
}

Verdict determinism() {
    const fs::path dir = fs::temp_directory_path() / "sic_acceptance_determinism";
    const json cfg = {{"dataset", {{"samples", 4000}}},
                      {"canceler", {{"kind", "mwgs"}, {"N", 6}, {"W", 4}}},
                      {"hyper", {{"epochs", 3}}},
                      {"protocol", {{"n_seeds", 3}, {"cv", true}, {"cv_epochs", 1},
                                    {"cv_candidates", {{{"lr", 0.0045}, {"batch", 62}}, {{"lr", 0.01}, {"batch", 31}}}}}},
                      {"sweep", {{"kind", "lwgs"}, {"N", {3, 5}}, {"workers", 2}}},
                      {"output", {{"dir", dir.string()}}}};
    std::map<std::string, std::string> runs[2];
    std::ostringstream sink;
    for (auto& r : runs) {
        fs::remove_all(dir);
        const auto c = app::resolve_config(cfg);
        const auto ds = app::cmd_synth(c, {}, sink);
        const auto tr = app::cmd_train(c, sink);
        app::cmd_eval(tr.model, ds, 0.0, dir, sink);
        app::cmd_sweep(c, sink);
        r = snapshot(dir);
    }
    fs::remove_all(dir);
    std::string differing;
    for (const auto& [name, body] : runs[0]) {
        auto it = runs[1].find(name);
        if (it == runs[1].end() || it->second != body) differing += " " + name;
    }
    const bool ok = differing.empty() && runs[0].size() == runs[1].size() && runs[0].size() >= 8;
    return check(ok, "train/eval/sweep twice, " + std::to_string(runs[0].size()) + " files compared (timing excluded)" +
                         (differing.empty() ? std::string() : "; differ:" + differing));
}

// 8 ---------------------------------------------------------------------------
Verdict metric_identities() {
    Rng rng(5, "acceptance.metrics");
    std::vector<Cx> y(2048), yh(2048);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = {rng.normal(), rng.normal()};
        yh[i] = y[i] + 0.003 * Cx{rng.normal(), rng.normal()};
    }
    bool ok = cancellation_db(y, std::vector<Cx>(y.size())) == 0.0;
    const double base = cancellation_db(y, yh);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const Cx c = std::polar(std::pow(10.0, rng.uniform(-6, 6)), rng.uniform(-3.14, 3.14));
        std::vector<Cx> ys(y.size()), yhs(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            ys[i] = c * y[i];
            yhs[i] = c * yh[i];
        }
        worst = std::max(worst, std::fabs(cancellation_db(ys, yhs) - base));
    }
    ok = ok && worst < 1e-12;

    ok = ok && crelu({1, 2}) == Cx(1, 2) && crelu({-1, -2}) == Cx(0, 0) && crelu({3, -4}) == Cx(3, 0);
    const auto g0 = crelu_grad({0, 0});
    ok = ok && g0.re == 0.0 && g0.im == 0.0;
    const std::vector<Cx> x{{0.3, -1.2}, {2, 0.5}, {-0.7, 0.1}};
    ok = ok && iq_mixer(x, 1.0, 0.0) == x;
    const auto flat = iq_mixer(x, 0.0, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) ok = ok && flat[i] == Cx(x[i].real(), 0.0);
    return check(ok, "Psi(y,0) = 0 dB; max scaling drift " + fmt("%.1e dB", worst) + "; CReLU and IQ identities");
}

} // namespace

int main(int argc, char** argv) {
#ifdef SIC_DEFAULT_MEASURED_CSV
    fs::path measured_csv = SIC_DEFAULT_MEASURED_CSV;
#else
    fs::path measured_csv;
#endif
    if (argc > 1) measured_csv = argv[1];

    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"1 complexity table", table_one},
        {"2 closed form vs enumeration", closed_form_equivalence},
        {"3 gradient vs finite differences", gradient_check},
        {"4 composite model consistency", composite_consistency},
        {"5 matched-model sanity", matched_model},
        {"6 measured data", [&] { return measured(measured_csv); }},
        {"7 determinism", determinism},
        {"8 metric identities", metric_identities},
    };

    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {Outcome::fail, std::string("exception: ") + e.what()};
        }
        const char* tag = v.outcome == Outcome::pass ? "PASS" : v.outcome == Outcome::fail ? "FAIL" : "SKIP";
        failures += v.outcome == Outcome::fail;
        std::cout << "[" << tag << "] " << name << ": " << v.detail << std::endl;
    }
    std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria met or skipped"))
              << std::endl;
    return failures ? 1 : 0;
}
