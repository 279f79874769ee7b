#pragma once

// Batch commands behind the `sic` executable.
//
// An experiment is described by one JSON document with the sections below.
// Every key has a default; unknown keys are rejected.
//
//   dataset   source ("synthetic" | "file"), path, samples, memory, tx {...}
//   canceler  kind, N, M, W, P, ridge
//   hyper     lr, batch, epochs
//   protocol  train_fraction, folds, n_seeds, base_seed, cv, cv_epochs, cv_candidates
//   sweep     kind, N [...], W [...], cap, workers
//   output    dir
//
// Exit codes: 0 ok, 2 config/IO, 3 divergence, 4 incompatible inputs,
// 5 parse, 6 resource cap.

#include <sic/sic.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sic::app {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kOutputRootEnv = "SIC_OUTPUT_ROOT";

enum ExitCode : int {
    exit_ok = 0,
    exit_other = 1,
    exit_config = 2,
    exit_divergence = 3,
    exit_incompatible = 4,
    exit_parse = 5,
    exit_cap = 6,
};

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

inline json tx_to_json(const TxConfig& t) {
    json pa = json::array();
    for (const auto& row : t.pa_coeffs) pa.push_back(detail::cx_list(row));
    return {{"psi", t.psi},
            {"theta", t.theta},
            {"pa_order", t.pa_order},
            {"pa_memory", t.pa_memory},
            {"pa_coeffs", pa},
            {"si_channel", detail::cx_list(t.si_channel)},
            {"noise_power", t.noise_power},
            {"seed", t.seed},
            {"n_subcarriers", t.n_subcarriers},
            {"cp_fraction", t.cp_fraction}};
}

inline std::string default_output_dir() {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) return root;
    return "sic-out";
}

inline json default_config_json() {
    return {
        {"dataset",
         {{"source", "synthetic"}, {"path", ""}, {"samples", 20480}, {"memory", 13}, {"tx", tx_to_json(default_tx_config())}}},
        {"canceler", {{"kind", "lwgs"}, {"N", 9}, {"M", 13}, {"W", 5}, {"P", 5}, {"ridge", -1.0}}},
        {"hyper", {{"lr", 0.0045}, {"batch", 62}, {"epochs", 50}}},
        {"protocol",
         {{"train_fraction", 0.9},
          {"folds", 5},
          {"n_seeds", 20},
          {"base_seed", 0},
          {"cv", false},
          {"cv_epochs", 10},
          {"cv_candidates", json::array({json{{"lr", 0.0045}, {"batch", 62}}})}}},
        {"sweep", {{"kind", "lwgs"}, {"N", json::array({9, 10, 11, 12})}, {"W", json::array({4, 5, 6, 7})}, {"cap", 64}, {"workers", 1}}},
        {"output", {{"dir", default_output_dir()}}},
    };
}

namespace detail {

inline bool compatible(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) return true;
    return a.type() == b.type();
}

/// Overlays patch onto base; keys absent from base are errors.
inline void strict_merge(json& base, const json& patch, const std::string& path) {
    if (!patch.is_object()) throw ConfigError("config section '" + (path.empty() ? "<root>" : path) + "' must be an object");
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
        auto& slot = base[it.key()];
        if (slot.is_object() && it->is_object()) {
            strict_merge(slot, *it, key);
        } else {
            if (!compatible(slot, *it)) throw ConfigError("config key '" + key + "' has the wrong type");
            slot = *it;
        }
    }
}

template <class T>
T get_field(const json& j, const char* section, const char* key) {
    try {
        return j.at(section).at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config key '") + section + "." + key + "' is invalid");
    }
}

} // namespace detail

struct SweepConfig {
    CancelerKind kind = CancelerKind::lwgs;
    std::vector<int> N;
    std::vector<int> W;
    int cap = 64;
    int workers = 1;
};

struct ExperimentConfig {
    json resolved;
    bool synthetic = true;
    std::string dataset_path;
    std::size_t samples = 20480;
    int memory = 13;
    TxConfig tx;
    CancelerConfig canceler;
    TrainHyper hyper;
    SplitSpec split;
    int n_seeds = 20;
    std::uint64_t base_seed = 0;
    bool cv = false;
    int cv_epochs = 10;
    std::vector<HyperCandidate> cv_candidates;
    SweepConfig sweep;
    std::string out_dir;

    std::string digest_hex() const { return to_hex(sha256(resolved.dump())); }
};

inline TxConfig tx_from_json(const json& t) {
    TxConfig tx;
    try {
        tx.psi = t.at("psi").get<double>();
        tx.theta = t.at("theta").get<double>();
        tx.pa_order = t.at("pa_order").get<int>();
        tx.pa_memory = t.at("pa_memory").get<int>();
        tx.pa_coeffs.clear();
        for (const auto& row : t.at("pa_coeffs")) tx.pa_coeffs.push_back(sic::detail::cx_list_from(row));
        tx.si_channel = sic::detail::cx_list_from(t.at("si_channel"));
        tx.noise_power = t.at("noise_power").get<double>();
        tx.seed = t.at("seed").get<std::uint64_t>();
        tx.n_subcarriers = t.at("n_subcarriers").get<int>();
        tx.cp_fraction = t.at("cp_fraction").get<double>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config section 'dataset.tx' is invalid: ") + e.what());
    } catch (const ParseError& e) {
        throw ConfigError(std::string("config section 'dataset.tx' is invalid: ") + e.what());
    }
    validate(tx);
    return tx;
}

inline ExperimentConfig resolve_config(const json& overrides) {
    using detail::get_field;
    ExperimentConfig c;
    c.resolved = default_config_json();
    detail::strict_merge(c.resolved, overrides, "");
    const json& r = c.resolved;

    const auto source = get_field<std::string>(r, "dataset", "source");
    if (source != "synthetic" && source != "file")
        throw ConfigError("config key 'dataset.source' must be 'synthetic' or 'file'");
    c.synthetic = source == "synthetic";
    c.dataset_path = get_field<std::string>(r, "dataset", "path");
    if (!c.synthetic && c.dataset_path.empty()) throw ConfigError("config key 'dataset.path' is required for file source");
    const auto samples = get_field<long long>(r, "dataset", "samples");
    if (samples < 1) throw ConfigError("config key 'dataset.samples' must be positive");
    c.samples = static_cast<std::size_t>(samples);
    c.memory = get_field<int>(r, "dataset", "memory");
    if (c.memory < 1 || c.memory > 0xFFFF) throw ConfigError("config key 'dataset.memory' out of range");
    c.tx = tx_from_json(r.at("dataset").at("tx"));

    try {
        c.canceler.kind = parse_canceler_kind(get_field<std::string>(r, "canceler", "kind"));
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("config key 'canceler.kind': ") + e.what());
    }
    c.canceler.N = get_field<int>(r, "canceler", "N");
    c.canceler.M = get_field<int>(r, "canceler", "M");
    c.canceler.W = get_field<int>(r, "canceler", "W");
    c.canceler.P = get_field<int>(r, "canceler", "P");
    c.canceler.ridge = get_field<double>(r, "canceler", "ridge");
    if (c.canceler.M < 1) throw ConfigError("config key 'canceler.M' must be >= 1");
    if (c.canceler.kind == CancelerKind::poly && (c.canceler.P < 1 || c.canceler.P % 2 == 0))
        throw ConfigError("config key 'canceler.P' must be odd and >= 1");
    if (is_grid(c.canceler.kind)) {
        try {
            (void)c.canceler.layout();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("config keys 'canceler.N/W/M': ") + e.what());
        }
    }

    c.hyper.lr = get_field<double>(r, "hyper", "lr");
    c.hyper.batch = get_field<int>(r, "hyper", "batch");
    c.hyper.epochs = get_field<int>(r, "hyper", "epochs");
    if (!(c.hyper.lr > 0.0)) throw ConfigError("config key 'hyper.lr' must be positive");
    if (c.hyper.batch < 1) throw ConfigError("config key 'hyper.batch' must be >= 1");
    if (c.hyper.epochs < 0) throw ConfigError("config key 'hyper.epochs' must be >= 0");

    c.split.train_fraction = get_field<double>(r, "protocol", "train_fraction");
    c.split.fold_count = get_field<int>(r, "protocol", "folds");
    if (!(c.split.train_fraction > 0.0 && c.split.train_fraction < 1.0))
        throw ConfigError("config key 'protocol.train_fraction' must be in (0, 1)");
    if (c.split.fold_count < 2) throw ConfigError("config key 'protocol.folds' must be >= 2");
    c.n_seeds = get_field<int>(r, "protocol", "n_seeds");
    if (c.n_seeds < 1) throw ConfigError("config key 'protocol.n_seeds' must be >= 1");
    c.base_seed = get_field<std::uint64_t>(r, "protocol", "base_seed");
    c.cv = get_field<bool>(r, "protocol", "cv");
    c.cv_epochs = get_field<int>(r, "protocol", "cv_epochs");
    for (const auto& cand : r.at("protocol").at("cv_candidates")) {
        HyperCandidate h;
        try {
            h.lr = cand.at("lr").get<double>();
            h.batch = cand.at("batch").get<int>();
        } catch (const json::exception&) {
            throw ConfigError("config key 'protocol.cv_candidates' entries need lr and batch");
        }
        if (!(h.lr > 0.0) || h.batch < 1) throw ConfigError("config key 'protocol.cv_candidates' has an invalid entry");
        c.cv_candidates.push_back(h);
    }
    if (c.cv && c.cv_candidates.empty()) throw ConfigError("config key 'protocol.cv_candidates' is empty");

    try {
        c.sweep.kind = parse_canceler_kind(get_field<std::string>(r, "sweep", "kind"));
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("config key 'sweep.kind': ") + e.what());
    }
    c.sweep.N = get_field<std::vector<int>>(r, "sweep", "N");
    c.sweep.W = get_field<std::vector<int>>(r, "sweep", "W");
    c.sweep.cap = get_field<int>(r, "sweep", "cap");
    c.sweep.workers = get_field<int>(r, "sweep", "workers");
    if (c.sweep.workers < 1) throw ConfigError("config key 'sweep.workers' must be >= 1");

    c.out_dir = get_field<std::string>(r, "output", "dir");
    if (c.out_dir.empty()) throw ConfigError("config key 'output.dir' must be non-empty");
    return c;
}

inline json read_json_file(const std::filesystem::path& p) {
    try {
        return json::parse(sic::detail::read_file(p));
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + p.string() + "' is not valid JSON: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Helpers

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    sic::detail::write_file_atomic(path, text);
}

inline std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Wall-clock fields live only under "timing"; everything else is deterministic.
inline json timing_json(const std::string& started, const Stopwatch& sw) {
    return {{"started_utc", started}, {"wall_clock_s", sw.seconds()}};
}

inline void log(const std::string& msg) { std::clog << "[sic] " << msg << '\n'; }

inline Dataset load_experiment_dataset(const ExperimentConfig& c) {
    if (c.synthetic) return synth_dataset(c.tx, c.samples, c.memory);
    return read_dataset(c.dataset_path);
}

inline double mean_power(const std::vector<Cx>& v) {
    double acc = 0.0;
    for (auto c : v) acc += std::norm(c);
    return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

inline void require_memory_match(int model_M, int data_M, const char* what) {
    if (model_M != data_M)
        throw IncompatibleError(std::string(what) + ": canceler memory M=" + std::to_string(model_M) +
                                " differs from dataset memory M=" + std::to_string(data_M));
}

// ---------------------------------------------------------------------------
// Commands

inline std::filesystem::path cmd_synth(const ExperimentConfig& c, std::filesystem::path out, std::ostream& os) {
    if (!c.synthetic) throw ConfigError("synth: config key 'dataset.source' must be 'synthetic'");
    if (out.empty()) out = std::filesystem::path(c.out_dir) / "dataset.sic";
    const Dataset d = synth_dataset(c.tx, c.samples, c.memory);
    if (out.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(out.parent_path(), ec);
    }
    write_dataset(d, out);
    os << "samples " << d.n_samples() << "\n";
    os << "x_power " << mean_power(d.x) << "\n";
    os << "y_power " << mean_power(d.y) << "\n";
    os << "digest " << to_hex(d.provenance.digest) << "\n";
    log("wrote " + out.string());
    return out;
}

inline std::filesystem::path cmd_import(const std::filesystem::path& csv, int memory, std::filesystem::path out,
                                        std::ostream& os) {
    const Dataset d = import_csv(csv, memory);
    if (out.empty()) out = csv.parent_path() / (csv.stem().string() + ".sic");
    write_dataset(d, out);
    os << "samples " << d.n_samples() << "\n";
    os << "digest " << to_hex(d.provenance.digest) << "\n";
    log("imported " + csv.string() + " -> " + out.string());
    return out;
}

struct TrainOutputs {
    std::filesystem::path model;
    std::filesystem::path results;
    TrialResult trial;
};

inline TrainOutputs cmd_train(const ExperimentConfig& c, std::ostream& os) {
    const std::string started = utc_now();
    const Stopwatch sw;
    const Dataset data = load_experiment_dataset(c);
    require_memory_match(c.canceler.M, data.memory, "train");
    const Split split = split_dataset(data, c.split);

    TrainHyper hyper = c.hyper;
    hyper.seed = c.base_seed;
    json cv_json = nullptr;
    if (c.cv && is_grid(c.canceler.kind)) {
        const auto cv = kfold_cv(split.train, c.split.fold_count, c.cv_candidates, c.canceler, c.cv_epochs, c.base_seed);
        hyper.lr = cv.best.lr;
        hyper.batch = cv.best.batch;
        cv_json = {{"selected", {{"lr", cv.best.lr}, {"batch", cv.best.batch}}}, {"mean_val_mse", json::array()}};
        for (double m : cv.mean_val_mse) cv_json["mean_val_mse"].push_back(json_number(m));
    }

    const StackFit fit = fit_stack(split.train, c.canceler, hyper);
    const auto te = evaluate(fit.stack, split.test);
    const auto tr = evaluate(fit.stack, split.train);
    TrialResult trial;
    trial.seed = hyper.seed;
    trial.cancellation_db = te.total_db;
    trial.linear_db = te.linear_db;
    trial.test_mse = te.mse;
    trial.train_mse = tr.mse;
    trial.epochs = is_grid(c.canceler.kind) ? static_cast<int>(fit.train_mse.size()) : 0;

    const std::string digest = c.digest_hex();
    const std::string data_digest = to_hex(data.provenance.digest);
    const json meta = {{"config_digest", digest},
                       {"dataset_digest", data_digest},
                       {"train_fraction", c.split.train_fraction},
                       {"hyper", {{"lr", hyper.lr}, {"batch", hyper.batch}, {"epochs", hyper.epochs}, {"seed", hyper.seed}}}};

    const std::filesystem::path dir = c.out_dir;
    TrainOutputs out;
    out.model = dir / "model.json";
    out.results = dir / "results.json";
    out.trial = trial;
    write_text(out.model, save_model(fit.stack, meta));

    json results = {{"tool", "sic"},
                    {"version", kVersion},
                    {"command", "train"},
                    {"config_digest", digest},
                    {"dataset_digest", data_digest},
                    {"config", c.resolved},
                    {"selected_hyper", meta["hyper"]},
                    {"cross_validation", cv_json},
                    {"trials", json::array({to_json(trial)})},
                    {"stats", to_json(boxplot_stats({trial.cancellation_db}))},
                    {"history", {{"train_mse", fit.train_mse}}},
                    {"timing", timing_json(started, sw)}};
    write_text(out.results, results.dump(2) + "\n");
    write_text(dir / "trials.csv", trials_csv({trial}));

    os << "canceler " << canceler_label(c.canceler) << "\n";
    os << "test_cancellation_db " << te.total_db << "\n";
    os << "test_linear_db " << te.linear_db << "\n";
    os << "test_mse " << te.mse << "\n";
    log("wrote " + out.model.string() + " and " + out.results.string());
    return out;
}

struct EvalOutputs {
    SplitMetrics metrics;
    std::filesystem::path results;
};

inline EvalOutputs cmd_eval(const std::filesystem::path& model_path, const std::filesystem::path& dataset_path,
                            double train_fraction, const std::filesystem::path& out_dir, std::ostream& os) {
    const std::string started = utc_now();
    const Stopwatch sw;
    const std::string text = sic::detail::read_file(model_path);
    const json doc = [&] {
        try {
            return json::parse(text);
        } catch (const json::exception& e) {
            throw ParseError(ParseErrorKind::bad_model, model_path.string() + ": " + e.what());
        }
    }();
    const CancelerStack stack = model_from_json(doc);
    const Dataset data = read_dataset(dataset_path);
    require_memory_match(stack.M, data.memory, "eval");

    double fraction = train_fraction;
    if (!(fraction > 0.0) && doc.contains("meta") && doc["meta"].contains("train_fraction"))
        fraction = doc["meta"]["train_fraction"].get<double>();
    if (!(fraction > 0.0)) fraction = 0.9;
    const Split split = split_dataset(data, SplitSpec{fraction, 5, 0});
    const auto te = evaluate(stack, split.test);

    EvalOutputs out;
    out.metrics = te;
    out.results = out_dir / "eval.json";
    const json meta = doc.value("meta", json::object());
    json results = {{"tool", "sic"},
                    {"version", kVersion},
                    {"command", "eval"},
                    {"config_digest", meta.value("config_digest", "")},
                    {"model_sha256", to_hex(sha256(text))},
                    {"dataset_digest", to_hex(data.provenance.digest)},
                    {"kind", doc.value("kind", "")},
                    {"train_fraction", fraction},
                    {"test_cancellation_db", json_number(te.total_db)},
                    {"test_linear_db", json_number(te.linear_db)},
                    {"test_mse", json_number(te.mse)},
                    {"timing", timing_json(started, sw)}};
    write_text(out.results, results.dump(2) + "\n");
    os << "test_cancellation_db " << te.total_db << "\n";
    os << "test_linear_db " << te.linear_db << "\n";
    os << "test_mse " << te.mse << "\n";
    return out;
}

/// Parses "poly5", "poly:5", "ffnn7", "lwgs9", "mwgs12x5", "mwgs:12:5", "linear".
inline CancelerConfig parse_canceler_token(const std::string& token, int M) {
    std::string t;
    for (char ch : token) {
        if (ch == '(' || ch == ')' || ch == ' ') continue;
        if (ch == ':' || ch == ',') {
            // separator between N and W; a leading one after the kind name is dropped
            if (!t.empty() && std::isdigit(static_cast<unsigned char>(t.back()))) t.push_back('x');
            continue;
        }
        t.push_back(ch);
    }
    std::size_t i = 0;
    while (i < t.size() && std::isalpha(static_cast<unsigned char>(t[i])) && t[i] != 'x') ++i;
    CancelerConfig cc;
    cc.M = M;
    cc.kind = parse_canceler_kind(t.substr(0, i));
    const std::string rest = t.substr(i);
    auto num = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(s, &used);
            if (used != s.size()) throw ConfigError("");
            return v;
        } catch (...) {
            throw ConfigError("malformed canceler token '" + token + "'");
        }
    };
    switch (cc.kind) {
    case CancelerKind::linear:
        if (!rest.empty()) throw ConfigError("malformed canceler token '" + token + "'");
        break;
    case CancelerKind::poly: cc.P = num(rest); break;
    case CancelerKind::ffnn:
    case CancelerKind::lwgs: cc.N = num(rest); break;
    case CancelerKind::mwgs: {
        const auto x = rest.find('x');
        if (x == std::string::npos) throw ConfigError("mwgs token needs N and W, e.g. mwgs12x5");
        cc.N = num(rest.substr(0, x));
        cc.W = num(rest.substr(x + 1));
        break;
    }
    }
    if (cc.kind == CancelerKind::poly) require_odd_order(cc.P);
    if (is_grid(cc.kind)) (void)cc.layout();
    return cc;
}

struct FlopsOptions {
    std::vector<std::string> specs; // empty: the five reference rows
    std::string baseline;           // token naming the baseline row, "" for none
    int M = 13;
    std::string format = "csv";     // csv | json
};

inline std::vector<ComplexityReport> cmd_flops(const FlopsOptions& opt, std::ostream& os) {
    std::vector<CancelerConfig> configs;
    std::optional<std::size_t> base;
    if (opt.specs.empty()) {
        configs = default_table_configs(opt.M);
    } else {
        for (const auto& s : opt.specs) configs.push_back(parse_canceler_token(s, opt.M));
    }
    if (!opt.baseline.empty()) {
        const auto bc = parse_canceler_token(opt.baseline, opt.M);
        const auto label = canceler_label(bc);
        for (std::size_t i = 0; i < configs.size(); ++i)
            if (canceler_label(configs[i]) == label) base = i;
        if (!base) {
            configs.insert(configs.begin(), bc);
            base = 0;
        }
    } else if (opt.specs.empty()) {
        base = 0;
    }
    const auto rows = report_table(configs, base);
    if (opt.format == "json") {
        os << report_json(rows).dump(2) << "\n";
    } else if (opt.format == "csv") {
        os << report_csv(rows);
    } else {
        throw ConfigError("flops: --format must be csv or json");
    }
    return rows;
}

struct SweepCombo {
    CancelerConfig canceler;
};

inline std::vector<SweepCombo> sweep_combinations(const ExperimentConfig& c) {
    if (c.sweep.N.empty()) throw ConfigError("sweep: config key 'sweep.N' is empty");
    if (c.sweep.kind == CancelerKind::mwgs && c.sweep.W.empty()) throw ConfigError("sweep: config key 'sweep.W' is empty");
    if (!is_grid(c.sweep.kind)) throw ConfigError("sweep: config key 'sweep.kind' must be ffnn, lwgs or mwgs");
    std::vector<SweepCombo> combos;
    const std::vector<int> ws = c.sweep.kind == CancelerKind::mwgs ? c.sweep.W : std::vector<int>{0};
    for (int n : c.sweep.N)
        for (int w : ws) {
            CancelerConfig cc = c.canceler;
            cc.kind = c.sweep.kind;
            cc.N = n;
            cc.W = w;
            combos.push_back({cc});
        }
    return combos;
}

inline std::string file_label(const CancelerConfig& cc) {
    std::string s = to_string(cc.kind);
    s += "_N" + std::to_string(cc.N);
    if (cc.kind == CancelerKind::mwgs) s += "_W" + std::to_string(cc.W);
    return s;
}

inline json seed_run_json(const ExperimentConfig& c, const CancelerConfig& cc, const SeedRun& run,
                          const std::string& data_digest) {
    json trials = json::array();
    for (const auto& t : run.trials) trials.push_back(to_json(t));
    return {{"tool", "sic"},
            {"version", kVersion},
            {"command", "sweep"},
            {"config_digest", c.digest_hex()},
            {"dataset_digest", data_digest},
            {"canceler", {{"label", canceler_label(cc)}, {"kind", to_string(cc.kind)}, {"N", cc.N}, {"M", cc.M}, {"W", cc.W}}},
            {"trials", trials},
            {"completed_trials", run.completed},
            {"stats", run.stats ? to_json(*run.stats) : json(nullptr)}};
}

inline std::filesystem::path cmd_sweep(const ExperimentConfig& c, std::ostream& os) {
    const std::string started = utc_now();
    const Stopwatch sw;
    auto combos = sweep_combinations(c);
    if (combos.size() > static_cast<std::size_t>(std::max(c.sweep.cap, 0)))
        throw ResourceCapError("sweep: " + std::to_string(combos.size()) + " combinations exceed cap " +
                               std::to_string(c.sweep.cap));
    for (auto& cb : combos) (void)cb.canceler.layout(); // validate before any work

    const Dataset data = load_experiment_dataset(c);
    require_memory_match(c.canceler.M, data.memory, "sweep");
    const Split split = split_dataset(data, c.split);
    const std::string data_digest = to_hex(data.provenance.digest);
    const std::filesystem::path dir = c.out_dir;

    json index = {{"tool", "sic"},
                  {"version", kVersion},
                  {"command", "sweep"},
                  {"config_digest", c.digest_hex()},
                  {"dataset_digest", data_digest},
                  {"config", c.resolved},
                  {"combinations", json::array()}};
    for (const auto& cb : combos) {
        const auto run = run_seeds(split.train, split.test, cb.canceler, c.hyper, c.n_seeds, c.base_seed, c.sweep.workers);
        const std::string name = "results_" + file_label(cb.canceler) + ".json";
        write_text(dir / name, seed_run_json(c, cb.canceler, run, data_digest).dump(2) + "\n");
        write_text(dir / ("trials_" + file_label(cb.canceler) + ".csv"), trials_csv(run.trials));
        index["combinations"].push_back({{"label", canceler_label(cb.canceler)},
                                         {"file", name},
                                         {"completed_trials", run.completed},
                                         {"stats", run.stats ? to_json(*run.stats) : json(nullptr)}});
        os << canceler_label(cb.canceler) << " median_db "
           << (run.stats ? run.stats->median : std::numeric_limits<double>::quiet_NaN()) << " (" << run.completed << "/"
           << run.trials.size() << " trials)\n";
    }
    index["timing"] = timing_json(started, sw);
    const auto path = dir / "index.json";
    write_text(path, index.dump(2) + "\n");
    return path;
}

/// Runs fn and maps exceptions onto the documented exit codes.
inline int guarded(const std::function<void()>& fn, std::ostream& err = std::cerr) {
    try {
        fn();
        return exit_ok;
    } catch (const ResourceCapError& e) {
        err << "error: " << e.what() << "\n";
        return exit_cap;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_parse;
    } catch (const IncompatibleError& e) {
        err << "error: " << e.what() << "\n";
        return exit_incompatible;
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << "\n";
        return exit_divergence;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_other;
    }
}

} // namespace sic::app
