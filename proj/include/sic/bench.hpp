#pragma once

// Experiment protocol: chronological splits, contiguous k-fold
// cross-validation, cancellation/MSE metrics, multi-seed trials and
// boxplot summaries.

#include <sic/cancelers/stack.hpp>
#include <sic/txchain.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace sic {

struct SplitSpec {
    double train_fraction = 0.9;
    int fold_count = 5;
    std::uint64_t seed = 0;
};

inline void validate(const SplitSpec& s) {
    if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0)) throw ConfigError("train_fraction must be in (0, 1)");
    if (s.fold_count < 2) throw ConfigError("fold_count must be >= 2");
}

struct Split {
    Dataset train;
    Dataset test;
};

inline std::size_t train_length(std::size_t n, double train_fraction) {
    return static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
}

/// First train_fraction of the samples for training, the rest for testing.
inline Split split_dataset(const Dataset& d, const SplitSpec& spec) {
    validate(spec);
    const std::size_t n = d.n_samples();
    if (n < 10 * static_cast<std::size_t>(d.memory))
        throw ConfigError("split_dataset: " + std::to_string(n) + " samples, need at least 10*M = " +
                          std::to_string(10 * d.memory));
    const std::size_t nt = train_length(n, spec.train_fraction);
    if (nt == 0 || nt >= n) throw ConfigError("split_dataset: degenerate split");
    Split s;
    for (Dataset* part : {&s.train, &s.test}) {
        part->memory = d.memory;
        part->provenance = d.provenance;
    }
    s.train.x.assign(d.x.begin(), d.x.begin() + static_cast<std::ptrdiff_t>(nt));
    s.train.y.assign(d.y.begin(), d.y.begin() + static_cast<std::ptrdiff_t>(nt));
    s.test.x.assign(d.x.begin() + static_cast<std::ptrdiff_t>(nt), d.x.end());
    s.test.y.assign(d.y.begin() + static_cast<std::ptrdiff_t>(nt), d.y.end());
    return s;
}

/// Fold f validates on [bounds[f], bounds[f+1]).
inline std::vector<std::size_t> fold_bounds(std::size_t n, int folds) {
    if (folds < 2) throw ConfigError("fold_count must be >= 2");
    std::vector<std::size_t> b(static_cast<std::size_t>(folds) + 1);
    for (int f = 0; f <= folds; ++f) b[f] = n * static_cast<std::size_t>(f) / static_cast<std::size_t>(folds);
    return b;
}

// ---------------------------------------------------------------------------
// Metrics

inline double mse(std::span<const Cx> pred, std::span<const Cx> target) {
    if (pred.size() != target.size()) throw ContractError("mse: length mismatch");
    if (pred.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += std::norm(pred[i] - target[i]);
    return acc / static_cast<double>(pred.size());
}

/// 10 log10(sum |y|^2 / sum |y - y_hat|^2). Zero residual gives +inf.
inline double cancellation_db(std::span<const Cx> y, std::span<const Cx> y_hat) {
    if (y.size() != y_hat.size() || y.empty()) throw ContractError("cancellation_db: lengths must match and be >= 1");
    double sig = 0.0, res = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        sig += std::norm(y[i]);
        res += std::norm(y[i] - y_hat[i]);
    }
    if (sig == 0.0) throw MetricError("cancellation_db: zero signal power, metric undefined");
    if (res == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(sig / res);
}

struct SplitMetrics {
    double total_db = 0.0;
    double linear_db = 0.0;
    double mse = 0.0;
};

/// Metrics over one split, skipping its first M-1 samples.
inline SplitMetrics evaluate(const CancelerStack& stack, const Dataset& part) {
    const auto skip = static_cast<std::size_t>(stack.M - 1);
    if (part.n_samples() <= skip) throw ConfigError("evaluate: split shorter than memory");
    const auto total = predict_total(stack, part.x);
    const auto lin = predict_linear(stack, part.x);
    const std::span<const Cx> y = std::span<const Cx>(part.y).subspan(skip);
    const std::span<const Cx> t = std::span<const Cx>(total).subspan(skip);
    const std::span<const Cx> l = std::span<const Cx>(lin).subspan(skip);
    return {cancellation_db(y, t), cancellation_db(y, l), mse(t, y)};
}

// ---------------------------------------------------------------------------
// Summary statistics

struct BoxplotStats {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    std::size_t n = 0;
};

/// Quantile by linear interpolation between order statistics (type 7).
inline double quantile_type7(std::span<const double> sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double a = sorted[lo], b = sorted[lo + 1];
    if (a == b) return a;
    return a + (h - static_cast<double>(lo)) * (b - a);
}

inline BoxplotStats boxplot_stats(std::vector<double> values) {
    if (values.empty()) throw MetricError("boxplot_stats: empty sample");
    std::sort(values.begin(), values.end());
    return {values.front(), quantile_type7(values, 0.25), quantile_type7(values, 0.5), quantile_type7(values, 0.75),
            values.back(), values.size()};
}

// ---------------------------------------------------------------------------
// Trials

struct TrialResult {
    std::uint64_t seed = 0;
    double cancellation_db = 0.0;
    double linear_db = 0.0;
    double train_mse = 0.0;
    double test_mse = 0.0;
    int epochs = 0;
    bool diverged = false;
    std::string note;
};

inline TrialResult run_trial(const Dataset& train, const Dataset& test, const CancelerConfig& cc, TrainHyper hyper,
                             std::uint64_t seed) {
    TrialResult r;
    r.seed = seed;
    hyper.seed = seed;
    try {
        const auto fit = fit_stack(train, cc, hyper);
        const auto te = evaluate(fit.stack, test);
        const auto tr = evaluate(fit.stack, train);
        r.cancellation_db = te.total_db;
        r.linear_db = te.linear_db;
        r.test_mse = te.mse;
        r.train_mse = tr.mse;
        r.epochs = is_grid(cc.kind) ? static_cast<int>(fit.train_mse.size()) : 0;
    } catch (const DivergenceError& e) {
        r.diverged = true;
        r.epochs = e.epoch();
        r.note = e.what();
        r.cancellation_db = r.linear_db = r.train_mse = r.test_mse = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

struct SeedRun {
    std::vector<TrialResult> trials;
    std::optional<BoxplotStats> stats; // over completed trials
    std::size_t completed = 0;
};

/// Trials for seeds base..base+n-1. Workers may run trials concurrently;
/// results are stored by seed index so the output never depends on scheduling.
inline SeedRun run_seeds(const Dataset& train, const Dataset& test, const CancelerConfig& cc, const TrainHyper& hyper,
                         int n_seeds, std::uint64_t base_seed, int workers = 1) {
    if (n_seeds < 1) throw ConfigError("n_seeds must be >= 1");
    SeedRun run;
    run.trials.resize(static_cast<std::size_t>(n_seeds));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next++; i < n_seeds; i = next++)
            run.trials[static_cast<std::size_t>(i)] = run_trial(train, test, cc, hyper, base_seed + static_cast<std::uint64_t>(i));
    };
    const int nw = std::clamp(workers, 1, n_seeds);
    if (nw == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < nw; ++w) pool.emplace_back(work);
    }
    std::vector<double> db;
    for (const auto& t : run.trials)
        if (!t.diverged) db.push_back(t.cancellation_db);
    run.completed = db.size();
    if (!db.empty()) run.stats = boxplot_stats(db);
    return run;
}

// ---------------------------------------------------------------------------
// Cross-validation

struct HyperCandidate {
    double lr = 0.0045;
    int batch = 62;
    bool operator==(const HyperCandidate&) const = default;
};

struct CvResult {
    HyperCandidate best;
    std::vector<double> mean_val_mse; // per candidate; +inf when any fold diverged
};

/// Contiguous k-fold selection of (lr, batch) by mean validation MSE of the
/// full two-stage prediction. Ties go to the lowest lr, then smallest batch.
inline CvResult kfold_cv(const Dataset& train, int fold_count, const std::vector<HyperCandidate>& candidates,
                         const CancelerConfig& cc, int epochs, std::uint64_t seed) {
    if (candidates.empty()) throw ConfigError("kfold_cv: no candidates");
    CvResult res;
    if (candidates.size() == 1) {
        res.best = candidates.front();
        return res;
    }
    const auto bounds = fold_bounds(train.n_samples(), fold_count);
    const auto M = static_cast<std::size_t>(cc.M);
    const std::span<const Cx> x = train.x, y = train.y;

    for (const auto& cand : candidates) {
        double acc = 0.0;
        for (int f = 0; f < fold_count && std::isfinite(acc); ++f) {
            const std::size_t a = bounds[f], b = bounds[f + 1];
            std::vector<Segment> segs;
            if (a >= M) segs.push_back({x.subspan(0, a), y.subspan(0, a)});
            if (train.n_samples() - b >= M) segs.push_back({x.subspan(b), y.subspan(b)});
            TrainHyper h{cand.lr, cand.batch, epochs, seed};
            try {
                const auto fit = fit_stack(segs, cc, h);
                Dataset val;
                val.memory = cc.M;
                val.x.assign(x.begin() + static_cast<std::ptrdiff_t>(a), x.begin() + static_cast<std::ptrdiff_t>(b));
                val.y.assign(y.begin() + static_cast<std::ptrdiff_t>(a), y.begin() + static_cast<std::ptrdiff_t>(b));
                const double m = evaluate(fit.stack, val).mse;
                acc += std::isfinite(m) ? m : std::numeric_limits<double>::infinity();
            } catch (const DivergenceError&) {
                acc = std::numeric_limits<double>::infinity();
            }
        }
        res.mean_val_mse.push_back(acc / fold_count);
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double a = res.mean_val_mse[i], b = res.mean_val_mse[best];
        const auto& ci = candidates[i];
        const auto& cb = candidates[best];
        if (a < b || (a == b && (ci.lr < cb.lr || (ci.lr == cb.lr && ci.batch < cb.batch)))) best = i;
    }
    res.best = candidates[best];
    return res;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json json_number(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline nlohmann::json to_json(const TrialResult& t) {
    return {{"seed", t.seed},           {"cancellation_db", json_number(t.cancellation_db)},
            {"linear_db", json_number(t.linear_db)}, {"train_mse", json_number(t.train_mse)},
            {"test_mse", json_number(t.test_mse)},   {"epochs", t.epochs},
            {"diverged", t.diverged},   {"note", t.note}};
}

inline nlohmann::json to_json(const BoxplotStats& s) {
    return {{"min", json_number(s.min)},       {"q1", json_number(s.q1)},   {"median", json_number(s.median)},
            {"q3", json_number(s.q3)},         {"max", json_number(s.max)}, {"n", s.n},
            {"iqr", json_number(s.q3 - s.q1)}, {"quantile_rule", "type7"}};
}

inline std::string trials_csv(const std::vector<TrialResult>& trials) {
    std::string out = "seed,cancellation_db,test_mse\n";
    char buf[128];
    for (const auto& t : trials) {
        std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g\n", static_cast<unsigned long long>(t.seed), t.cancellation_db,
                      t.test_mse);
        out += buf;
    }
    return out;
}

} // namespace sic
