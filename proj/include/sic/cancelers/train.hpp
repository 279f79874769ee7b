#pragma once

#include <sic/cancelers/grid.hpp>
#include <sic/cancelers/linear.hpp>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sic {

/// Flattened training windows: window i occupies x[i*M .. i*M+M) with
/// x[i*M + d] = input(n - d).
struct WindowSet {
    int M = 1;
    std::vector<Cx> x;
    std::vector<Cx> target;

    std::size_t size() const noexcept { return target.size(); }
    std::span<const Cx> window(std::size_t i) const {
        return std::span<const Cx>(x).subspan(i * static_cast<std::size_t>(M), static_cast<std::size_t>(M));
    }
};

/// Windows from rows n >= M-1 of each segment, with inputs and targets scaled.
inline WindowSet make_windows(std::span<const Segment> segs, int M, double x_scale = 1.0, double y_scale = 1.0) {
    WindowSet w;
    w.M = M;
    const std::size_t rows = usable_rows(segs, M);
    w.x.reserve(rows * static_cast<std::size_t>(M));
    w.target.reserve(rows);
    for (const auto& s : segs)
        for (std::size_t n = static_cast<std::size_t>(M) - 1; n < s.x.size(); ++n) {
            for (int d = 0; d < M; ++d) w.x.push_back(x_scale * s.x[n - static_cast<std::size_t>(d)]);
            w.target.push_back(y_scale * s.y[n]);
        }
    return w;
}

struct TrainHyper {
    double lr = 0.0045;
    int batch = 62;
    int epochs = 50;
    std::uint64_t seed = 0;
};

struct TrainResult {
    GridParams params;
    std::vector<double> train_mse;
    std::vector<double> val_mse; // empty without a validation set
};

inline double window_mse(const GridLayout& L, const GridParams& p, const WindowSet& w) {
    if (w.size() == 0) return 0.0;
    ForwardCache cache;
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += std::norm(nn_forward(L, p, w.window(i), cache) - w.target[i]);
    return acc / static_cast<double>(w.size());
}

/// Mini-batch split-complex backprop with Adam. Batches are reshuffled each
/// epoch from the seeded stream; the final partial batch is kept.
inline TrainResult train_nn(const WindowSet& train, const GridLayout& L, const TrainHyper& hyper,
                            const WindowSet* validation = nullptr) {
    check_layout(L);
    if (train.M != L.M) throw ContractError("train_nn: window memory does not match layout");
    if (train.size() == 0) throw ConfigError("train_nn: empty training set");
    if (hyper.batch < 1 || hyper.epochs < 0 || !(hyper.lr > 0.0)) throw ConfigError("train_nn: invalid hyperparameters");

    Rng init_rng(hyper.seed, "train.init");
    Rng shuffle_rng(hyper.seed, "train.shuffle");

    TrainResult result;
    result.params = glorot_init(L, init_rng);
    ParamVector flat = pack(result.params);
    ParamVector grad(flat.size());
    AdamState adam(flat.size());
    AdamConfig adam_cfg;
    adam_cfg.lr = hyper.lr;

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    ForwardCache cache;
    const auto batch = static_cast<std::size_t>(hyper.batch);

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        long batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += batch, ++batch_index) {
            const std::size_t stop = std::min(order.size(), start + batch);
            const double scale = 1.0 / static_cast<double>(stop - start);
            std::fill(grad.begin(), grad.end(), 0.0);
            double loss = 0.0;
            for (std::size_t b = start; b < stop; ++b) {
                const auto idx = order[b];
                const auto xw = train.window(idx);
                const Cx err = nn_forward(L, result.params, xw, cache) - train.target[idx];
                loss += 0.5 * std::norm(err);
                nn_backward_accumulate(L, result.params, xw, cache, err, grad, scale);
            }
            if (!std::isfinite(loss))
                throw DivergenceError("training diverged: non-finite loss at epoch " + std::to_string(epoch + 1) +
                                          ", batch " + std::to_string(batch_index + 1),
                                      epoch + 1, batch_index + 1);
            adam_step(flat, grad, adam, adam_cfg);
            result.params = unpack(L, flat);
        }
        const double tr = window_mse(L, result.params, train);
        if (!std::isfinite(tr))
            throw DivergenceError("training diverged: non-finite training MSE after epoch " + std::to_string(epoch + 1),
                                  epoch + 1, batch_index);
        result.train_mse.push_back(tr);
        if (validation) result.val_mse.push_back(window_mse(L, result.params, *validation));
    }
    return result;
}

} // namespace sic
