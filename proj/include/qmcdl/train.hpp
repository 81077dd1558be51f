#pragma once

// Loss assembly, full-batch ADAM, ensemble selection over a hyperparameter
// grid and retraining statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "qmcdl/lds.hpp"
#include "qmcdl/net.hpp"
#include "qmcdl/parallel.hpp"
#include "qmcdl/rng.hpp"

namespace qmcdl {

/// Inputs with their targets.
struct Dataset {
    PointSet inputs;
    std::vector<double> targets;

    [[nodiscard]] std::size_t size() const noexcept { return targets.size(); }
    [[nodiscard]] std::size_t dim() const noexcept { return inputs.dim(); }
};

template <typename Map>
[[nodiscard]] Dataset make_dataset(PointSet inputs, Map&& map) {
    std::vector<double> targets(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) targets[i] = map(inputs.point(i));
    return {std::move(inputs), std::move(targets)};
}

struct TrainConfig {
    int loss_exponent = 2;
    double learning_rate = 1e-3;
    double weight_decay = 0.0;
    std::size_t epochs = 20000;
    std::uint64_t seed = 0;
    NetworkConfig network;

    void validate() const {
        if (loss_exponent != 1 && loss_exponent != 2) {
            throw std::invalid_argument("TrainConfig: loss exponent must be 1 or 2");
        }
        if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be positive");
        if (!(weight_decay >= 0.0)) throw std::invalid_argument("TrainConfig: weight decay must be non-negative");
        if (epochs < 1) throw std::invalid_argument("TrainConfig: epoch cap must be at least 1");
        network.validate();
    }

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// A run whose loss exceeds this (or is not finite) is abandoned.
inline constexpr double kDivergenceThreshold = 1e12;

/// lambda * ||theta_W||_2^2 over weight matrices only.
[[nodiscard]] inline double weight_penalty(const NetworkParams& params, double lambda) {
    if (lambda == 0.0) return 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < params.config().layer_count(); ++k) {
        for (double w : params.layer(k).weights) sum += w * w;
    }
    return lambda * sum;
}

namespace detail {

inline void check_dataset(const NetworkParams& params, const Dataset& data) {
    if (data.size() == 0) throw std::invalid_argument("empty data set");
    if (data.inputs.size() != data.targets.size()) throw std::invalid_argument("inputs and targets differ in length");
    if (data.dim() != params.config().input_dim) throw std::invalid_argument("data dimension differs from network input");
}

[[nodiscard]] inline double mean_power_residual(std::span<const double> outputs, std::span<const double> targets,
                                                int p) {
    double sum = 0.0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const double r = std::abs(outputs[i] - targets[i]);
        sum += (p == 1) ? r : r * r;
    }
    return sum / static_cast<double>(outputs.size());
}

}  // namespace detail

/// (1/N) sum |L(y_i) - L_theta(y_i)|^p + lambda ||theta_W||^2, network in
/// inference mode.
[[nodiscard]] inline double loss(const NetworkParams& params, const Dataset& data, int p, double lambda) {
    detail::check_dataset(params, data);
    if (p != 1 && p != 2) throw std::invalid_argument("loss: p must be 1 or 2");
    const auto out = forward(params, data.inputs.coords());
    return detail::mean_power_residual(out, data.targets, p) + weight_penalty(params, lambda);
}

/// Mean of |L - L_theta|^p over the set; with p = 1 and a large test set this
/// is the generalization-error estimate, on the training set it is E_T.
[[nodiscard]] inline double errors_on(const NetworkParams& params, const Dataset& data, int p = 1) {
    return loss(params, data, p, 0.0);
}

// ---------------------------------------------------------------------------
// ADAM
// ---------------------------------------------------------------------------

struct AdamState {
    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double epsilon = 1e-8;

    std::vector<double> first;
    std::vector<double> second;
    std::uint64_t step = 0;

    AdamState() = default;
    explicit AdamState(std::size_t size) : first(size, 0.0), second(size, 0.0) {}
};

/// One bias-corrected ADAM update in place.
inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr) {
    if (grads.size() != params.size() || state.first.size() != params.size() ||
        state.second.size() != params.size()) {
        throw std::invalid_argument("adam_step: shape mismatch");
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(AdamState::beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(AdamState::beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.first[i] = AdamState::beta1 * state.first[i] + (1.0 - AdamState::beta1) * g;
        state.second[i] = AdamState::beta2 * state.second[i] + (1.0 - AdamState::beta2) * g * g;
        const double m_hat = state.first[i] / c1;
        const double v_hat = state.second[i] / c2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + AdamState::epsilon);
    }
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainedModel {
    TrainConfig config;
    NetworkParams params;           // parameters at the lowest loss seen
    double training_error = 0.0;    // E_T (p = 1) of `params` on the training set
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
    bool diverged = false;
    std::vector<double> loss_history;  // regularized loss before each update

    [[nodiscard]] bool ok() const noexcept { return !diverged; }
};

/// Full-batch ADAM on the regularized loss for cfg.epochs updates. Returns
/// the parameters with the lowest loss seen; deterministic in cfg.seed.
/// A run whose loss becomes non-finite or exceeds kDivergenceThreshold stops
/// and is marked diverged.
[[nodiscard]] inline TrainedModel train_one(const Dataset& data, const TrainConfig& cfg) {
    cfg.validate();
    TrainedModel result;
    result.config = cfg;
    NetworkParams params = init_xavier(cfg.network, cfg.seed);
    detail::check_dataset(params, data);
    if (cfg.network.batch_norm && data.size() < 2) {
        throw std::invalid_argument("train_one: batch normalization needs at least two training points");
    }

    const std::size_t n = data.size();
    const auto mask = params.weight_mask();
    AdamState state(params.size());
    ForwardTape tape;
    std::vector<double> upstream(n);
    const double dn = static_cast<double>(n);
    result.loss_history.reserve(cfg.epochs + 1);
    std::optional<NetworkParams> best;

    for (std::size_t epoch = 0;; ++epoch) {
        const auto out = forward(params, data.inputs.coords(), Mode::training, tape);
        double data_term = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = out[i] - data.targets[i];
            if (cfg.loss_exponent == 2) {
                data_term += r * r;
                upstream[i] = 2.0 * r / dn;
            } else {
                data_term += std::abs(r);
                upstream[i] = (r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)) / dn;
            }
        }
        const double current = data_term / dn + weight_penalty(params, cfg.weight_decay);
        if (!std::isfinite(current) || current > kDivergenceThreshold) {
            result.diverged = true;
            break;
        }
        result.loss_history.push_back(current);
        if (current < result.best_loss) {
            result.best_loss = current;
            result.best_epoch = epoch;
            best = params;
        }
        if (epoch == cfg.epochs) break;

        auto grad = backward(params, tape, upstream);
        if (cfg.weight_decay != 0.0) {
            const auto values = std::as_const(params).values();
            for (std::size_t i = 0; i < grad.size(); ++i) {
                if (mask[i]) grad[i] += 2.0 * cfg.weight_decay * values[i];
            }
        }
        adam_step(params.values(), grad, state, cfg.learning_rate);
        result.epochs_run = epoch + 1;
    }

    result.params = best ? std::move(*best) : std::move(params);
    result.training_error = errors_on(result.params, data, 1);
    if (!std::isfinite(result.training_error)) result.diverged = true;
    return result;
}

// ---------------------------------------------------------------------------
// Ensemble training
// ---------------------------------------------------------------------------

/// Hyperparameter ensemble. Depth counts hidden layers and width is the
/// number of neurons per hidden layer.
struct HyperGrid {
    std::vector<double> learning_rates;
    std::vector<double> weight_decays;
    std::vector<std::size_t> depths;
    std::vector<std::size_t> widths;

    /// The full 3 x 4 x 3 x 3 = 108 cell ensemble.
    static HyperGrid table1() {
        return {{1e-1, 1e-2, 1e-3}, {1e-4, 1e-5, 1e-6, 1e-7}, {4, 8, 16}, {6, 12, 24}};
    }

    /// 12-cell subgrid for desk-scale runs: two learning rates, two weight
    /// decays, three widths, one depth.
    static HyperGrid fast(std::size_t depth = 4) { return {{1e-2, 1e-3}, {1e-6, 1e-7}, {depth}, {6, 12, 24}}; }

    static HyperGrid single(const TrainConfig& cfg) {
        return {{cfg.learning_rate}, {cfg.weight_decay}, {cfg.network.hidden_layers}, {cfg.network.width}};
    }

    [[nodiscard]] std::size_t size() const noexcept {
        return learning_rates.size() * weight_decays.size() * depths.size() * widths.size();
    }

    /// Cells in the order lr, weight decay, depth, width (width fastest),
    /// taking every other field from `base`.
    [[nodiscard]] std::vector<TrainConfig> cells(const TrainConfig& base) const {
        std::vector<TrainConfig> out;
        out.reserve(size());
        for (double lr : learning_rates)
            for (double wd : weight_decays)
                for (std::size_t depth : depths)
                    for (std::size_t width : widths) {
                        TrainConfig cfg = base;
                        cfg.learning_rate = lr;
                        cfg.weight_decay = wd;
                        cfg.network.hidden_layers = depth;
                        cfg.network.width = width;
                        out.push_back(cfg);
                    }
        return out;
    }
};

struct CellResult {
    TrainConfig config;
    bool diverged = false;
    double training_error = 0.0;
    double validation_error = 0.0;
};

struct EnsembleResult {
    std::size_t best_index = 0;
    TrainedModel best;
    std::vector<CellResult> cells;
};

using Trainer = std::function<TrainedModel(const Dataset&, const TrainConfig&)>;

/// Seed of cell `index` of an ensemble seeded with `seed`.
[[nodiscard]] inline std::uint64_t cell_seed(std::uint64_t seed, std::size_t index) {
    return derive_seed(seed, {0x63656c6cULL, index});
}

/// Trains one model per grid cell and keeps the one with the lowest
/// validation error (p = 1). Ties go to lower depth, then lower width, then
/// lower learning rate, then higher weight decay. Diverged cells are
/// recorded and excluded.
[[nodiscard]] inline EnsembleResult ensemble_select(const Dataset& train, const Dataset& validation,
                                                    const HyperGrid& grid, const TrainConfig& base,
                                                    std::uint64_t seed, std::size_t threads = 0,
                                                    const Trainer& trainer = train_one) {
    auto configs = grid.cells(base);
    if (configs.empty()) throw std::invalid_argument("ensemble_select: grid is empty");
    for (std::size_t i = 0; i < configs.size(); ++i) configs[i].seed = cell_seed(seed, i);

    std::vector<TrainedModel> models(configs.size());
    parallel_for(configs.size(), threads, [&](std::size_t i) { models[i] = trainer(train, configs[i]); });

    EnsembleResult result;
    result.cells.resize(configs.size());
    std::optional<std::size_t> best;
    auto key = [](const CellResult& c) {
        return std::make_tuple(c.validation_error, c.config.network.hidden_layers, c.config.network.width,
                               c.config.learning_rate, -c.config.weight_decay);
    };
    for (std::size_t i = 0; i < configs.size(); ++i) {
        CellResult& cell = result.cells[i];
        cell.config = configs[i];
        cell.diverged = models[i].diverged;
        cell.training_error = models[i].training_error;
        if (!cell.diverged) {
            cell.validation_error = errors_on(models[i].params, validation, 1);
            if (!std::isfinite(cell.validation_error)) cell.diverged = true;
        }
        if (cell.diverged) continue;
        if (!best || key(cell) < key(result.cells[*best])) best = i;
    }
    if (!best) throw std::runtime_error("ensemble_select: every cell diverged");
    result.best_index = *best;
    result.best = std::move(models[*best]);
    return result;
}

// ---------------------------------------------------------------------------
// Retraining statistics
// ---------------------------------------------------------------------------

struct RetrainStatistics {
    std::size_t completed = 0;
    std::size_t failed = 0;
    double mean_training_error = 0.0;
    double sd_training_error = 0.0;
    double mean_test_error = 0.0;
    double sd_test_error = 0.0;
    std::vector<double> training_errors;
    std::vector<double> test_errors;
};

/// Sample mean and standard deviation (n - 1 denominator; 0 for one value).
[[nodiscard]] inline std::pair<double, double> mean_and_sd(std::span<const double> xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

/// Seed of retraining run `repeat` under master seed `seed`.
[[nodiscard]] inline std::uint64_t repeat_seed(std::uint64_t seed, std::size_t repeat) {
    return derive_seed(seed, {0x72657074ULL, repeat});
}

/// `repeats` trainings of the same configuration that differ only in the
/// initialization seed. Diverged runs are counted and left out of the
/// statistics.
[[nodiscard]] inline RetrainStatistics retrain_statistics(const TrainConfig& cfg, const Dataset& train,
                                                          const Dataset& test, std::size_t repeats,
                                                          std::uint64_t seed, std::size_t threads = 0) {
    if (repeats < 1) throw std::invalid_argument("retrain_statistics: repeats must be at least 1");
    std::vector<TrainedModel> models(repeats);
    parallel_for(repeats, threads, [&](std::size_t r) {
        TrainConfig run = cfg;
        run.seed = repeat_seed(seed, r);
        models[r] = train_one(train, run);
    });
    RetrainStatistics stats;
    for (const auto& m : models) {
        if (m.diverged) {
            ++stats.failed;
            continue;
        }
        const double test_error = errors_on(m.params, test, 1);
        if (!std::isfinite(test_error)) {
            ++stats.failed;
            continue;
        }
        stats.training_errors.push_back(m.training_error);
        stats.test_errors.push_back(test_error);
    }
    stats.completed = stats.test_errors.size();
    std::tie(stats.mean_training_error, stats.sd_training_error) = mean_and_sd(stats.training_errors);
    std::tie(stats.mean_test_error, stats.sd_test_error) = mean_and_sd(stats.test_errors);
    return stats;
}

}  // namespace qmcdl
