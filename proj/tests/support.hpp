#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <vector>

#include "qmcdl/net.hpp"
#include "qmcdl/rng.hpp"

namespace qmcdl::testing {

inline constexpr double kGradientStep = 1e-6;
inline constexpr double kRelativeErrorFloor = 1e-3;

struct GradientReport {
    double max_relative_error = 0.0;
    std::size_t entries = 0;
};

/// Compares backward() with central finite differences of
/// L(theta) = sum_i upstream[i] * forward(theta, batch)[i] in `mode`.
/// Relative error per entry: |g - fd| / max(|g|, |fd|, kRelativeErrorFloor).
inline GradientReport check_gradient(NetworkParams params, const std::vector<double>& batch,
                                     const std::vector<double>& upstream, Mode mode) {
    ForwardTape tape;
    (void)forward(params, batch, mode, tape);
    const std::vector<double> analytic = backward(params, tape, upstream);

    auto objective = [&](NetworkParams& p) {
        ForwardTape scratch;
        const auto out = forward(p, batch, mode, scratch);
        double sum = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) sum += upstream[i] * out[i];
        return sum;
    };

    GradientReport report;
    report.entries = analytic.size();
    for (std::size_t k = 0; k < analytic.size(); ++k) {
        const double original = params.values()[k];
        params.values()[k] = original + kGradientStep;
        const double plus = objective(params);
        params.values()[k] = original - kGradientStep;
        const double minus = objective(params);
        params.values()[k] = original;
        const double fd = (plus - minus) / (2 * kGradientStep);
        const double scale = std::max({std::abs(analytic[k]), std::abs(fd), kRelativeErrorFloor});
        report.max_relative_error = std::max(report.max_relative_error, std::abs(analytic[k] - fd) / scale);
    }
    return report;
}

/// Xavier weights plus random biases and normalization parameters, so that
/// every parameter has a generic gradient.
inline NetworkParams random_network(const NetworkConfig& cfg, std::uint64_t seed) {
    NetworkParams params = init_xavier(cfg, seed);
    SplitMix64 rng(seed ^ 0x5bd1e995ULL);
    const auto mask = params.weight_mask();
    auto values = params.values();
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!mask[k]) values[k] += rng.uniform(-0.5, 0.5);
    }
    return params;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    SplitMix64 rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

}  // namespace qmcdl::testing
