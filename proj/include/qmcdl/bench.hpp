#pragma once

// Benchmark maps y in [0,1]^d -> R, each paired with an independent oracle.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qmcdl/rng.hpp"
#include "qmcdl/variation.hpp"

namespace qmcdl {

// ---------------------------------------------------------------------------
// Kinked polynomial
// ---------------------------------------------------------------------------

/// f_{d,r}(y) = max(sum y_i - 1/2, 0)^r with d = y.size(). For r = 0 this is
/// the indicator of sum y_i > 1/2.
[[nodiscard]] inline double owen_f(std::size_t r, std::span<const double> y) {
    double s = -0.5;
    for (double v : y) s += v;
    if (s <= 0.0) return 0.0;
    if (r == 0) return 1.0;
    return std::pow(s, static_cast<double>(r));
}

// ---------------------------------------------------------------------------
// Sum of sines
// ---------------------------------------------------------------------------

inline constexpr std::size_t kSumOfSinesDim = 6;

/// sum_{i=1}^{6} sin(4 pi y_i).
[[nodiscard]] inline double sum_of_sines(std::span<const double> y) {
    if (y.size() != kSumOfSinesDim) throw std::invalid_argument("sum_of_sines: needs 6 coordinates");
    double s = 0.0;
    for (double v : y) s += std::sin(4.0 * std::numbers::pi * v);
    return s;
}

// ---------------------------------------------------------------------------
// Projectile with drag
// ---------------------------------------------------------------------------

inline constexpr std::size_t kProjectileDim = 7;
inline constexpr double kProjectileTimeStep = 0.00125;
inline constexpr double kProjectileTimeLimit = 1e3;

struct ProjectileParams {
    double density = 1.225;
    double radius = 0.23;
    double drag_coefficient = 0.1;
    double mass = 0.145;
    double height = 1.0;
    double angle_degrees = 30.0;
    double speed = 25.0;
    double gravity = 9.81;

    /// Nominal values scaled by (1 + eps (2 y_k - 1)), eps = 0.1, in the
    /// order density, radius, drag coefficient, mass, height, angle, speed.
    static ProjectileParams from_unit(std::span<const double> y) {
        if (y.size() != kProjectileDim) throw std::invalid_argument("projectile: needs 7 coordinates");
        constexpr double eps = 0.1;
        auto factor = [&](std::size_t k) { return 1.0 + eps * (2.0 * y[k] - 1.0); };
        ProjectileParams p;
        p.density *= factor(0);
        p.radius *= factor(1);
        p.drag_coefficient *= factor(2);
        p.mass *= factor(3);
        p.height *= factor(4);
        p.angle_degrees *= factor(5);
        p.speed *= factor(6);
        return p;
    }

    /// F_D / |v|^2 = rho C_d pi r^2 / (2 m).
    [[nodiscard]] double drag_per_speed_squared() const noexcept {
        return density * drag_coefficient * std::numbers::pi * radius * radius / (2.0 * mass);
    }
};

/// Horizontal range of the projectile: forward Euler on
///   x' = v,  v' = -F_D(v) e_1 - g e_2,  F_D = rho C_d pi r^2 |v|^2 / (2m),
/// from x(0) = (0, h), v(0) = v0 (cos a, sin a) until x_2 crosses zero; the
/// crossing is located by linear interpolation inside the last step.
[[nodiscard]] inline double projectile_range(const ProjectileParams& p, double dt = kProjectileTimeStep) {
    if (!(dt > 0.0)) throw std::invalid_argument("projectile_range: time step must be positive");
    const double angle = p.angle_degrees * std::numbers::pi / 180.0;
    const double drag = p.drag_per_speed_squared();
    double x1 = 0.0, x2 = p.height;
    double v1 = p.speed * std::cos(angle), v2 = p.speed * std::sin(angle);
    const auto max_steps = static_cast<std::uint64_t>(std::ceil(kProjectileTimeLimit / dt));
    for (std::uint64_t step = 0; step < max_steps; ++step) {
        const double force = drag * (v1 * v1 + v2 * v2);
        const double nx1 = x1 + dt * v1;
        const double nx2 = x2 + dt * v2;
        v1 -= dt * force;
        v2 -= dt * p.gravity;
        if (nx2 < 0.0) {
            const double frac = x2 / (x2 - nx2);
            return x1 + frac * (nx1 - x1);
        }
        x1 = nx1;
        x2 = nx2;
    }
    throw std::runtime_error("projectile_range: no ground crossing before t = 1000 s");
}

[[nodiscard]] inline double projectile_range(std::span<const double> y, double dt = kProjectileTimeStep) {
    return projectile_range(ProjectileParams::from_unit(y), dt);
}

/// Drag-free range v0 cos a (v0 sin a + sqrt(v0^2 sin^2 a + 2 g h)) / g.
[[nodiscard]] inline double ballistic_range(const ProjectileParams& p) {
    const double a = p.angle_degrees * std::numbers::pi / 180.0;
    const double vs = p.speed * std::sin(a);
    return p.speed * std::cos(a) * (vs + std::sqrt(vs * vs + 2.0 * p.gravity * p.height)) / p.gravity;
}

// ---------------------------------------------------------------------------
// Geometric-average basket call
// ---------------------------------------------------------------------------

/// Standard normal CDF through the complementary error function.
[[nodiscard]] inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Black-Scholes market for d assets. `volatility` is the d x d matrix
/// sigma_ij (row-major) feeding the closed form.
struct BasketParams {
    std::size_t assets = 0;
    std::vector<double> volatility;
    double maturity = 5.0;
    double strike = 0.08;
    double rate = 0.05;

    /// sigma = 1e-5 * identity, T = 5, K = 0.08, r = 0.05.
    static BasketParams standard(std::size_t d) {
        BasketParams p;
        p.assets = d;
        p.volatility.assign(d * d, 0.0);
        for (std::size_t i = 0; i < d; ++i) p.volatility[i * d + i] = 1e-5;
        return p;
    }

    void validate() const {
        if (assets == 0) throw std::invalid_argument("BasketParams: need at least one asset");
        if (volatility.size() != assets * assets) throw std::invalid_argument("BasketParams: sigma must be d x d");
        if (!(strike > 0.0)) throw std::invalid_argument("BasketParams: strike must be positive");
        if (!(maturity > 0.0)) throw std::invalid_argument("BasketParams: maturity must be positive");
    }
};

/// Intermediate quantities of the closed-form price.
struct BasketTerms {
    double nu = 0.0;
    double m = 0.0;
    double m_tilde = 0.0;
    double s_tilde = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

[[nodiscard]] inline BasketTerms basket_terms(std::span<const double> spot, const BasketParams& p) {
    p.validate();
    if (spot.size() != p.assets) throw std::invalid_argument("basket: spot size differs from asset count");
    const std::size_t d = p.assets;
    const double dd = static_cast<double>(d);
    BasketTerms t;
    double outer = 0.0, total = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double column = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double s = p.volatility[i * d + j];
            column += s * s;
        }
        outer += column * column;
        total += column;
    }
    t.nu = std::sqrt(outer) / dd;
    t.m = p.rate * p.maturity - total * p.maturity / (2.0 * dd);
    t.m_tilde = t.m + 0.5 * t.nu * t.nu;
    double log_sum = 0.0;
    for (double s : spot) log_sum += std::log(s);
    t.s_tilde = std::exp(log_sum / dd);
    t.d1 = (std::log(t.s_tilde / p.strike) + t.m + t.nu * t.nu) / t.nu;
    t.d2 = t.d1 - t.nu;
    return t;
}

/// e^{-rT} (s~ e^{m~} Phi(d1) - K Phi(d2)). Any non-positive spot makes the
/// geometric mean zero and the price zero.
[[nodiscard]] inline double basket_call_price(std::span<const double> spot, const BasketParams& p) {
    p.validate();
    if (spot.size() != p.assets) throw std::invalid_argument("basket: spot size differs from asset count");
    for (double s : spot) {
        if (!(s > 0.0)) return 0.0;
    }
    const BasketTerms t = basket_terms(spot, p);
    const double price =
        std::exp(-p.rate * p.maturity) * (t.s_tilde * std::exp(t.m_tilde) * normal_cdf(t.d1) -
                                          p.strike * normal_cdf(t.d2));
    return std::max(price, 0.0);
}

struct MonteCarloEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Discounted expected payoff max((prod S_i(T))^{1/d} - K, 0) with terminal
/// prices sampled exactly from geometric Brownian motion driven by
/// dS_i = r S_i dt + S_i sum_j sigma_ij dW_j:
///   log S_i(T) = log S_i + (r - sum_j sigma_ij^2 / 2) T + sqrt(T) sum_j sigma_ij Z_j.
[[nodiscard]] inline MonteCarloEstimate basket_call_monte_carlo(std::span<const double> spot,
                                                                const BasketParams& p, std::size_t paths,
                                                                std::uint64_t seed) {
    p.validate();
    if (spot.size() != p.assets) throw std::invalid_argument("basket: spot size differs from asset count");
    if (paths < 2) throw std::invalid_argument("basket_call_monte_carlo: need at least two paths");
    const std::size_t d = p.assets;
    for (double s : spot) {
        if (!(s > 0.0)) return {};
    }
    std::vector<double> drift(d);
    for (std::size_t i = 0; i < d; ++i) {
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) var += p.volatility[i * d + j] * p.volatility[i * d + j];
        drift[i] = std::log(spot[i]) + (p.rate - 0.5 * var) * p.maturity;
    }
    const double root_t = std::sqrt(p.maturity);
    const double discount = std::exp(-p.rate * p.maturity);
    SplitMix64 rng(seed);
    std::vector<double> z(d);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t path = 0; path < paths; ++path) {
        for (double& v : z) v = rng.normal();
        double log_mean = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            double shock = 0.0;
            for (std::size_t j = 0; j < d; ++j) shock += p.volatility[i * d + j] * z[j];
            log_mean += drift[i] + root_t * shock;
        }
        const double payoff = discount * std::max(std::exp(log_mean / static_cast<double>(d)) - p.strike, 0.0);
        sum += payoff;
        sum_sq += payoff * payoff;
    }
    const double n = static_cast<double>(paths);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return {mean, std::sqrt(var / n)};
}

/// Inputs below this are lifted to it before pricing, keeping log(S_i) finite.
inline constexpr double kSpotFloor = 1e-6;

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

/// A named benchmark with an independent evaluation path. `evaluate` and
/// `oracle` agree to within `tolerance` (absolute) on the unit cube.
struct BenchmarkMap {
    std::string name;
    std::size_t dim = 0;
    ScalarField evaluate;
    ScalarField oracle;
    double tolerance = 0.0;
    ScalarField mixed_partial;  // analytic, when known

    [[nodiscard]] double operator()(std::span<const double> y) const { return evaluate(y); }

    [[nodiscard]] GridFunction as_grid_function() const { return {dim, evaluate, mixed_partial}; }
};

namespace detail {

/// Classical RK4 with a fine step and cubic Hermite location of the ground
/// crossing; an independent route to the projectile range.
[[nodiscard]] inline double projectile_range_rk4(const ProjectileParams& p, double dt = 2e-4) {
    const double angle = p.angle_degrees * std::numbers::pi / 180.0;
    const double drag = p.drag_per_speed_squared();
    using State = std::array<double, 4>;
    auto rhs = [&](const State& s) {
        return State{s[2], s[3], -drag * (s[2] * s[2] + s[3] * s[3]), -p.gravity};
    };
    State s{0.0, p.height, p.speed * std::cos(angle), p.speed * std::sin(angle)};
    for (double t = 0.0; t < kProjectileTimeLimit; t += dt) {
        const State k1 = rhs(s);
        State tmp;
        for (int i = 0; i < 4; ++i) tmp[i] = s[i] + 0.5 * dt * k1[i];
        const State k2 = rhs(tmp);
        for (int i = 0; i < 4; ++i) tmp[i] = s[i] + 0.5 * dt * k2[i];
        const State k3 = rhs(tmp);
        for (int i = 0; i < 4; ++i) tmp[i] = s[i] + dt * k3[i];
        const State k4 = rhs(tmp);
        State next;
        for (int i = 0; i < 4; ++i) next[i] = s[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        if (next[1] < 0.0) {
            // Height is a cubic Hermite in the step; bisect for its zero.
            const double h0 = s[1], h1 = next[1], dh0 = s[3] * dt, dh1 = next[3] * dt;
            auto height = [&](double u) {
                const double u2 = u * u, u3 = u2 * u;
                return (2 * u3 - 3 * u2 + 1) * h0 + (u3 - 2 * u2 + u) * dh0 + (-2 * u3 + 3 * u2) * h1 +
                       (u3 - u2) * dh1;
            };
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (height(mid) > 0.0 ? lo : hi) = mid;
            }
            const double u = 0.5 * (lo + hi);
            const double u2 = u * u, u3 = u2 * u;
            return (2 * u3 - 3 * u2 + 1) * s[0] + (u3 - 2 * u2 + u) * s[2] * dt + (-2 * u3 + 3 * u2) * next[0] +
                   (u3 - u2) * next[2] * dt;
        }
        s = next;
    }
    throw std::runtime_error("projectile_range_rk4: no ground crossing");
}

inline std::vector<double> floored(std::span<const double> s) {
    std::vector<double> out(s.begin(), s.end());
    for (double& v : out) v = std::max(v, kSpotFloor);
    return out;
}

}  // namespace detail

/// Every registered benchmark:
///   linear        d=1  2 y
///   product2      d=2  y1 y2
///   owen_f34      d=3  f_{3,4}
///   relu_kink3    d=3  max(y1 + y2 + y3 - 1/2, 0), a one-neuron ReLU network
///   sum_of_sines  d=6
///   projectile    d=7  horizontal range, forward Euler with dt = 0.00125
///   basket5/7/9   d=5,7,9 geometric basket call, spots floored at 1e-6
[[nodiscard]] inline const std::vector<BenchmarkMap>& benchmarks() {
    static const std::vector<BenchmarkMap> registry = [] {
        std::vector<BenchmarkMap> maps;
        maps.push_back({"linear", 1, [](std::span<const double> y) { return 2.0 * y[0]; },
                        [](std::span<const double> y) { return y[0] + y[0]; }, 1e-15,
                        [](std::span<const double>) { return 2.0; }});
        maps.push_back({"product2", 2, [](std::span<const double> y) { return y[0] * y[1]; },
                        [](std::span<const double> y) { return std::exp(std::log(y[0]) + std::log(y[1])); }, 1e-14,
                        [](std::span<const double>) { return 1.0; }});
        maps.push_back({"owen_f34", 3, [](std::span<const double> y) { return owen_f(4, y); },
                        [](std::span<const double> y) {
                            const double s = y[0] + y[1] + y[2] - 0.5;
                            const double h = 0.5 * (s + std::abs(s));
                            return h * h * h * h;
                        },
                        1e-12, {}});
        maps.push_back({"relu_kink3", 3, [](std::span<const double> y) { return owen_f(1, y); },
                        [](std::span<const double> y) { return std::max(y[0] + y[1] + y[2] - 0.5, 0.0); }, 1e-15,
                        {}});
        maps.push_back({"sum_of_sines", kSumOfSinesDim, [](std::span<const double> y) { return sum_of_sines(y); },
                        [](std::span<const double> y) {
                            double s = 0.0;
                            for (double v : y) s += std::cos(4.0 * std::numbers::pi * v - std::numbers::pi / 2.0);
                            return s;
                        },
                        1e-12, {}});
        maps.push_back({"projectile", kProjectileDim,
                        [](std::span<const double> y) { return projectile_range(y); },
                        [](std::span<const double> y) {
                            return detail::projectile_range_rk4(ProjectileParams::from_unit(y));
                        },
                        0.05, {}});
        for (std::size_t d : {5, 7, 9}) {
            const BasketParams params = BasketParams::standard(d);
            maps.push_back({"basket" + std::to_string(d), d,
                            [params](std::span<const double> s) {
                                return basket_call_price(detail::floored(s), params);
                            },
                            [params](std::span<const double> s) {
                                const auto spot = detail::floored(s);
                                return basket_call_monte_carlo(spot, params, 2000, 0x5eed).mean;
                            },
                            1e-6, {}});
        }
        return maps;
    }();
    return registry;
}

[[nodiscard]] inline const BenchmarkMap& find_benchmark(std::string_view name) {
    for (const auto& map : benchmarks()) {
        if (map.name == name) return map;
    }
    throw std::invalid_argument("unknown benchmark '" + std::string(name) + "'");
}

}  // namespace qmcdl
