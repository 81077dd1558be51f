#pragma once

// Vitali and Hardy-Krause variation on [0,1]^d: ladder sums (lower bounds)
// and the mixed-partial recursion (an upper bound, exact for functions with
// continuous mixed partials).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qmcdl {

using ScalarField = std::function<double(std::span<const double>)>;

/// A map f: [0,1]^dim -> R, optionally with its analytic mixed partial
/// d^dim f / dy_1 ... dy_dim.
struct GridFunction {
    std::size_t dim = 0;
    ScalarField value;
    ScalarField mixed_partial;

    [[nodiscard]] double operator()(std::span<const double> y) const { return value(y); }
};

/// The restriction of f to the face y_axis = 1, as a function of the
/// remaining dim - 1 coordinates. The analytic mixed partial is not carried
/// over.
[[nodiscard]] inline GridFunction restrict_to_upper_face(const GridFunction& f, std::size_t axis) {
    if (f.dim < 2) throw std::invalid_argument("restrict_to_upper_face: needs dim >= 2");
    if (axis >= f.dim) throw std::invalid_argument("restrict_to_upper_face: axis out of range");
    GridFunction face;
    face.dim = f.dim - 1;
    face.value = [inner = f.value, axis, dim = f.dim](std::span<const double> y) {
        std::vector<double> full(dim);
        for (std::size_t j = 0, k = 0; j < dim; ++j) full[j] = (j == axis) ? 1.0 : y[k++];
        return inner(full);
    };
    return face;
}

/// A ladder on [lower, upper]: per dimension a strictly increasing list of
/// rungs in [lower, upper). The lower end is always a rung (it is inserted
/// when missing) and the successor of the last rung is upper.
class Ladder {
public:
    explicit Ladder(std::vector<std::vector<double>> rungs, double lower = 0.0, double upper = 1.0)
        : rungs_(std::move(rungs)), lower_(lower), upper_(upper) {
        if (rungs_.empty()) throw std::invalid_argument("Ladder: dimension must be positive");
        if (!(lower_ < upper_)) throw std::invalid_argument("Ladder: lower must be below upper");
        for (auto& r : rungs_) {
            if (r.empty() || r.front() > lower_) r.insert(r.begin(), lower_);
            for (std::size_t k = 0; k < r.size(); ++k) {
                if (r[k] < lower_ || r[k] >= upper_) {
                    throw std::invalid_argument("Ladder: rung outside [lower, upper)");
                }
                if (k > 0 && !(r[k] > r[k - 1])) {
                    throw std::invalid_argument("Ladder: rungs must be strictly increasing");
                }
            }
        }
    }

    /// Rungs {0, 1/m, ..., (m-1)/m} in every dimension.
    static Ladder uniform(std::size_t dim, std::size_t m) {
        std::vector<double> r(m);
        for (std::size_t k = 0; k < m; ++k) r[k] = static_cast<double>(k) / static_cast<double>(m);
        return Ladder(std::vector<std::vector<double>>(dim, r));
    }

    /// Rungs {0, 1/(2m), ..., (m-1)/(2m)}: the family used to show that a
    /// kink along sum(y) = 1/2 has unbounded variation.
    static Ladder kink(std::size_t dim, std::size_t m) {
        std::vector<double> r(m);
        for (std::size_t k = 0; k < m; ++k) r[k] = static_cast<double>(k) / (2.0 * static_cast<double>(m));
        return Ladder(std::vector<std::vector<double>>(dim, r));
    }

    [[nodiscard]] std::size_t dim() const noexcept { return rungs_.size(); }
    [[nodiscard]] const std::vector<double>& rungs(std::size_t j) const { return rungs_[j]; }
    [[nodiscard]] double upper() const noexcept { return upper_; }
    [[nodiscard]] double lower() const noexcept { return lower_; }

    [[nodiscard]] double successor(std::size_t j, std::size_t k) const {
        return k + 1 < rungs_[j].size() ? rungs_[j][k + 1] : upper_;
    }

    [[nodiscard]] double cell_count() const noexcept {
        double cells = 1.0;
        for (const auto& r : rungs_) cells *= static_cast<double>(r.size());
        return cells;
    }

    /// A copy with `value` inserted into dimension j.
    [[nodiscard]] Ladder refined(std::size_t j, double value) const {
        auto rungs = rungs_;
        auto& r = rungs.at(j);
        r.insert(std::upper_bound(r.begin(), r.end(), value), value);
        return Ladder(std::move(rungs), lower_, upper_);
    }

private:
    std::vector<std::vector<double>> rungs_;
    double lower_;
    double upper_;
};

inline constexpr double kMaxLadderCells = 1e6;

namespace detail {

/// Sum over cells of |alternating corner sum| for f sampled on the tensor
/// grid nodes[0] x ... x nodes[d-1]. Cells are visited in lexicographic order
/// with the last coordinate fastest.
[[nodiscard]] inline double alternating_cell_sum(const ScalarField& f,
                                                 const std::vector<std::vector<double>>& nodes) {
    const std::size_t d = nodes.size();
    std::vector<std::size_t> extent(d), stride(d);
    std::size_t total = 1;
    for (std::size_t j = d; j-- > 0;) {
        extent[j] = nodes[j].size();
        stride[j] = total;
        total *= extent[j];
    }
    std::vector<double> values(total);
    std::vector<double> y(d);
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        for (std::size_t j = 0; j < d; ++j) y[j] = nodes[j][idx[j]];
        values[flat] = f(y);
        for (std::size_t j = d; j-- > 0;) {
            if (++idx[j] < extent[j]) break;
            idx[j] = 0;
        }
    }

    // Corner offsets and signs: bit j set means coordinate j sits at the
    // successor, so the sign is (-1)^(number of coordinates at the rung).
    const std::size_t corners = std::size_t{1} << d;
    std::vector<std::size_t> offset(corners);
    std::vector<double> sign(corners);
    for (std::size_t mask = 0; mask < corners; ++mask) {
        std::size_t off = 0;
        int at_rung = 0;
        for (std::size_t j = 0; j < d; ++j) {
            if (mask & (std::size_t{1} << j)) {
                off += stride[j];
            } else {
                ++at_rung;
            }
        }
        offset[mask] = off;
        sign[mask] = (at_rung % 2 == 0) ? 1.0 : -1.0;
    }

    double sum = 0.0;
    std::fill(idx.begin(), idx.end(), 0);
    const bool any_cells = [&] {
        for (auto e : extent) if (e < 2) return false;
        return true;
    }();
    if (!any_cells) return 0.0;
    for (;;) {
        std::size_t base = 0;
        for (std::size_t j = 0; j < d; ++j) base += idx[j] * stride[j];
        double cell = 0.0;
        for (std::size_t mask = 0; mask < corners; ++mask) cell += sign[mask] * values[base + offset[mask]];
        sum += std::abs(cell);
        std::size_t j = d;
        while (j-- > 0) {
            if (++idx[j] + 1 < extent[j]) break;
            idx[j] = 0;
        }
        if (j == static_cast<std::size_t>(-1)) break;
    }
    return sum;
}

}  // namespace detail

/// Sum over the ladder cells of |sum_{v subset 1:d} (-1)^|v| f(y^v : y_+^{-v})|,
/// a lower bound of the Vitali variation of f.
[[nodiscard]] inline double vitali_variation_on_ladder(const GridFunction& f, const Ladder& ladder) {
    if (f.dim == 0 || ladder.dim() != f.dim) {
        throw std::invalid_argument("vitali_variation_on_ladder: ladder and function dimension differ");
    }
    if (ladder.cell_count() > kMaxLadderCells) {
        throw std::invalid_argument("vitali_variation_on_ladder: grid too large");
    }
    std::vector<std::vector<double>> nodes(f.dim);
    for (std::size_t j = 0; j < f.dim; ++j) {
        nodes[j] = ladder.rungs(j);
        nodes[j].push_back(ladder.upper());
    }
    return detail::alternating_cell_sum(f.value, nodes);
}

inline constexpr std::size_t kMaxRecursionDim = 4;

/// Upper bound of the Hardy-Krause variation (anchored at 1) by the
/// recursion  int |d^d f| dy + sum_i V(f restricted to y_i = 1), with total
/// variation as the one-dimensional base case.
///
/// The integral uses the midpoint rule on mesh^d cells: with the analytic
/// mixed partial when one is given, otherwise with the central difference
/// of f across each cell (step h = 1/mesh, centered at the midpoint). The
/// base case is the total variation of f sampled at k/mesh.
[[nodiscard]] inline double hardy_krause_upper_bound(const GridFunction& f, std::size_t mesh) {
    if (f.dim == 0) throw std::invalid_argument("hardy_krause_upper_bound: dimension must be positive");
    if (f.dim > kMaxRecursionDim) {
        throw std::invalid_argument("hardy_krause_upper_bound: dimension " + std::to_string(f.dim) +
                                    " exceeds " + std::to_string(kMaxRecursionDim));
    }
    if (mesh < 2) throw std::invalid_argument("hardy_krause_upper_bound: mesh must be at least 2");

    const double h = 1.0 / static_cast<double>(mesh);
    double integral = 0.0;
    if (f.mixed_partial) {
        const std::size_t d = f.dim;
        std::vector<std::size_t> idx(d, 0);
        std::vector<double> y(d);
        const double cell_volume = std::pow(h, static_cast<double>(d));
        for (;;) {
            for (std::size_t j = 0; j < d; ++j) y[j] = (static_cast<double>(idx[j]) + 0.5) * h;
            integral += std::abs(f.mixed_partial(y)) * cell_volume;
            std::size_t j = d;
            while (j-- > 0) {
                if (++idx[j] < mesh) break;
                idx[j] = 0;
            }
            if (j == static_cast<std::size_t>(-1)) break;
        }
    } else {
        std::vector<double> axis(mesh + 1);
        for (std::size_t k = 0; k <= mesh; ++k) axis[k] = static_cast<double>(k) * h;
        // Cell alternating sum / h^d is the mixed difference quotient; times h^d it cancels.
        integral = detail::alternating_cell_sum(f.value, std::vector<std::vector<double>>(f.dim, axis));
    }

    if (f.dim == 1) return integral;
    double faces = 0.0;
    for (std::size_t i = 0; i < f.dim; ++i) faces += hardy_krause_upper_bound(restrict_to_upper_face(f, i), mesh);
    return integral + faces;
}

/// Ladder lower bound of the Hardy-Krause variation: the Vitali ladder sum
/// on the uniform m-ladder of f and of every restriction of f to an upper
/// face {y_u = 1}, u a proper subset of 1:d.
[[nodiscard]] inline double hardy_krause_ladder_bound(const GridFunction& f, std::size_t m) {
    if (f.dim == 0) throw std::invalid_argument("hardy_krause_ladder_bound: dimension must be positive");
    if (m < 1) throw std::invalid_argument("hardy_krause_ladder_bound: m must be positive");
    const std::size_t d = f.dim;
    if (d >= 64) throw std::invalid_argument("hardy_krause_ladder_bound: dimension too large");
    double total = 0.0;
    const std::uint64_t full = (std::uint64_t{1} << d) - 1;
    for (std::uint64_t fixed = 0; fixed < full; ++fixed) {
        const std::size_t free_dim = d - static_cast<std::size_t>(__builtin_popcountll(fixed));
        GridFunction face;
        face.dim = free_dim;
        face.value = [inner = f.value, fixed, d](std::span<const double> y) {
            std::vector<double> x(d);
            for (std::size_t j = 0, k = 0; j < d; ++j) x[j] = (fixed >> j & 1U) ? 1.0 : y[k++];
            return inner(x);
        };
        total += vitali_variation_on_ladder(face, Ladder::uniform(free_dim, m));
    }
    return total;
}

}  // namespace qmcdl
