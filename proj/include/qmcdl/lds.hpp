#pragma once

// Low-discrepancy and pseudo-random point sets on the unit cube, and their
// star discrepancy.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qmcdl/rng.hpp"
#include "qmcdl/sobol_direction_numbers.hpp"

namespace qmcdl {

enum class SamplerFamily { van_der_corput, halton, sobol, uniform_random };

[[nodiscard]] inline std::string_view to_string(SamplerFamily family) {
    switch (family) {
        case SamplerFamily::van_der_corput: return "vdc";
        case SamplerFamily::halton: return "halton";
        case SamplerFamily::sobol: return "sobol";
        case SamplerFamily::uniform_random: return "random";
    }
    return "unknown";
}

[[nodiscard]] inline SamplerFamily parse_sampler_family(std::string_view name) {
    if (name == "vdc") return SamplerFamily::van_der_corput;
    if (name == "halton") return SamplerFamily::halton;
    if (name == "sobol") return SamplerFamily::sobol;
    if (name == "random") return SamplerFamily::uniform_random;
    throw std::invalid_argument("unknown sampler kind '" + std::string(name) + "'");
}

/// A sampler together with the parameters needed to regenerate its output:
/// the base for van der Corput, the seed for uniform random points and the
/// first sequence index for every kind. For random points the start index
/// skips that many points of the stream.
struct SamplerKind {
    SamplerFamily family = SamplerFamily::sobol;
    std::uint32_t base = 2;
    std::uint64_t seed = 0;
    std::uint64_t start_index = 1;

    static SamplerKind van_der_corput(std::uint32_t base = 2, std::uint64_t start = 1) {
        return {SamplerFamily::van_der_corput, base, 0, start};
    }
    static SamplerKind halton(std::uint64_t start = 1) {
        return {SamplerFamily::halton, 0, 0, start};
    }
    static SamplerKind sobol(std::uint64_t start = 1) {
        return {SamplerFamily::sobol, 0, 0, start};
    }
    static SamplerKind uniform_random(std::uint64_t seed, std::uint64_t start = 0) {
        return {SamplerFamily::uniform_random, 0, seed, start};
    }

    [[nodiscard]] std::size_t max_dim() const noexcept {
        switch (family) {
            case SamplerFamily::van_der_corput: return 1;
            case SamplerFamily::halton:
            case SamplerFamily::sobol: return detail::kSobolMaxDim;
            case SamplerFamily::uniform_random: return static_cast<std::size_t>(-1);
        }
        return 0;
    }

    friend bool operator==(const SamplerKind&, const SamplerKind&) = default;
};

/// An ordered list of points in [0,1)^dim stored row-major.
class PointSet {
public:
    PointSet() = default;
    PointSet(std::size_t dim, std::vector<double> coords, SamplerKind provenance = {})
        : dim_(dim), coords_(std::move(coords)), provenance_(provenance) {
        if (dim_ == 0) throw std::invalid_argument("PointSet: dimension must be positive");
        if (coords_.size() % dim_ != 0) {
            throw std::invalid_argument("PointSet: coordinate count is not a multiple of dim");
        }
    }

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
    [[nodiscard]] bool empty() const noexcept { return coords_.empty(); }
    [[nodiscard]] const SamplerKind& provenance() const noexcept { return provenance_; }

    [[nodiscard]] std::span<const double> point(std::size_t i) const {
        return {coords_.data() + i * dim_, dim_};
    }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return coords_[i * dim_ + j]; }
    [[nodiscard]] std::span<const double> coords() const noexcept { return coords_; }

    friend bool operator==(const PointSet&, const PointSet&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> coords_;
    SamplerKind provenance_;
};

/// The first `count` primes.
[[nodiscard]] inline std::vector<std::uint32_t> first_primes(std::size_t count) {
    std::vector<std::uint32_t> primes;
    for (std::uint32_t candidate = 2; primes.size() < count; ++candidate) {
        bool is_prime = true;
        for (std::uint32_t p : primes) {
            if (p * p > candidate) break;
            if (candidate % p == 0) {
                is_prime = false;
                break;
            }
        }
        if (is_prime) primes.push_back(candidate);
    }
    return primes;
}

/// Digit reversal of `index` in `base` about the radix point.
[[nodiscard]] inline double radical_inverse(std::uint64_t index, std::uint32_t base) {
    const double inv_base = 1.0 / base;
    double scale = inv_base;
    double result = 0.0;
    while (index > 0) {
        result += static_cast<double>(index % base) * scale;
        index /= base;
        scale *= inv_base;
    }
    return result;
}

namespace detail {

/// Direction numbers v_1..v_32 of one Sobol coordinate, scaled by 2^32.
[[nodiscard]] inline std::array<std::uint32_t, 32> sobol_directions(std::size_t coordinate) {
    std::array<std::uint32_t, 32> v{};
    if (coordinate == 0) {
        for (unsigned k = 0; k < 32; ++k) v[k] = 1U << (31 - k);
        return v;
    }
    const SobolPolynomial& poly = kSobolTable[coordinate - 1];
    const unsigned s = poly.degree;
    for (unsigned k = 0; k < s; ++k) v[k] = poly.initial[k] << (31 - k);
    for (unsigned k = s; k < 32; ++k) {
        std::uint32_t value = v[k - s] ^ (v[k - s] >> s);
        for (unsigned j = 1; j < s; ++j) {
            if ((poly.coefficients >> (s - 1 - j)) & 1U) value ^= v[k - j];
        }
        v[k] = value;
    }
    return v;
}

}  // namespace detail

/// The first `n` points of the sequence described by `kind`, starting at
/// kind.start_index. Deterministic kinds are pure functions of their inputs;
/// random points are pure functions of (seed, start index, dim, n).
[[nodiscard]] inline PointSet generate(const SamplerKind& kind, std::size_t dim, std::size_t n) {
    if (dim == 0) throw std::invalid_argument("generate: dimension must be positive");
    if (n == 0) throw std::invalid_argument("generate: n must be positive");
    if (dim > kind.max_dim()) {
        throw std::invalid_argument("generate: " + std::string(to_string(kind.family)) +
                                    " does not support dimension " + std::to_string(dim));
    }
    std::vector<double> coords(dim * n);
    const std::uint64_t start = kind.start_index;
    switch (kind.family) {
        case SamplerFamily::van_der_corput: {
            if (kind.base < 2) throw std::invalid_argument("generate: base must be at least 2");
            for (std::size_t i = 0; i < n; ++i) coords[i] = radical_inverse(start + i, kind.base);
            break;
        }
        case SamplerFamily::halton: {
            const auto bases = first_primes(dim);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < dim; ++j) {
                    coords[i * dim + j] = radical_inverse(start + i, bases[j]);
                }
            }
            break;
        }
        case SamplerFamily::sobol: {
            if (start + n - 1 > 0xffffffffULL) {
                throw std::invalid_argument("generate: Sobol index exceeds 2^32 - 1");
            }
            for (std::size_t j = 0; j < dim; ++j) {
                const auto v = detail::sobol_directions(j);
                for (std::size_t i = 0; i < n; ++i) {
                    std::uint64_t index = start + i;
                    std::uint32_t x = 0;
                    for (unsigned k = 0; index != 0; ++k, index >>= 1) {
                        if (index & 1U) x ^= v[k];
                    }
                    coords[i * dim + j] = static_cast<double>(x) * 0x1.0p-32;
                }
            }
            break;
        }
        case SamplerFamily::uniform_random: {
            for (std::size_t i = 0; i < n * dim; ++i) {
                coords[i] = to_unit_interval(splitmix64_at(kind.seed, start * dim + i));
            }
            break;
        }
    }
    return PointSet(dim, std::move(coords), kind);
}

// ---------------------------------------------------------------------------
// Star discrepancy
// ---------------------------------------------------------------------------

namespace detail {

/// Per-dimension critical values (sorted distinct coordinates followed by 1)
/// and the rank of every point's coordinate in that list.
struct CriticalGrid {
    std::vector<std::vector<double>> values;
    std::vector<std::vector<std::uint32_t>> ranks;  // ranks[j][i]
};

[[nodiscard]] inline CriticalGrid critical_grid(const PointSet& ps) {
    CriticalGrid grid;
    const std::size_t n = ps.size();
    grid.values.resize(ps.dim());
    grid.ranks.resize(ps.dim());
    for (std::size_t j = 0; j < ps.dim(); ++j) {
        auto& vals = grid.values[j];
        vals.reserve(n + 1);
        for (std::size_t i = 0; i < n; ++i) vals.push_back(ps(i, j));
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        auto& rk = grid.ranks[j];
        rk.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            rk[i] = static_cast<std::uint32_t>(
                std::lower_bound(vals.begin(), vals.end(), ps(i, j)) - vals.begin());
        }
        vals.push_back(1.0);
    }
    return grid;
}

inline void check_unit_cube(const PointSet& ps) {
    for (double c : ps.coords()) {
        if (!(c >= 0.0 && c <= 1.0)) {
            throw std::invalid_argument("star discrepancy: coordinates must lie in [0,1]");
        }
    }
}

/// Table A[a][b] = #{points with rank_x < a and rank_y < b}, a in [0, ux+1],
/// b in [0, uy+1], stored with row stride uy + 2.
class PrefixCounts2D {
public:
    PrefixCounts2D(std::size_t ux, std::size_t uy)
        : rows_(ux + 2), cols_(uy + 2), histogram_(rows_ * cols_, 0), table_(rows_ * cols_, 0) {}

    /// Inserts a batch of points given by rank pairs and refreshes the table.
    template <typename Ranks>
    void add(const Ranks& points) {
        for (const auto& [rx, ry] : points) ++histogram_[(rx + 1) * cols_ + (ry + 1)];
        for (std::size_t a = 1; a < rows_; ++a) {
            std::uint32_t running = 0;
            for (std::size_t b = 1; b < cols_; ++b) {
                running += histogram_[a * cols_ + b];
                table_[a * cols_ + b] = table_[(a - 1) * cols_ + b] + running;
            }
        }
    }

    [[nodiscard]] std::uint32_t at(std::size_t a, std::size_t b) const { return table_[a * cols_ + b]; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::uint32_t> histogram_;
    std::vector<std::uint32_t> table_;
};

/// Largest local discrepancy over the 2-D slice with box extent `z_last`
/// in the remaining dimensions (1 when there are none). Open counts give the
/// under-filled side at a corner; closed counts give the limit from above.
[[nodiscard]] inline double scan_slice(const CriticalGrid& grid, const PrefixCounts2D& counts,
                                       double n, double outer_volume, bool closed) {
    const auto& xs = grid.values[0];
    const auto& ys = grid.values[1];
    double best = 0.0;
    for (std::size_t a = 0; a < xs.size(); ++a) {
        const double vx = xs[a] * outer_volume;
        for (std::size_t b = 0; b < ys.size(); ++b) {
            const double vol = vx * ys[b];
            if (closed) {
                best = std::max(best, counts.at(a + 1, b + 1) / n - vol);
            } else {
                best = std::max(best, vol - counts.at(a, b) / n);
            }
        }
    }
    return best;
}

}  // namespace detail

/// Largest N accepted by star_discrepancy_exact for each dimension 1..3.
inline constexpr std::size_t kExactDiscrepancyMaxN[4] = {0, 1U << 20, 1U << 12, 1U << 10};

/// Exact star discrepancy sup_z |#{y in [0,z)}/N - vol[0,z)| by enumeration
/// of the critical grid. Supports d <= 3 and N up to kExactDiscrepancyMaxN[d].
[[nodiscard]] inline double star_discrepancy_exact(const PointSet& ps) {
    const std::size_t d = ps.dim();
    const std::size_t n = ps.size();
    if (d == 0 || d > 3) {
        throw std::invalid_argument("star_discrepancy_exact: dimension must be 1, 2 or 3");
    }
    if (n > kExactDiscrepancyMaxN[d]) {
        throw std::invalid_argument("star_discrepancy_exact: instance too large for exact enumeration");
    }
    if (n == 0) return 0.0;
    detail::check_unit_cube(ps);
    const double dn = static_cast<double>(n);

    if (d == 1) {
        std::vector<double> x(ps.coords().begin(), ps.coords().end());
        std::sort(x.begin(), x.end());
        double best = 0.0;
        // Over-filled side uses the count of points <= x[i]; ties collapse to the last.
        for (std::size_t i = 0; i < n; ++i) {
            best = std::max(best, x[i] - static_cast<double>(i) / dn);
            if (i + 1 == n || x[i + 1] != x[i]) best = std::max(best, (i + 1) / dn - x[i]);
        }
        return std::max(best, 1.0 - static_cast<double>(n) / dn);
    }

    const auto grid = detail::critical_grid(ps);
    const std::size_t ux = grid.values[0].size() - 1;
    const std::size_t uy = grid.values[1].size() - 1;

    if (d == 2) {
        detail::PrefixCounts2D counts(ux, uy);
        std::vector<std::pair<std::uint32_t, std::uint32_t>> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = {grid.ranks[0][i], grid.ranks[1][i]};
        counts.add(all);
        return std::max(detail::scan_slice(grid, counts, dn, 1.0, false),
                        detail::scan_slice(grid, counts, dn, 1.0, true));
    }

    // d == 3: sweep the third coordinate, adding points to the 2-D table as
    // the slab [0, z3) grows.
    const auto& zs = grid.values[2];
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> by_rank(zs.size());
    for (std::size_t i = 0; i < n; ++i) {
        by_rank[grid.ranks[2][i]].emplace_back(grid.ranks[0][i], grid.ranks[1][i]);
    }
    detail::PrefixCounts2D counts(ux, uy);
    double best = 0.0;
    for (std::size_t k = 0; k < zs.size(); ++k) {
        best = std::max(best, detail::scan_slice(grid, counts, dn, zs[k], false));
        if (!by_rank[k].empty()) counts.add(by_rank[k]);
        best = std::max(best, detail::scan_slice(grid, counts, dn, zs[k], true));
    }
    return best;
}

/// Certified lower bound on the star discrepancy from `trials` corners drawn
/// from the critical grid. When trials covers the whole grid, every corner is
/// visited and the result is exact.
[[nodiscard]] inline double star_discrepancy_lower_bound(const PointSet& ps, std::size_t trials,
                                                         std::uint64_t seed) {
    if (trials == 0 || ps.empty()) return 0.0;
    const std::size_t d = ps.dim();
    const std::size_t n = ps.size();
    const double dn = static_cast<double>(n);
    const auto grid = detail::critical_grid(ps);

    double grid_size = 1.0;
    for (const auto& vals : grid.values) grid_size *= static_cast<double>(vals.size());

    std::vector<std::size_t> corner(d, 0);
    auto evaluate = [&] {
        double vol = 1.0;
        for (std::size_t j = 0; j < d; ++j) vol *= grid.values[j][corner[j]];
        std::size_t open = 0, closed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            bool in_open = true, in_closed = true;
            for (std::size_t j = 0; j < d && in_closed; ++j) {
                const std::uint32_t r = grid.ranks[j][i];
                if (r >= corner[j]) in_open = false;
                if (r > corner[j]) in_closed = false;
            }
            open += in_open;
            closed += in_closed;
        }
        return std::max(vol - open / dn, closed / dn - vol);
    };

    double best = 0.0;
    if (static_cast<double>(trials) >= grid_size) {
        for (;;) {
            best = std::max(best, evaluate());
            std::size_t j = 0;
            while (j < d && ++corner[j] == grid.values[j].size()) corner[j++] = 0;
            if (j == d) break;
        }
        return best;
    }
    SplitMix64 rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t j = 0; j < d; ++j) corner[j] = rng.below(grid.values[j].size());
        best = std::max(best, evaluate());
    }
    return best;
}

}  // namespace qmcdl
