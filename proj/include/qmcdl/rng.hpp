#pragma once

// SplitMix64 (Steele, Lea and Flood, "Fast splittable pseudorandom number
// generators", OOPSLA 2014). Counter based: output k of a stream with seed s
// is mix(s + (k + 1) * golden_gamma), so any element of a stream can be
// computed without generating its predecessors.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace qmcdl {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

[[nodiscard]] constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Element `counter` of the stream seeded with `seed`.
[[nodiscard]] constexpr std::uint64_t splitmix64_at(std::uint64_t seed,
                                                   std::uint64_t counter) noexcept {
    return splitmix64_mix(seed + (counter + 1) * kGoldenGamma);
}

/// Maps the top 53 bits of a 64-bit word onto [0, 1).
[[nodiscard]] constexpr double to_unit_interval(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class SplitMix64 {
public:
    using result_type = std::uint64_t;

    constexpr explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    constexpr result_type operator()() noexcept {
        state_ += kGoldenGamma;
        return splitmix64_mix(state_);
    }

    /// Uniform double on [0, 1).
    constexpr double uniform() noexcept { return to_unit_interval((*this)()); }

    /// Uniform double on [lo, hi).
    constexpr double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * uniform();
    }

    /// Uniform integer on [0, n); n must be positive. Lemire's multiply-shift.
    result_type below(result_type n) noexcept {
        return static_cast<result_type>(
            (static_cast<unsigned __int128>((*this)()) * n) >> 64);
    }

    /// Standard normal deviate by the Marsaglia polar method.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = 0.0, v = 0.0, s = 0.0;
        do {
            u = uniform(-1.0, 1.0);
            v = uniform(-1.0, 1.0);
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * factor;
        has_spare_ = true;
        return u * factor;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Derives an independent child seed from a parent seed and a path of tags.
/// Used to split one master seed into per-job streams.
[[nodiscard]] constexpr std::uint64_t derive_seed(
    std::uint64_t parent, std::initializer_list<std::uint64_t> tags) noexcept {
    std::uint64_t h = splitmix64_mix(parent ^ 0x6a09e667f3bcc909ULL);
    for (std::uint64_t tag : tags) {
        h = splitmix64_mix(h + kGoldenGamma * (tag + 1));
    }
    return h;
}

}  // namespace qmcdl
