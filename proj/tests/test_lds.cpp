#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "qmcdl/exp.hpp"
#include "qmcdl/lds.hpp"

using namespace qmcdl;

namespace {

// Sobol coordinate j of point i built from the integer m_k form of the
// direction numbers: m_k = 2 a_1 m_{k-1} ^ 4 a_2 m_{k-2} ^ ... ^ 2^s m_{k-s} ^ m_{k-s},
// x = sum over set bits b of i of m_b / 2^b, combined with XOR on the 32-bit grid.
double sobol_oracle(std::uint64_t index, std::size_t coordinate) {
    std::vector<std::uint64_t> m(33, 0);
    if (coordinate == 0) {
        for (int k = 1; k <= 32; ++k) m[k] = 1;
    } else {
        const auto& poly = detail::kSobolTable[coordinate - 1];
        const int s = static_cast<int>(poly.degree);
        std::vector<int> a(s, 0);  // a[1..s-1]
        for (int j = 1; j < s; ++j) a[j] = (poly.coefficients >> (s - 1 - j)) & 1U;
        for (int k = 1; k <= 32; ++k) {
            if (k <= s) {
                m[k] = poly.initial[k - 1];
                continue;
            }
            std::uint64_t value = (m[k - s] << s) ^ m[k - s];
            for (int j = 1; j < s; ++j) {
                if (a[j]) value ^= m[k - j] << j;
            }
            m[k] = value;
        }
    }
    std::uint64_t acc = 0;
    for (int b = 1; b <= 32 && index; ++b, index >>= 1) {
        if (index & 1U) acc ^= m[b] << (32 - b);
    }
    return static_cast<double>(acc) / 4294967296.0;
}

// Star discrepancy by enumerating every corner of the critical grid and
// counting points directly.
double brute_discrepancy(const PointSet& ps) {
    const std::size_t d = ps.dim(), n = ps.size();
    std::vector<std::vector<double>> axes(d);
    for (std::size_t j = 0; j < d; ++j) {
        std::set<double> s{1.0};
        for (std::size_t i = 0; i < n; ++i) s.insert(ps(i, j));
        axes[j].assign(s.begin(), s.end());
    }
    std::vector<std::size_t> idx(d, 0);
    double best = 0.0;
    for (;;) {
        double vol = 1.0;
        for (std::size_t j = 0; j < d; ++j) vol *= axes[j][idx[j]];
        int open = 0, closed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            bool o = true, c = true;
            for (std::size_t j = 0; j < d; ++j) {
                o = o && ps(i, j) < axes[j][idx[j]];
                c = c && ps(i, j) <= axes[j][idx[j]];
            }
            open += o;
            closed += c;
        }
        best = std::max({best, vol - open / double(n), closed / double(n) - vol});
        std::size_t j = 0;
        while (j < d && ++idx[j] == axes[j].size()) idx[j++] = 0;
        if (j == d) break;
    }
    return best;
}

double discrepancy_slope(const SamplerKind& kind, std::size_t dim) {
    std::vector<std::size_t> ns;
    std::vector<double> ds;
    for (std::size_t n = 16; n <= 1024; n *= 2) {
        ns.push_back(n);
        ds.push_back(star_discrepancy_exact(generate(kind, dim, n)));
    }
    return fit_log_log(ns, ds).slope;
}

}  // namespace

TEST(Generate, VanDerCorputBase2) {
    const auto ps = generate(SamplerKind::van_der_corput(2), 1, 3);
    EXPECT_EQ(ps.coords()[0], 0.5);
    EXPECT_EQ(ps.coords()[1], 0.25);
    EXPECT_EQ(ps.coords()[2], 0.75);
}

TEST(Generate, VanDerCorputBase3) {
    const auto ps = generate(SamplerKind::van_der_corput(3), 1, 4);
    EXPECT_DOUBLE_EQ(ps(0, 0), 1.0 / 3);
    EXPECT_DOUBLE_EQ(ps(1, 0), 2.0 / 3);
    EXPECT_DOUBLE_EQ(ps(2, 0), 1.0 / 9);
    EXPECT_DOUBLE_EQ(ps(3, 0), 4.0 / 9);
}

TEST(Generate, HaltonFirstPoint) {
    const auto ps = generate(SamplerKind::halton(), 2, 1);
    EXPECT_EQ(ps(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(ps(0, 1), 1.0 / 3);
}

TEST(Generate, HaltonMatchesReferenceValues) {
    const double expected[4][3] = {{0.5, 0.3333333333333333, 0.2},
                                   {0.25, 0.6666666666666666, 0.4},
                                   {0.75, 0.1111111111111111, 0.6000000000000001},
                                   {0.125, 0.4444444444444444, 0.8}};
    const auto ps = generate(SamplerKind::halton(), 3, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(ps(i, j), expected[i][j], 1e-15);
    }
}

TEST(Generate, FirstPrimes) {
    EXPECT_EQ(first_primes(8), (std::vector<std::uint32_t>{2, 3, 5, 7, 11, 13, 17, 19}));
}

TEST(Generate, SobolFirstFourPointsIn2D) {
    const auto ps = generate(SamplerKind::sobol(), 2, 4);
    const double expected[4][2] = {{0.5, 0.5}, {0.25, 0.75}, {0.75, 0.25}, {0.125, 0.625}};
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(ps(i, 0), expected[i][0]);
        EXPECT_EQ(ps(i, 1), expected[i][1]);
    }
}

TEST(Generate, SobolMatchesReferenceValuesIn32D) {
    const double expected[5][32] = {
        {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5,
         0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5},
        {0.25, 0.75, 0.75, 0.75, 0.25, 0.25, 0.75, 0.25, 0.25, 0.25, 0.25, 0.25, 0.75, 0.75, 0.25, 0.75,
         0.25, 0.75, 0.25, 0.75, 0.75, 0.25, 0.75, 0.75, 0.75, 0.25, 0.75, 0.25, 0.75, 0.25, 0.75, 0.75},
        {0.75, 0.25, 0.25, 0.25, 0.75, 0.75, 0.25, 0.75, 0.75, 0.75, 0.75, 0.75, 0.25, 0.25, 0.75, 0.25,
         0.75, 0.25, 0.75, 0.25, 0.25, 0.75, 0.25, 0.25, 0.25, 0.75, 0.25, 0.75, 0.25, 0.75, 0.25, 0.25},
        {0.125, 0.625, 0.375, 0.125, 0.125, 0.375, 0.625, 0.625, 0.625, 0.875, 0.625, 0.125, 0.625, 0.375, 0.125, 0.125,
         0.125, 0.125, 0.625, 0.875, 0.875, 0.375, 0.625, 0.125, 0.125, 0.625, 0.625, 0.875, 0.875, 0.375, 0.625, 0.875},
        {0.625, 0.125, 0.875, 0.625, 0.625, 0.875, 0.125, 0.125, 0.125, 0.375, 0.125, 0.625, 0.125, 0.875, 0.625, 0.625,
         0.625, 0.625, 0.125, 0.375, 0.375, 0.875, 0.125, 0.625, 0.625, 0.125, 0.125, 0.375, 0.375, 0.875, 0.125, 0.375},
    };
    const auto ps = generate(SamplerKind::sobol(), 32, 5);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 32; ++j) EXPECT_EQ(ps(i, j), expected[i][j]) << i << "," << j;
    }
}

TEST(Generate, SobolStartIndexMatchesReferenceValue) {
    const double expected[7] = {0.0927734375, 0.1611328125, 0.4501953125, 0.9091796875,
                                0.9931640625, 0.1630859375, 0.0166015625};
    const auto ps = generate(SamplerKind::sobol(1000), 7, 1);
    for (std::size_t j = 0; j < 7; ++j) EXPECT_EQ(ps(0, j), expected[j]);
}

TEST(Generate, SobolMatchesIndependentConstruction) {
    const std::size_t n = 300;
    const auto ps = generate(SamplerKind::sobol(), 32, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 32; ++j) ASSERT_EQ(ps(i, j), sobol_oracle(i + 1, j)) << i << "," << j;
    }
    const auto far = generate(SamplerKind::sobol(123456789), 5, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(far(i, j), sobol_oracle(123456789 + i, j));
    }
}

TEST(Generate, SobolPrefixIsStratified) {
    // With the origin, the first 2^k points hit every interval [m/2^k, (m+1)/2^k) once per coordinate.
    const std::size_t k = 8, n = std::size_t{1} << k;
    const auto ps = generate(SamplerKind::sobol(), 12, n - 1);
    for (std::size_t j = 0; j < 12; ++j) {
        std::set<long> cells{0};
        for (std::size_t i = 0; i < ps.size(); ++i) cells.insert(std::lround(ps(i, j) * n));
        EXPECT_EQ(cells.size(), n);
    }
}

TEST(Generate, RandomMatchesSplitMixReferenceStream) {
    const double expected[4] = {0.7415648787718233, 0.1599103928769201, 0.27860113025513866, 0.34419071652363753};
    const auto ps = generate(SamplerKind::uniform_random(42), 1, 4);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(ps(i, 0), expected[i]);
    const auto tail = generate(SamplerKind::uniform_random(42, 2), 1, 2);
    EXPECT_EQ(tail(0, 0), expected[2]);
    EXPECT_EQ(tail(1, 0), expected[3]);
}

TEST(Generate, RandomPointsLieInUnitCube) {
    const auto ps = generate(SamplerKind::uniform_random(9), 5, 2000);
    for (double x : ps.coords()) {
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 1.0);
    }
}

TEST(Generate, Deterministic) {
    for (const auto& kind : {SamplerKind::sobol(), SamplerKind::halton(), SamplerKind::uniform_random(5),
                             SamplerKind::van_der_corput(5)}) {
        const std::size_t dim = kind.family == SamplerFamily::van_der_corput ? 1 : 4;
        EXPECT_EQ(generate(kind, dim, 257), generate(kind, dim, 257));
    }
}

TEST(Generate, RejectsBadArguments) {
    EXPECT_THROW((void)generate(SamplerKind::sobol(), 0, 4), std::invalid_argument);
    EXPECT_THROW((void)generate(SamplerKind::sobol(), 2, 0), std::invalid_argument);
    EXPECT_THROW((void)generate(SamplerKind::sobol(), 33, 4), std::invalid_argument);
    EXPECT_THROW((void)generate(SamplerKind::van_der_corput(2), 2, 4), std::invalid_argument);
    EXPECT_NO_THROW((void)generate(SamplerKind::sobol(), 32, 4));
}

TEST(Generate, SamplerNamesRoundTrip) {
    for (auto f : {SamplerFamily::van_der_corput, SamplerFamily::halton, SamplerFamily::sobol,
                   SamplerFamily::uniform_random}) {
        EXPECT_EQ(parse_sampler_family(to_string(f)), f);
    }
    EXPECT_THROW((void)parse_sampler_family("latin"), std::invalid_argument);
}

TEST(StarDiscrepancy, SinglePoint) {
    EXPECT_DOUBLE_EQ(star_discrepancy_exact(PointSet(1, {0.5})), 0.5);
}

TEST(StarDiscrepancy, VanDerCorputThreePoints) {
    EXPECT_DOUBLE_EQ(star_discrepancy_exact(generate(SamplerKind::van_der_corput(2), 1, 3)), 0.25);
}

TEST(StarDiscrepancy, MatchesReferenceValues) {
    EXPECT_NEAR(star_discrepancy_exact(generate(SamplerKind::sobol(), 2, 16)), 0.171875, 1e-15);
    EXPECT_NEAR(star_discrepancy_exact(generate(SamplerKind::sobol(), 2, 37)), 0.08899915540540543, 1e-15);
    EXPECT_NEAR(star_discrepancy_exact(generate(SamplerKind::halton(), 2, 10)), 0.26666666666666666, 1e-15);
    EXPECT_NEAR(star_discrepancy_exact(generate(SamplerKind::sobol(), 3, 20)), 0.23378906249999998, 1e-15);
    EXPECT_NEAR(star_discrepancy_exact(generate(SamplerKind::sobol(), 3, 512)), 0.014695361256599426, 1e-15);
    EXPECT_NEAR(star_discrepancy_exact(generate(SamplerKind::uniform_random(7), 3, 25)), 0.24073484620754348,
                1e-15);
}

TEST(StarDiscrepancy, AgreesWithBruteForceOnRandomSets) {
    for (std::size_t d = 1; d <= 3; ++d) {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            const std::size_t n = 5 + 7 * seed;
            const auto ps = generate(SamplerKind::uniform_random(seed * 31 + d), d, n);
            EXPECT_NEAR(star_discrepancy_exact(ps), brute_discrepancy(ps), 1e-14) << d << " " << seed;
        }
    }
}

TEST(StarDiscrepancy, HandlesRepeatedCoordinates) {
    const PointSet ps(2, {0.5, 0.5, 0.5, 0.25, 0.25, 0.5, 0.5, 0.5, 1.0, 0.0});
    EXPECT_NEAR(star_discrepancy_exact(ps), brute_discrepancy(ps), 1e-15);
}

TEST(StarDiscrepancy, RejectsInvalidInput) {
    EXPECT_THROW((void)star_discrepancy_exact(PointSet(2, {0.5, 1.5})), std::invalid_argument);
    EXPECT_THROW((void)star_discrepancy_exact(PointSet(2, {0.5, -0.1})), std::invalid_argument);
    EXPECT_THROW((void)star_discrepancy_exact(generate(SamplerKind::sobol(), 4, 8)), std::invalid_argument);
    EXPECT_THROW((void)star_discrepancy_exact(generate(SamplerKind::sobol(), 3, kExactDiscrepancyMaxN[3] + 1)),
                 std::invalid_argument);
}

TEST(StarDiscrepancy, LowerBoundWithZeroTrialsIsZero) {
    EXPECT_EQ(star_discrepancy_lower_bound(generate(SamplerKind::sobol(), 2, 64), 0, 1), 0.0);
}

TEST(StarDiscrepancy, LowerBoundIsExactWhenEveryCornerIsTried) {
    for (std::size_t n : {1, 3, 10, 33}) {
        const auto ps = generate(SamplerKind::uniform_random(n), 1, n);
        EXPECT_DOUBLE_EQ(star_discrepancy_lower_bound(ps, n + 1, 3), star_discrepancy_exact(ps));
    }
}

TEST(StarDiscrepancy, LowerBoundSobol64) {
    const auto ps = generate(SamplerKind::sobol(), 2, 64);
    const double exact = star_discrepancy_exact(ps);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const double lb = star_discrepancy_lower_bound(ps, 1000, seed);
        EXPECT_LE(lb, exact);
        EXPECT_GE(lb, 0.5 * exact);
    }
}

TEST(StarDiscrepancy, LowerBoundNeverExceedsExact) {
    for (std::size_t d = 1; d <= 3; ++d) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto ps = generate(SamplerKind::uniform_random(seed + 100 * d), d, 40);
            EXPECT_LE(star_discrepancy_lower_bound(ps, 50, seed), star_discrepancy_exact(ps) + 1e-15);
        }
    }
}

TEST(StarDiscrepancy, LowDiscrepancySequencesDecayFastIn1D) {
    EXPECT_LE(discrepancy_slope(SamplerKind::van_der_corput(2), 1), -0.8);
    EXPECT_LE(discrepancy_slope(SamplerKind::sobol(), 1), -0.8);
    EXPECT_LE(discrepancy_slope(SamplerKind::halton(), 1), -0.8);
}

TEST(StarDiscrepancy, LowDiscrepancySequencesDecayFastIn2D) {
    EXPECT_LE(discrepancy_slope(SamplerKind::sobol(), 2), -0.8);
    EXPECT_LE(discrepancy_slope(SamplerKind::halton(), 2), -0.8);
}

TEST(StarDiscrepancy, LowDiscrepancySequencesDecayFastIn3D) {
    EXPECT_LE(discrepancy_slope(SamplerKind::sobol(), 3), -0.8);
    EXPECT_LE(discrepancy_slope(SamplerKind::halton(), 3), -0.8);
}

TEST(StarDiscrepancy, RandomPointsDecayAtHalfRate) {
    for (std::size_t d = 1; d <= 3; ++d) {
        std::vector<std::size_t> ns;
        std::vector<double> means;
        for (std::size_t n = 16; n <= 1024; n *= 2) {
            double sum = 0.0;
            for (std::uint64_t seed = 0; seed < 20; ++seed) {
                sum += star_discrepancy_exact(generate(SamplerKind::uniform_random(derive_seed(seed, {d, n})), d, n));
            }
            ns.push_back(n);
            means.push_back(sum / 20);
        }
        EXPECT_NEAR(fit_log_log(ns, means).slope, -0.5, 0.15) << d;
    }
}

TEST(StarDiscrepancy, AcceptsPointsOnTheUpperFace) {
    for (std::size_t d = 1; d <= 3; ++d) {
        auto coords = generate(SamplerKind::uniform_random(d), d, 12).coords();
        std::vector<double> c(coords.begin(), coords.end());
        c[0] = 1.0;
        c[c.size() - 1] = 1.0;
        const PointSet ps(d, c);
        EXPECT_NEAR(star_discrepancy_exact(ps), brute_discrepancy(ps), 1e-15) << d;
    }
}
