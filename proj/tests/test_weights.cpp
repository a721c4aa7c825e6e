#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bootperc/weights.hpp"

using namespace bootperc;

TEST(PointMass, WeightsAndTotal) {
    const auto ws = make_point_mass(10.0, 4);
    ASSERT_EQ(ws.size(), 4u);
    for (double w : ws.weights()) EXPECT_EQ(w, 10.0);
    EXPECT_EQ(ws.total_weight(), 40.0);
    const auto one = make_point_mass(1.0, 1);
    EXPECT_EQ(one.total_weight(), 1.0);
}

TEST(PointMass, RejectsBadInput) {
    EXPECT_THROW(make_point_mass(0.0, 3), std::invalid_argument);
    EXPECT_THROW(make_point_mass(-1.0, 3), std::invalid_argument);
    EXPECT_THROW(make_point_mass(1.0, 0), std::invalid_argument);
}

TEST(PowerLawSequence, ExplicitFormula) {
    const auto ws = make_power_law(100, 2.0, 3.0, 0.0);
    EXPECT_DOUBLE_EQ(ws.min_weight(), 2.0);   // i = n
    EXPECT_DOUBLE_EQ(ws.max_weight(), 20.0);  // i = 1
    EXPECT_TRUE(std::is_sorted(ws.weights().begin(), ws.weights().end()));
    EXPECT_THROW(make_power_law(100, 2.0, 2.0), std::invalid_argument);
}

TEST(PowerLawSequence, OffsetForCapIsZeroAtBoundary) {
    // zeta = 1/(beta-1) needs no offset
    EXPECT_NEAR(power_law_offset_for_cap(1000000, 1.0, 2.5, 1.0 / 1.5), 0.0, 1e-6);
    const auto capped = make_power_law_capped(1000000, 1.0, 2.5, 2.0 / 3.0);
    EXPECT_NEAR(capped.max_weight(), 1e4, 1e-6);
}

TEST(EmpiricalCdf, Examples) {
    const auto pm = make_point_mass(10.0, 5);
    EXPECT_EQ(empirical_cdf(pm, 9.0), 0.0);
    EXPECT_EQ(empirical_cdf(pm, 10.0), 1.0);
    // w_i = 2 sqrt(100/i) <= 4 iff i >= 25
    EXPECT_DOUBLE_EQ(empirical_cdf(make_power_law(100, 2.0, 3.0), 4.0), 0.76);
}

TEST(EmpiricalCdf, MonotoneAndRightContinuous) {
    const auto ws = make_power_law(500, 1.0, 2.5);
    double prev = 0.0;
    for (double x = 0.5; x < 30.0; x += 0.01) {
        const double F = empirical_cdf(ws, x);
        EXPECT_GE(F, prev);
        prev = F;
    }
    for (double w : ws.weights()) {
        EXPECT_EQ(empirical_cdf(ws, w), empirical_cdf(ws, w + 1e-12 * w));
        EXPECT_LT(empirical_cdf(ws, std::nextafter(w, 0.0)), empirical_cdf(ws, w));
    }
}

TEST(Distribution, MeansMatchClosedForms) {
    EXPECT_NEAR(WeightDistribution::point_mass(10.0).mean(), 10.0, 1e-12);
    EXPECT_NEAR(WeightDistribution::mixture({1.0, 10.0}, {0.7, 0.3}).mean(), 3.7, 1e-12);
    const auto pl = WeightDistribution::power_law(2.5, 1.0);
    EXPECT_NEAR(pl.mean(), 1.5 / 0.5, 1e-12);
    EXPECT_NEAR(WeightDistribution::power_law(3.0, 2.0).mean(), 4.0, 1e-12);
    EXPECT_THROW(WeightDistribution::power_law(2.0, 1.0), std::invalid_argument);
}

TEST(Distribution, CdfIsProper) {
    for (const auto& dist : {WeightDistribution::point_mass(3.0),
                             WeightDistribution::mixture({1.0, 2.0, 7.0}, {0.2, 0.5, 0.3}),
                             WeightDistribution::power_law(2.7, 1.5)}) {
        double prev = 0.0;
        for (double x = 0.0; x < 1e4; x = x * 1.05 + 0.01) {
            const double F = dist.cdf(x);
            EXPECT_GE(F, prev - 1e-15);
            EXPECT_LE(F, 1.0);
            prev = F;
        }
        EXPECT_NEAR(dist.cdf(1e300), 1.0, 1e-12);
    }
}

TEST(CGamma, Examples) {
    EXPECT_EQ(c_gamma(WeightDistribution::point_mass(7.0), 0.3), 7.0);
    EXPECT_NEAR(c_gamma(WeightDistribution::power_law(3.0, 1.0), 0.01), 10.0, 1e-12);
    EXPECT_EQ(c_gamma(WeightDistribution::mixture({1.0, 10.0}, {0.7, 0.3}), 0.2), 10.0);
}

TEST(CGamma, ConsistentWithCdf) {
    for (const auto& dist : {WeightDistribution::power_law(2.5, 1.0), WeightDistribution::power_law(2.2, 3.0)}) {
        for (double g : {0.5, 0.1, 0.01, 0.001}) {
            const double C = c_gamma(dist, g);
            EXPECT_GE(dist.cdf(C), 1.0 - g - 1e-14);
            EXPECT_LT(dist.cdf(C - 1e-9 * C), 1.0 - g);
        }
    }
}

TEST(WGamma, Examples) {
    EXPECT_EQ(w_gamma(WeightDistribution::point_mass(4.0), 0.5), 4.0);
    EXPECT_NEAR(w_gamma(WeightDistribution::power_law(3.0, 1.0), 0.01), 0.2, 1e-12);
    // F(1) = 0.7 already reaches 1 - gamma at gamma = 0.3, so C_gamma = 1 and the tail is everything
    const auto mix = WeightDistribution::mixture({1.0, 10.0}, {0.7, 0.3});
    EXPECT_EQ(c_gamma(mix, 0.3), 1.0);
    EXPECT_NEAR(w_gamma(mix, 0.3), 3.7, 1e-12);
    EXPECT_NEAR(w_gamma(mix, 0.29), 3.0, 1e-12);
}

TEST(WGamma, MatchesQuadrature) {
    // midpoint rule on a log grid over [10, 1e7] plus the analytic remainder
    const auto dist = WeightDistribution::power_law(3.0, 1.0);
    double acc = 0.0;
    const int m = 200000;
    const double a = std::log(10.0), b = std::log(1e7);
    for (int k = 0; k < m; ++k) {
        const double u = a + (b - a) * (k + 0.5) / m;
        const double x = std::exp(u);
        acc += x * (2.0 * std::pow(x, -3.0)) * x * (b - a) / m;
    }
    acc += 2.0 / 1e7;
    EXPECT_NEAR(acc, w_gamma(dist, 0.01), 1e-8);
}

TEST(WGamma, VanishesAsGammaShrinks) {
    for (const auto& dist : {WeightDistribution::power_law(2.5, 1.0), WeightDistribution::power_law(2.9, 2.0)}) {
        double prev_w = INFINITY, prev_c = INFINITY;
        for (double g : {0.5, 0.1, 0.01, 0.001}) {
            const double C = c_gamma(dist, g);
            const double wg = w_gamma(dist, g);
            const double cp = C * dist.survival(C);
            EXPECT_LT(wg, prev_w);
            EXPECT_LT(cp, prev_c);
            prev_w = wg;
            prev_c = cp;
        }
    }
}

TEST(SizeBiased, MixtureFrequencies) {
    const auto dist = WeightDistribution::mixture({1.0, 3.0}, {0.5, 0.5});
    Rng rng(7);
    const int N = 1000000;
    int threes = 0;
    for (int i = 0; i < N; ++i) threes += dist.sample_size_biased(rng) == 3.0;
    const double p = 0.75, se = std::sqrt(p * (1 - p) / N);
    EXPECT_NEAR(static_cast<double>(threes) / N, p, 4 * se);
}

TEST(SizeBiased, PointMassAlwaysD) {
    const auto dist = WeightDistribution::point_mass(5.0);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(dist.sample_size_biased(rng), 5.0);
}

TEST(SizeBiased, PowerLawLogMean) {
    // beta = 3, x0 = 1: size-biased CDF 1 - 1/x, so log X ~ Exp(1)
    const auto dist = WeightDistribution::power_law(3.0, 1.0);
    const auto star = dist.size_biased();
    EXPECT_NEAR(star.cdf(4.0), 0.75, 1e-12);
    Rng rng(3);
    const int N = 200000;
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += std::log(dist.sample_size_biased(rng));
    EXPECT_NEAR(s / N, 1.0, 4.0 / std::sqrt(static_cast<double>(N)));
}

TEST(Regularity, PointMassFamilyIsExact) {
    const auto dist = WeightDistribution::point_mass(10.0);
    const std::vector<std::size_t> grid{10, 100, 1000};
    const auto rep = check_regularity([](std::size_t n) { return make_point_mass(10.0, n); }, dist, grid);
    for (const auto& row : rep.rows) {
        EXPECT_EQ(row.sup_distance, 0.0);
        EXPECT_EQ(row.mean_gap, 0.0);
    }
}

TEST(Regularity, PowerLawDistancesDecrease) {
    const auto dist = WeightDistribution::power_law(2.5, 1.0);
    const std::vector<std::size_t> grid{1000, 10000, 100000};
    const auto rep = check_regularity([](std::size_t n) { return make_power_law(n, 1.0, 2.5); }, dist, grid);
    ASSERT_EQ(rep.rows.size(), 3u);
    EXPECT_GT(rep.rows[0].sup_distance, rep.rows[1].sup_distance);
    EXPECT_GT(rep.rows[1].sup_distance, rep.rows[2].sup_distance);
    EXPECT_TRUE(rep.distances_nonincreasing);
}

TEST(WeightsCsv, RoundTrip) {
    const auto ws = make_power_law(50, 1.3, 2.4);
    std::stringstream ss;
    write_weights_csv(ss, ws);
    EXPECT_EQ(ss.str().substr(0, 7), "weight\n");
    const auto back = read_weights_csv(ss);
    ASSERT_EQ(back.size(), ws.size());
    for (std::size_t i = 0; i < ws.size(); ++i) EXPECT_EQ(back[i], ws[i]);
}
