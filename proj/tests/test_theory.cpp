#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "bootperc/theory.hpp"

using namespace bootperc;

// Reference values from tests/oracles/golden_values.py (mpmath, 50 digits).
namespace golden {
constexpr double psi2_at_1 = 0.26424111765711535681;
constexpr double point_mass_y = 0.99959902163595630025;
constexpr double mix13_y = 0.6070265934499808472;
constexpr double mix13_fraction = 0.53366918433399729132;
constexpr double mix110_y = 0.89682364558744884932;
constexpr double mix110_fraction = 0.6206475621100889258;
constexpr double powerlaw_y = 0.66588344254362069092;
constexpr double powerlaw_fraction = 0.38335906486617578412;
}  // namespace golden

TEST(Psi, Examples) {
    for (int r = 1; r < 6; ++r) EXPECT_EQ(psi_r(r, 0.0), 0.0);
    EXPECT_EQ(psi_r(0, 3.0), 1.0);
    for (double x : {0.001, 0.5, 2.0, 30.0}) EXPECT_NEAR(psi_r(1, x), -std::expm1(-x), 1e-15);
    EXPECT_NEAR(psi_r(2, 1.0), golden::psi2_at_1, 1e-16);
    EXPECT_NEAR(psi_r(2, 1.0), 1.0 - 2.0 * std::exp(-1.0), 1e-15);
    EXPECT_THROW(psi_r(2, -1.0), std::invalid_argument);
}

TEST(Psi, MatchesIncompleteGamma) {
    // psi_r(x) = P(r, x), the regularised lower incomplete gamma function
    for (int r = 1; r <= 8; ++r)
        for (double x = 0.01; x < 100.0; x *= 1.13) EXPECT_NEAR(psi_r(r, x), boost::math::gamma_p(r, x), 1e-13);
}

TEST(Psi, RangeAndMonotonicity) {
    for (int r = 1; r <= 6; ++r) {
        double prev = 0.0;
        for (double x = 0.0; x <= 100.0; x += 0.05) {
            const double v = psi_r(r, x);
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
            EXPECT_GE(v, prev);
            EXPECT_LE(psi_r(r + 1, x), v);
            double s = 0.0;
            for (int j = 0; j < r; ++j) s += poisson_pmf(j, x);
            EXPECT_NEAR(v + s, 1.0, 1e-12);
            prev = v;
        }
    }
}

TEST(Fr, Basics) {
    const auto star = WeightDistribution::mixture({1.0, 3.0}, {0.5, 0.5}).size_biased();
    EXPECT_DOUBLE_EQ(f_r(0.0, star, 0.3, 2), 0.3);
    const auto pm = WeightDistribution::point_mass(10.0);
    for (double y : {0.1, 0.4, 0.9})
        EXPECT_NEAR(f_r(y, pm.size_biased(), 0.2, 2), 0.8 * psi_r(2, 10.0 * y) + 0.2 - y, 1e-15);
}

TEST(Fr, NonPositiveAtOneOnRandomMixtures) {
    Rng rng(31);
    for (int k = 0; k < 200; ++k) {
        const std::size_t m = 1 + rng.below(5);
        std::vector<double> v, p;
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            v.push_back(0.1 + 20.0 * rng.uniform());
            p.push_back(0.05 + rng.uniform());
            s += p.back();
        }
        for (auto& x : p) x /= s;
        const auto star = WeightDistribution::mixture(v, p).size_biased();
        const int r = 1 + static_cast<int>(rng.below(4));
        EXPECT_LE(f_r(1.0, star, rng.uniform(), r), 1e-15);
    }
}

TEST(FixedPoint, PointMassGolden) {
    const auto fp = solve_fixed_point(WeightDistribution::point_mass(10.0).size_biased(), 0.2, 2);
    EXPECT_NEAR(fp.y_hat, golden::point_mass_y, 1e-11);
    EXPECT_LT(fp.residual, 1e-12);
    EXPECT_TRUE(fp.stable);
    EXPECT_NEAR(final_fraction(WeightDistribution::point_mass(10.0), fp.y_hat, 0.2, 2), golden::point_mass_y, 1e-11);
}

TEST(FixedPoint, MixtureGolden) {
    const auto d13 = WeightDistribution::mixture({1.0, 3.0}, {0.5, 0.5});
    const auto fp = solve_fixed_point(d13.size_biased(), 0.3, 2);
    EXPECT_NEAR(fp.y_hat, golden::mix13_y, 1e-11);
    EXPECT_NEAR(final_fraction(d13, fp.y_hat, 0.3, 2), golden::mix13_fraction, 1e-11);

    const auto d110 = WeightDistribution::mixture({1.0, 10.0}, {0.7, 0.3});
    const auto fp2 = solve_fixed_point(d110.size_biased(), 0.3, 2);
    EXPECT_NEAR(fp2.y_hat, golden::mix110_y, 1e-11);
    EXPECT_NEAR(final_fraction(d110, fp2.y_hat, 0.3, 2), golden::mix110_fraction, 1e-11);
}

TEST(FixedPoint, PowerLawGolden) {
    const auto fp = powerlaw_fixed_point(2.5, 1.0, 2);
    EXPECT_NEAR(fp.y_hat, golden::powerlaw_y, 1e-11);
    EXPECT_NEAR(powerlaw_fraction(2.5, 1.0, fp.y_hat, 2), golden::powerlaw_fraction, 1e-11);
    EXPECT_TRUE(fp.stable);
    EXPECT_NEAR(fp.derivative, fp.derivative_fd, 1e-6 * std::abs(fp.derivative));
}

TEST(FixedPoint, PEqualsOne) {
    const auto fp = solve_fixed_point(WeightDistribution::point_mass(2.0).size_biased(), 1.0, 2);
    EXPECT_EQ(fp.y_hat, 1.0);
    EXPECT_EQ(final_fraction(WeightDistribution::point_mass(2.0), 1.0, 1.0, 2), 1.0);
    const auto dc = check_derivative_condition(WeightDistribution::point_mass(2.0).size_biased(), 1.0, 1.0, 2);
    EXPECT_EQ(dc.derivative, -1.0);
    EXPECT_TRUE(dc.stable);
}

TEST(FixedPoint, FractionAtZeroIsP) {
    EXPECT_DOUBLE_EQ(final_fraction(WeightDistribution::mixture({1.0, 4.0}, {0.5, 0.5}), 0.0, 0.37, 2), 0.37);
}

TEST(FixedPoint, SignChangeAndScanMinimality) {
    for (const auto& dist : {WeightDistribution::point_mass(10.0), WeightDistribution::point_mass(3.0),
                             WeightDistribution::mixture({1.0, 10.0}, {0.7, 0.3}),
                             WeightDistribution::mixture({1.0, 3.0}, {0.5, 0.5})}) {
        const auto star = dist.size_biased();
        for (double p : {0.05, 0.2, 0.5}) {
            const auto fp = solve_fixed_point(star, p, 2);
            const double h = 10 * 1e-12;
            EXPECT_GE(f_r(fp.y_hat - h, star, p, 2), 0.0);
            EXPECT_LE(f_r(fp.y_hat + h, star, p, 2), 0.0);
            // every scanned point left of the bracket is strictly positive
            ASSERT_FALSE(fp.scan.values.empty());
            for (std::size_t k = 0; k + 1 < fp.scan.values.size(); ++k) EXPECT_GT(fp.scan.values[k], 0.0);
            EXPECT_LE(fp.scan.values.back(), 0.0);
        }
    }
}

TEST(FixedPoint, DerivativeMatchesFiniteDifference) {
    for (const auto& dist : {WeightDistribution::point_mass(10.0), WeightDistribution::mixture({1.0, 10.0}, {0.7, 0.3})}) {
        const auto star = dist.size_biased();
        for (double y : {0.2, 0.5, 0.8}) {
            const double a = f_r_derivative(y, star, 0.2, 2);
            EXPECT_NEAR(a, f_r_derivative_fd(y, star, 0.2, 2), 1e-6 * std::max(1.0, std::abs(a)));
        }
    }
}

TEST(DerivativeCondition, PointMassStable) {
    const auto star = WeightDistribution::point_mass(10.0).size_biased();
    const auto fp = solve_fixed_point(star, 0.2, 2);
    const auto dc = check_derivative_condition(star, fp.y_hat, 0.2, 2);
    EXPECT_TRUE(dc.stable);
    EXPECT_GT(dc.exceptional_gap, 0.0);
}

TEST(PowerLaw, ContinuityInP) {
    const auto fp0 = powerlaw_fixed_point(2.5, 1.0, 2);
    const auto fp = solve_fixed_point(WeightDistribution::power_law(2.5, 1.0).size_biased(), 1e-9, 2);
    EXPECT_NEAR(fp.y_hat, fp0.y_hat, 1e-6);
}

TEST(PowerLaw, FirstOrderThreshold) {
    // r = 1: y = E[1 - exp(-W* y)] has a positive root when E[W*] > 1
    const auto fp = powerlaw_fixed_point(2.8, 1.0, 1);
    EXPECT_FALSE(fp.zero_root);
    EXPECT_GT(fp.y_hat, 0.0);
    const auto star = WeightDistribution::power_law(2.8, 1.0).size_biased();
    EXPECT_NEAR(expect_psi(star, fp.y_hat, 1), fp.y_hat, 1e-11);
}

TEST(PowerLaw, FractionMonotoneInBeta) {
    double prev = 2.0;
    for (double beta : {2.2, 2.4, 2.6, 2.8}) {
        const auto fp = powerlaw_fixed_point(beta, 1.0, 2);
        const double fr = powerlaw_fraction(beta, 1.0, fp.y_hat, 2);
        EXPECT_LE(fr, prev);
        prev = fr;
    }
}

TEST(PowerLaw, SizeBiasedDensityIsNormalised) {
    const auto star = WeightDistribution::power_law(2.5, 1.0).size_biased();
    EXPECT_NEAR(star.cdf(1e300), 1.0, 1e-12);
    EXPECT_EQ(star.cdf(1.0), 0.0);
}

TEST(CriticalDensity, Examples) {
    const auto a = critical_density(1e6, 2, 2.5, 2.0 / 3.0);
    EXPECT_NEAR(a.exponent, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(a.a_c, 100.0, 1e-9);
    EXPECT_TRUE(a.zeta_in_range);
    const auto b = critical_density(1e6, 2, 2.5, 1.0 / 1.5);
    EXPECT_TRUE(b.zeta_in_range);
    const auto c = critical_density(1e6, 3, 2.5, 0.6);
    EXPECT_NEAR(c.exponent, 1.1 / 3.0, 1e-15);
    const auto d = critical_density(1e6, 2, 2.5, 0.2);
    EXPECT_FALSE(d.zeta_in_range);
    EXPECT_FALSE(d.warning.empty());
}

TEST(TheoryRecord, Fields) {
    const auto fp = solve_fixed_point(WeightDistribution::point_mass(10.0).size_biased(), 0.2, 2);
    const auto j = theory_record({{"r", 2}}, fp, 0.5);
    EXPECT_EQ(j.at("stable"), true);
    EXPECT_EQ(j.at("fraction"), 0.5);
    EXPECT_TRUE(j.contains("y_hat"));
    EXPECT_TRUE(j.contains("derivative"));
    EXPECT_EQ(j.at("r"), 2);
}
