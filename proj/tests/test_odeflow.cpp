#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bootperc/discretise.hpp"
#include "bootperc/odeflow.hpp"

using namespace bootperc;

namespace {

Discretisation single_class(double W) { return Discretisation::exact(WeightDistribution::point_mass(W)); }

Discretisation two_class() { return Discretisation::exact(WeightDistribution::mixture({1.0, 10.0}, {0.7, 0.3})); }

}  // namespace

TEST(OdeRhs, EmptyTopLevel) {
    const OdeLayout L{2, 2};
    std::vector<double> y(L.size(), 0.0), dy(L.size());
    y[L.gamma(0, 0)] = 0.3;
    y[L.gamma(1, 0)] = 0.2;
    y[L.nu()] = 0.5;
    y[L.mu()] = 1.5;
    const std::vector<double> levels{1.0, 4.0};
    ode_rhs(y, dy, levels, 2.0, L);
    EXPECT_DOUBLE_EQ(dy[L.nu()], -1.0);
    EXPECT_DOUBLE_EQ(dy[L.mu()], -3.0);
    EXPECT_DOUBLE_EQ(dy[L.I()], 3.0);
    EXPECT_DOUBLE_EQ(dy[L.gamma(0, 0)], -0.3 * 0.5 * 3.0);
    EXPECT_DOUBLE_EQ(dy[L.gamma(1, 0)], -0.2 * 2.0 * 3.0);
    y[L.nu()] = 0.0;
    EXPECT_THROW(ode_rhs(y, dy, levels, 2.0, L), std::invalid_argument);
}

TEST(OdeRhs, MatchesDifferenceQuotientOfSolution) {
    const auto D = two_class();
    IntegrateOptions opt;
    opt.h = 1e-6;
    opt.tau_max = 0.01;
    const auto sol = integrate(D, 0.3, 2, opt);
    const auto& L = sol.layout;
    std::vector<double> dy(L.size());
    for (std::size_t k : {0u, 5000u}) {
        ode_rhs(sol.row(k), dy, D.levels, D.d, L);
        for (std::size_t i = 0; i < L.size(); ++i) {
            const double fd = (sol.at(k + 1, i) - sol.at(k, i)) / opt.h;
            EXPECT_NEAR(fd, dy[i], 1e-4 * std::max(1.0, std::abs(dy[i])));
        }
    }
}

TEST(InitialState, SingleClass) {
    const auto D = single_class(3.0);
    const auto y = initial_state(D, 0.3, 2);
    const OdeLayout L{1, 2};
    EXPECT_DOUBLE_EQ(y[L.nu()], 0.3);
    EXPECT_DOUBLE_EQ(y[L.gamma(0, 0)], 0.7);
    EXPECT_DOUBLE_EQ(y[L.gamma(0, 1)], 0.0);
    EXPECT_DOUBLE_EQ(y[L.mu()], 0.9);
    EXPECT_DOUBLE_EQ(y[L.I()], 0.0);
}

TEST(InitialState, TwoClassSubstitution) {
    const auto y = initial_state(two_class(), 0.3, 2);
    const OdeLayout L{2, 2};
    EXPECT_NEAR(y[L.nu()], 0.3, 1e-15);
    EXPECT_NEAR(y[L.mu()], 0.3 * (0.7 + 3.0), 1e-15);
    EXPECT_NEAR(y[L.gamma(0, 0)], 0.49, 1e-15);
    EXPECT_NEAR(y[L.gamma(1, 0)], 0.21, 1e-15);
}

TEST(Integrate, DegenerateStartRefused) {
    EXPECT_THROW(integrate(single_class(5.0), 0.0, 2), NumericFailure);
}

TEST(ClosedForms, AtZero) {
    const auto D = two_class();
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_DOUBLE_EQ(closed_form_gamma(i, 0, 0.0, D, 0.3), 0.7 * D.fractions[i]);
        EXPECT_EQ(closed_form_gamma(i, 1, 0.0, D, 0.3), 0.0);
    }
    const auto nm = closed_form_nu_mu(0.0, 0.0, D, 0.3, 2);
    const auto y = initial_state(D, 0.3, 2);
    const OdeLayout L{2, 2};
    EXPECT_NEAR(nm.nu, y[L.nu()], 1e-15);
    EXPECT_NEAR(nm.mu, y[L.mu()], 1e-15);
}

TEST(ClosedForms, FirstLevelAndPoisson) {
    const auto D = two_class();
    for (double I : {0.1, 1.0, 3.0}) {
        for (std::size_t i = 0; i < 2; ++i) {
            const double x = D.levels[i] * I / D.d;
            EXPECT_NEAR(closed_form_gamma(i, 1, I, D, 0.3), closed_form_gamma(i, 0, I, D, 0.3) * x, 1e-15);
            for (int j = 0; j < 4; ++j)
                EXPECT_NEAR(closed_form_gamma(i, j, I, D, 0.3) / (0.7 * D.fractions[i]), poisson_pmf(j, x), 1e-15);
        }
    }
}

TEST(Integrate, MatchesClosedFormsPointMass) {
    const auto D = single_class(10.0);
    const auto sol = integrate(D, 0.2, 2);
    EXPECT_TRUE(sol.stopped);
    const auto e = closed_form_errors(sol, D, 0.2, 2);
    EXPECT_LT(e.max(), 1e-8);
    EXPECT_LT(e.poisson, 1e-8);
    EXPECT_LT(e.mu_hat, 1e-8);
}

TEST(Integrate, MatchesClosedFormsTwoClass) {
    const auto D = two_class();
    const auto sol = integrate(D, 0.3, 2);
    const auto e = closed_form_errors(sol, D, 0.3, 2);
    EXPECT_LT(e.max(), 1e-8);
    EXPECT_LT(e.poisson, 1e-8);
    EXPECT_LT(e.mu_hat, 1e-8);
}

TEST(Integrate, FourthOrderDecay) {
    const auto D = two_class();
    IntegrateOptions a, b;
    a.h = 1e-2;
    b.h = 5e-3;
    const double ea = closed_form_errors(integrate(D, 0.3, 2, a), D, 0.3, 2).max();
    const double eb = closed_form_errors(integrate(D, 0.3, 2, b), D, 0.3, 2).max();
    EXPECT_GT(ea / eb, 12.0);
    EXPECT_LT(ea / eb, 20.0);
}

TEST(Integrate, SolutionInvariants) {
    for (double p : {0.05, 0.3, 0.7}) {
        const auto D = two_class();
        const auto sol = integrate(D, p, 3);
        const auto& L = sol.layout;
        double prev_I = 0.0;
        for (std::size_t k = 0; k < sol.rows(); ++k) {
            for (std::size_t i = 0; i < 2; ++i) {
                double s = 0.0;
                for (int j = 0; j < 3; ++j) {
                    EXPECT_GE(sol.at(k, L.gamma(i, j)), -1e-12);
                    s += sol.at(k, L.gamma(i, j));
                }
                EXPECT_LE(s, (1.0 - p) * D.fractions[i] + 1e-9);
            }
            EXPECT_GE(sol.at(k, L.nu()), -1e-9);
            EXPECT_GE(sol.at(k, L.I()), prev_I);
            prev_I = sol.at(k, L.I());
        }
        EXPECT_GE(sol.alpha_hat, 0.0);
        EXPECT_LE(sol.alpha_hat, 1.0);
    }
}

TEST(Integrate, StopsNearZeroMu) {
    const auto D = single_class(10.0);
    const auto sol = integrate(D, 0.2, 2);
    const auto& L = sol.layout;
    const double mu0 = sol.at(0, L.mu());
    EXPECT_NEAR(sol.at(sol.rows() - 1, L.mu()), 0.0, 1e-8 * mu0 + 1e-15);
}

TEST(Integrate, LargePKeepsNuPositive) {
    const auto D = two_class();
    const auto sol = integrate(D, 0.95, 2);
    EXPECT_TRUE(sol.stopped);
    EXPECT_FALSE(sol.ratio_blowup);
    const auto e = closed_form_errors(sol, D, 0.95, 2);
    EXPECT_LT(e.max(), 1e-8);
}

TEST(DiscretisedFixedPoint, SingleClassMatchesTheory) {
    for (double p : {0.1, 0.2, 0.5}) {
        const auto D = single_class(10.0);
        const auto a = discretised_fixed_point(D, p, 2);
        const auto b = solve_fixed_point(WeightDistribution::point_mass(10.0).size_biased(), p, 2);
        EXPECT_NEAR(a.y_hat, b.y_hat, 1e-10);
        EXPECT_NEAR(alpha(a.y_hat, D, p, 2), final_fraction(WeightDistribution::point_mass(10.0), b.y_hat, p, 2),
                    1e-10);
    }
}

TEST(DiscretisedFixedPoint, MixtureMatchesTheory) {
    const auto dist = WeightDistribution::mixture({1.0, 10.0}, {0.7, 0.3});
    const auto a = discretised_fixed_point(Discretisation::exact(dist), 0.3, 2);
    const auto b = solve_fixed_point(dist.size_biased(), 0.3, 2);
    EXPECT_NEAR(a.y_hat, b.y_hat, 1e-10);
    EXPECT_TRUE(a.stable);
}

TEST(DiscretisedFixedPoint, HeavyMassBoundsRoot) {
    const auto dist = WeightDistribution::power_law(2.5, 1.0);
    const auto P = build_partition(dist, 0.1, 20);
    const auto D = Discretisation::limit(dist, P, Side::plus, 0.0);
    const auto fp = discretised_fixed_point(D, 0.0, 2);
    EXPECT_GE(fp.y_hat, D.w_prime / D.d);
}

TEST(DiscretisedFixedPoint, AgreesWithOdeStoppingPoint) {
    for (double p : {0.2, 0.5}) {
        const auto D = two_class();
        const auto fp = discretised_fixed_point(D, p, 2);
        const auto sol = integrate(D, p, 2);
        EXPECT_NEAR(fp.y_hat, sol.y_hat, 1e-6);
    }
}

TEST(Alpha, Basics) {
    const auto dist = WeightDistribution::power_law(2.5, 1.0);
    const auto P = build_partition(dist, 0.1, 20);
    const auto D = Discretisation::limit(dist, P, Side::minus, 0.3);
    EXPECT_NEAR(alpha(0.0, D, 0.3, 2), 0.3 * 0.9 + D.gamma_prime, 1e-14);
    const auto S = single_class(4.0);
    EXPECT_NEAR(alpha(0.7, S, 0.2, 2), final_fraction(WeightDistribution::point_mass(4.0), 0.7, 0.2, 2), 1e-15);
}

TEST(Alpha, ApproachesPowerLawFraction) {
    // minus and plus predictions bracket the limit and close in as gamma shrinks and ell grows
    const auto dist = WeightDistribution::power_law(2.5, 1.0);
    const double p = 0.1;
    const auto fp = solve_fixed_point(dist.size_biased(), p, 2);
    const double target = final_fraction(dist, fp.y_hat, p, 2);
    double prev_lo = 0.0, prev_hi = INFINITY;
    for (auto [g, ell] : {std::pair{0.01, 100u}, std::pair{0.001, 1000u}, std::pair{1e-4, 10000u}}) {
        const auto P = build_partition(dist, g, ell);
        const auto Dm = Discretisation::limit(dist, P, Side::minus, p);
        const auto Dp = Discretisation::limit(dist, P, Side::plus, p);
        const double lo = alpha(discretised_fixed_point(Dm, p, 2).y_hat, Dm, p, 2);
        const double hi = alpha(discretised_fixed_point(Dp, p, 2).y_hat, Dp, p, 2);
        EXPECT_LT(lo, target);
        EXPECT_GT(hi, target);
        EXPECT_GT(lo, prev_lo);
        EXPECT_LT(hi, prev_hi);
        prev_lo = lo;
        prev_hi = hi;
    }
    EXPECT_LT(target - prev_lo, 0.05);
    EXPECT_LT(prev_hi - target, 0.1);
}

TEST(OdeCsv, Header) {
    const auto sol = integrate(two_class(), 0.3, 2);
    std::stringstream ss;
    write_ode_csv(ss, sol, 1000);
    std::string header;
    std::getline(ss, header);
    EXPECT_EQ(header, "tau,nu,mu_U,I,gamma_1_0,gamma_1_1,gamma_2_0,gamma_2_1");
}
