#pragma once

// Poisson tails, the limiting fixed-point equation and its power-law variant.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include "bootperc/errors.hpp"
#include "bootperc/roots.hpp"
#include "bootperc/weights.hpp"

namespace bootperc {

inline double poisson_pmf(int j, double x) {
    if (j < 0) return 0.0;
    if (x == 0.0) return j == 0 ? 1.0 : 0.0;
    return std::exp(j * std::log(x) - x - std::lgamma(j + 1.0));
}

/// psi_r(x) = P(Po(x) >= r).
inline double psi_r(int r, double x) {
    detail::require(x >= 0.0 && !std::isnan(x), "psi_r requires x >= 0");
    if (r <= 0) return 1.0;
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < r) {
        // upper series: terms decrease from j = r on since x < r <= j
        double t = poisson_pmf(r, x);
        double sum = 0.0, comp = 0.0;
        for (int j = r; t > 0.0; ++j) {
            const double s = sum + t;
            comp += (sum - s) + t;
            sum = s;
            if (t < 1e-18 * sum) break;
            t *= x / (j + 1);
        }
        return std::min(1.0, sum + comp);
    }
    // complement 1 - sum_{j<r} pmf(j), terms built recursively
    double t = std::exp(-x);
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(r));
    for (int j = 0; j < r; ++j) {
        terms.push_back(t);
        t *= x / (j + 1);
    }
    return std::clamp(1.0 - detail::compensated_sum(terms), 0.0, 1.0);
}

/// P(Po(x) <= k).
inline double poisson_cdf(int k, double x) {
    return 1.0 - psi_r(k + 1, x);
}

namespace detail {

// Smallest integer x with P(Po(x) <= r) < 1e-17: beyond it psi_r is 1 and the
// pmf at r is 0 to double precision.
inline double poisson_saturation(int r) {
    double x = std::max(1.0, static_cast<double>(r));
    while (poisson_cdf(r, x) >= 1e-17) x += 1.0;
    return x;
}

inline constexpr double kPieceWidth = 0.5;  // in log-weight
inline constexpr double kQuadratureTol = 1e-12;

// E[g(W)] for a (possibly capped) power law, with g constant (= g_sat) on
// [w_sat, inf). Integrated in s = log w with fixed Gauss-Kronrod panels.
template <class G>
double power_law_expectation(const PowerLaw& pl, G&& g, double w_sat, double g_sat) {
    const double mass = std::isfinite(pl.cap) ? -std::expm1((1.0 - pl.beta) * std::log(pl.cap / pl.x0)) : 1.0;
    const double hi = std::min(w_sat, pl.cap);
    double total = 0.0;
    if (hi > pl.x0) {
        const double a = std::log(pl.x0), b = std::log(hi);
        const auto pieces = static_cast<int>(std::ceil((b - a) / kPieceWidth));
        const double width = (b - a) / pieces;
        const double k = pl.beta - 1.0;
        auto integrand = [&](double s) {
            const double w = std::exp(s);
            return g(w) * k * std::exp(-k * (s - a));
        };
        double err_sum = 0.0;
        for (int i = 0; i < pieces; ++i) {
            double err = 0.0;
            const double lo = a + i * width;
            const double up = i + 1 == pieces ? b : lo + width;
            total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, up, 0, 0.0, &err);
            err_sum += err;
        }
        if (!(err_sum <= kQuadratureTol) || !std::isfinite(total)) {
            std::ostringstream os;
            os << "power-law quadrature did not converge: beta=" << pl.beta << " x0=" << pl.x0
               << " upper=" << hi << " error estimate=" << err_sum;
            throw NumericFailure(os.str());
        }
    }
    // mass on [hi, cap)
    const double tail_lo = std::max(hi, pl.x0);
    if (tail_lo < pl.cap) {
        double surv = std::pow(tail_lo / pl.x0, 1.0 - pl.beta);
        if (std::isfinite(pl.cap)) surv -= std::pow(pl.cap / pl.x0, 1.0 - pl.beta);
        total += g_sat * surv;
    }
    return total / mass;
}

template <class G>
double atom_expectation(const Mixture& m, G&& g) {
    std::vector<double> terms(m.values.size());
    for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = m.probs[i] * g(m.values[i]);
    return compensated_sum(terms);
}

}  // namespace detail

/// E[psi_r(W y)] where W has law `dist`.
inline double expect_psi(const WeightDistribution& dist, double y, int r) {
    detail::require(y >= 0.0, "expect_psi requires y >= 0");
    if (y == 0.0) return r <= 0 ? 1.0 : 0.0;
    auto g = [&](double w) { return psi_r(r, w * y); };
    if (auto pl = std::get_if<PowerLaw>(&dist.kind()))
        return detail::power_law_expectation(*pl, g, detail::poisson_saturation(r) / y, 1.0);
    return detail::atom_expectation(dist.atoms(), g);
}

/// E[pmf_j(W y)] where W has law `dist`.
inline double expect_pmf(const WeightDistribution& dist, double y, int j) {
    detail::require(y >= 0.0, "expect_pmf requires y >= 0");
    auto g = [&](double w) { return poisson_pmf(j, w * y); };
    if (auto pl = std::get_if<PowerLaw>(&dist.kind()))
        return detail::power_law_expectation(*pl, g, detail::poisson_saturation(j) / std::max(y, 1e-300), 0.0);
    return detail::atom_expectation(dist.atoms(), g);
}

/// f_r(y; X, p) = (1 - p) E[psi_r(X y)] + p - y, X ~ dist_star.
inline double f_r(double y, const WeightDistribution& dist_star, double p, int r) {
    detail::require(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
    return (1.0 - p) * expect_psi(dist_star, y, r) + p - y;
}

/// Analytic f_r'(y) = -1 + (1 - p)(r / y) E[pmf_r(X y)].
inline double f_r_derivative(double y, const WeightDistribution& dist_star, double p, int r) {
    detail::require(y > 0.0, "f_r_derivative requires y > 0");
    return -1.0 + (1.0 - p) * (r / y) * expect_pmf(dist_star, y, r);
}

inline double f_r_derivative_fd(double y, const WeightDistribution& dist_star, double p, int r, double h = 1e-7) {
    return (f_r(y + h, dist_star, p, r) - f_r(y - h, dist_star, p, r)) / (2.0 * h);
}

struct FixedPointResult {
    double y_hat = 0.0;
    double residual = 0.0;
    double derivative = 0.0;     // analytic
    double derivative_fd = 0.0;  // central difference, h = 1e-7
    bool stable = false;         // derivative < -1e-9
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    bool boundary = false;   // no sign change inside the scan, y = 1 returned
    bool zero_root = false;  // f <= 0 already at the lower scan bound
    ScanRoot scan;
};

inline constexpr double kStableMargin = 1e-9;

namespace detail {

template <class F, class DF>
FixedPointResult finish_fixed_point(ScanRoot scan, F&& f, DF&& df, double fd_h) {
    FixedPointResult out;
    out.bracket_lo = scan.lo;
    out.bracket_hi = scan.hi;
    out.residual = scan.residual;
    if (scan.negative_at_start) {
        out.zero_root = true;
        out.y_hat = 0.0;
        out.scan = std::move(scan);
        return out;
    }
    out.y_hat = scan.root;
    out.boundary = !scan.found;
    out.derivative = df(out.y_hat);
    out.derivative_fd = (f(out.y_hat + fd_h) - f(out.y_hat - fd_h)) / (2.0 * fd_h);
    out.stable = out.derivative < -kStableMargin;
    out.scan = std::move(scan);
    return out;
}

}  // namespace detail

/// Smallest positive root of f_r(.; dist_star, p) on [tol, 1].
inline FixedPointResult solve_fixed_point(const WeightDistribution& dist_star, double p, int r, double tol = 1e-12,
                                          double step = 1e-4) {
    detail::require(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
    detail::require(r >= 1, "r must be at least 1");
    detail::require(tol > 0.0 && step > 0.0, "tolerance and step must be positive");
    auto f = [&](double y) { return f_r(y, dist_star, p, r); };
    auto df = [&](double y) { return f_r_derivative(y, dist_star, p, r); };
    return detail::finish_fixed_point(scan_first_root(f, tol, 1.0, step, tol), f, df, 1e-7);
}

/// (1 - p) E[psi_r(W_F y_hat)] + p.
inline double final_fraction(const WeightDistribution& dist, double y_hat, double p, int r) {
    return (1.0 - p) * expect_psi(dist, y_hat, r) + p;
}

struct DerivativeCondition {
    bool stable = false;
    double derivative = 0.0;
    double exceptional_gap = 0.0;  // |E[e^{-yX}(Xy)^r/r!] - y/((1-p)r)|
};

inline DerivativeCondition check_derivative_condition(const WeightDistribution& dist_star, double y_hat, double p,
                                                      int r) {
    DerivativeCondition out;
    if (p >= 1.0) {
        out.derivative = -1.0;
        out.stable = true;
        out.exceptional_gap = std::numeric_limits<double>::infinity();
        return out;
    }
    detail::require(y_hat > 0.0, "derivative condition needs a positive root");
    const double e = expect_pmf(dist_star, y_hat, r);
    out.derivative = -1.0 + (1.0 - p) * (r / y_hat) * e;
    out.stable = out.derivative < -kStableMargin;
    out.exceptional_gap = std::abs(e - y_hat / ((1.0 - p) * r));
    return out;
}

/// Power-law case with p = 0: smallest root of y = E[psi_r(W* y)] above tol.
/// y = 0 is always a root, so the scan starts strictly at tol.
inline FixedPointResult powerlaw_fixed_point(double beta, double x0, int r, double tol = 1e-12,
                                             double step = 1e-4) {
    detail::require(beta > 2.0, "power law requires beta > 2");
    const auto star = WeightDistribution::power_law(beta, x0).size_biased();
    return solve_fixed_point(star, 0.0, r, tol, step);
}

/// E[psi_r(W_F y_hat)] for the uncapped power law.
inline double powerlaw_fraction(double beta, double x0, double y_hat, int r) {
    return expect_psi(WeightDistribution::power_law(beta, x0), y_hat, r);
}

struct CriticalDensity {
    double exponent = 0.0;
    double a_c = 0.0;
    bool zeta_in_range = true;  // (r-1)/(2r-beta+1) < zeta <= 1/(beta-1)
    std::string warning;
};

inline CriticalDensity critical_density(double n, int r, double beta, double zeta) {
    detail::require(n >= 1.0 && r >= 1 && beta > 2.0, "critical_density: invalid n, r or beta");
    CriticalDensity out;
    out.exponent = (r * (1.0 - zeta) + zeta * (beta - 1.0) - 1.0) / r;
    out.a_c = std::pow(n, out.exponent);
    const double lo = (r - 1.0) / (2.0 * r - beta + 1.0);
    const double hi = 1.0 / (beta - 1.0);
    // boundary 1/(beta-1) is inclusive; allow rounding at that end
    out.zeta_in_range = zeta > lo && zeta <= hi * (1.0 + 1e-12);
    if (!out.zeta_in_range) {
        std::ostringstream os;
        os << "zeta=" << zeta << " outside (" << lo << ", " << hi << "]; the threshold only bounds a(n) from above";
        out.warning = os.str();
    }
    return out;
}

/// JSON record for a theory evaluation.
inline nlohmann::json theory_record(const nlohmann::json& inputs, const FixedPointResult& fp, double fraction) {
    nlohmann::json j = inputs;
    j["y_hat"] = fp.y_hat;
    j["residual"] = fp.residual;
    j["derivative"] = fp.derivative;
    j["derivative_fd"] = fp.derivative_fd;
    j["fraction"] = fraction;
    j["stable"] = fp.stable;
    j["boundary_root"] = fp.boundary;
    j["zero_root"] = fp.zero_root;
    return j;
}

}  // namespace bootperc
