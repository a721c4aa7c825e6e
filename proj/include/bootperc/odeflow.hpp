#pragma once

// Fluid-limit equations for the sequential exposure of a discretised sequence.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "bootperc/discretise.hpp"
#include "bootperc/errors.hpp"
#include "bootperc/roots.hpp"
#include "bootperc/theory.hpp"

namespace bootperc {

/// State layout: gamma_{i,j} row-major (i over classes, j = 0..r-1), then nu,
/// mu_U and I.
struct OdeLayout {
    std::size_t classes = 0;
    int r = 0;

    std::size_t size() const { return classes * static_cast<std::size_t>(r) + 3; }
    std::size_t gamma(std::size_t i, int j) const { return i * static_cast<std::size_t>(r) + static_cast<std::size_t>(j); }
    std::size_t nu() const { return classes * static_cast<std::size_t>(r); }
    std::size_t mu() const { return nu() + 1; }
    std::size_t I() const { return nu() + 2; }
};

/// Right-hand side with G = mu_U / nu. Requires nu > 0.
inline void ode_rhs(std::span<const double> y, std::span<double> dy, std::span<const double> levels, double d,
                    const OdeLayout& L) {
    const double nu = y[L.nu()], mu = y[L.mu()];
    detail::require(nu > 0.0, "ode_rhs: nu must be positive (domain exit)");
    const double G = mu / nu;
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < L.classes; ++i) {
        const double a = levels[i] / d * G;
        dy[L.gamma(i, 0)] = -y[L.gamma(i, 0)] * a;
        for (int j = 1; j < L.r; ++j) dy[L.gamma(i, j)] = (y[L.gamma(i, j - 1)] - y[L.gamma(i, j)]) * a;
        const double top = y[L.gamma(i, L.r - 1)];
        s1 += levels[i] / d * top;
        s2 += levels[i] * levels[i] / d * top;
    }
    dy[L.nu()] = -1.0 + G * s1;
    dy[L.mu()] = -G + G * s2;
    dy[L.I()] = G;
}

inline std::vector<double> initial_state(const Discretisation& D, double p, int r) {
    detail::require(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
    detail::require(r >= 1, "r must be at least 1");
    const OdeLayout L{D.num_classes(), r};
    std::vector<double> y(L.size(), 0.0);
    for (std::size_t i = 0; i < L.classes; ++i) y[L.gamma(i, 0)] = (1.0 - p) * D.fractions[i];
    y[L.nu()] = p * D.light_fraction() + D.gamma_prime;
    y[L.mu()] = D.w_prime + p * D.light_weight();
    y[L.I()] = 0.0;
    return y;
}

struct OdeSolution {
    OdeLayout layout;
    std::vector<double> tau;
    std::vector<double> states;  // tau.size() rows of layout.size()
    double h = 0.0;
    double tau_hat = 0.0;
    double I_hat = 0.0;
    double y_hat = 0.0;  // I(tau_hat) / d
    double alpha_hat = 0.0;
    bool stopped = false;       // mu_U crossed the stopping level
    bool ratio_blowup = false;  // nu reached 0 while mu_U > 0
    bool domain_exit = false;   // G exceeded 2 C_gamma at some grid point
    double domain_exit_tau = 0.0;

    std::size_t rows() const { return tau.size(); }
    std::span<const double> row(std::size_t k) const { return {states.data() + k * layout.size(), layout.size()}; }
    double at(std::size_t k, std::size_t idx) const { return states[k * layout.size() + idx]; }

    /// Linear interpolation of the state at tau (clamped to the solved range).
    std::vector<double> interpolate(double t) const {
        std::vector<double> out(layout.size());
        if (t <= tau.front()) {
            auto r0 = row(0);
            std::copy(r0.begin(), r0.end(), out.begin());
            return out;
        }
        if (t >= tau.back()) {
            auto rl = row(rows() - 1);
            std::copy(rl.begin(), rl.end(), out.begin());
            return out;
        }
        auto it = std::upper_bound(tau.begin(), tau.end(), t);
        const auto k = static_cast<std::size_t>(it - tau.begin()) - 1;
        const double w = (t - tau[k]) / (tau[k + 1] - tau[k]);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - w) * at(k, i) + w * at(k + 1, i);
        return out;
    }
};

/// alpha(y) = p(1 - gamma) + gamma' + (1 - p) sum gamma_i psi_r(W_i y).
inline double alpha(double y, const Discretisation& D, double p, int r) {
    double acc = p * D.light_fraction() + D.gamma_prime;
    for (std::size_t i = 0; i < D.num_classes(); ++i) acc += (1.0 - p) * D.fractions[i] * psi_r(r, D.levels[i] * y);
    return acc;
}

struct IntegrateOptions {
    double h = 1e-4;
    double eps_rel = 1e-8;  // stop once mu_U <= eps_rel * mu_U(0)
    double tau_max = 0.0;   // 0: 2 + gamma'
    bool record = true;     // keep every grid point (otherwise only the last two)
};

/// Classical RK4 on a fixed grid. Stops at the first grid step where mu_U
/// reaches the stopping level (tau_hat by linear interpolation) or when nu
/// reaches 0 first (ratio blow-up).
inline OdeSolution integrate(const Discretisation& D, double p, int r, const IntegrateOptions& opt = {}) {
    OdeSolution sol;
    sol.layout = OdeLayout{D.num_classes(), r};
    sol.h = opt.h;
    const auto& L = sol.layout;
    auto y = initial_state(D, p, r);
    if (!(y[L.nu()] > 0.0)) throw NumericFailure("degenerate start: nu(0) <= 0, nothing is infected");
    const double mu0 = y[L.mu()];
    const double stop_level = opt.eps_rel * mu0;
    const double tau_max = opt.tau_max > 0.0 ? opt.tau_max : 2.0 + D.gamma_prime;
    const double G_max = 2.0 * D.max_weight();
    const double h = opt.h;
    const std::span<const double> levels = D.levels;

    auto push = [&](double t, const std::vector<double>& s) {
        sol.tau.push_back(t);
        sol.states.insert(sol.states.end(), s.begin(), s.end());
    };
    auto check_domain = [&](double t, const std::vector<double>& s) {
        if (!sol.domain_exit && s[L.nu()] > 0.0 && s[L.mu()] / s[L.nu()] > G_max) {
            sol.domain_exit = true;
            sol.domain_exit_tau = t;
        }
    };
    push(0.0, y);
    check_domain(0.0, y);
    if (mu0 <= stop_level) {
        sol.stopped = true;
        sol.alpha_hat = alpha(0.0, D, p, r);
        return sol;
    }

    const std::size_t m = L.size();
    std::vector<double> k1(m), k2(m), k3(m), k4(m), tmp(m), next(m);
    auto stage_ok = [&](const std::vector<double>& s) { return s[L.nu()] > 0.0; };
    double t = 0.0;
    const auto max_steps = static_cast<std::size_t>(std::ceil(tau_max / h));
    for (std::size_t step = 0; step < max_steps; ++step) {
        ode_rhs(y, k1, levels, D.d, L);
        for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        bool ok = stage_ok(tmp);
        if (ok) {
            ode_rhs(tmp, k2, levels, D.d, L);
            for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
            ok = stage_ok(tmp);
        }
        if (ok) {
            ode_rhs(tmp, k3, levels, D.d, L);
            for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + h * k3[i];
            ok = stage_ok(tmp);
        }
        if (ok) {
            ode_rhs(tmp, k4, levels, D.d, L);
            for (std::size_t i = 0; i < m; ++i) next[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        } else {
            // a stage left {nu > 0}: finish the step with forward Euler so the
            // stopping test below can locate the crossing
            for (std::size_t i = 0; i < m; ++i) next[i] = y[i] + h * k1[i];
        }
        const double t_next = t + h;
        if (next[L.mu()] <= stop_level) {
            const double mu_a = y[L.mu()], mu_b = next[L.mu()];
            const double w = (mu_a - stop_level) / (mu_a - mu_b);
            sol.tau_hat = t + w * h;
            sol.I_hat = y[L.I()] + w * (next[L.I()] - y[L.I()]);
            sol.stopped = true;
            if (opt.record) {
                std::vector<double> last(m);
                for (std::size_t i = 0; i < m; ++i) last[i] = y[i] + w * (next[i] - y[i]);
                push(sol.tau_hat, last);
            }
            break;
        }
        if (next[L.nu()] <= 0.0) {
            sol.ratio_blowup = true;
            sol.tau_hat = t;
            sol.I_hat = y[L.I()];
            break;
        }
        y.swap(next);
        t = t_next;
        if (opt.record) push(t, y);
        check_domain(t, y);
    }
    if (!sol.stopped && !sol.ratio_blowup) {
        sol.tau_hat = t;
        sol.I_hat = y[L.I()];
    }
    if (!opt.record) push(t, y);
    sol.y_hat = sol.I_hat / D.d;
    sol.alpha_hat = alpha(sol.y_hat, D, p, r);
    return sol;
}

// ---------------------------------------------------------------------------
// Closed forms in terms of I(tau)

/// gamma_{i,j} = gamma_{i,0}(0) e^{-W_i I/d} (W_i I/d)^j / j!.
inline double closed_form_gamma(std::size_t i, int j, double I, const Discretisation& D, double p) {
    detail::require(I >= 0.0, "I must be non-negative");
    const double g0 = (1.0 - p) * D.fractions[i];
    return g0 * poisson_pmf(j, D.levels[i] * I / D.d);
}

struct NuMu {
    double nu = 0.0;
    double mu = 0.0;
};

inline NuMu closed_form_nu_mu(double I, double tau, const Discretisation& D, double p, int r) {
    detail::require(I >= 0.0, "I must be non-negative");
    NuMu out;
    double s_nu = 0.0, s_mu = 0.0;
    for (std::size_t i = 0; i < D.num_classes(); ++i) {
        const double ps = psi_r(r, D.levels[i] * I / D.d);
        s_nu += D.fractions[i] * ps;
        s_mu += D.levels[i] * D.fractions[i] * ps;
    }
    out.nu = p * D.light_fraction() + D.gamma_prime - tau + (1.0 - p) * s_nu;
    out.mu = D.w_prime + p * D.light_weight() - I + (1.0 - p) * s_mu;
    return out;
}

struct ClosedFormErrors {
    double gamma = 0.0;  // sup over grid, classes and levels
    double nu = 0.0;
    double mu = 0.0;
    double poisson = 0.0;  // |sum_j gamma_ij - (1-p) gamma_i P(Po <= r-1)|
    double mu_hat = 0.0;   // |mu_hat(I/d) - mu_U/d|
    double max() const { return std::max({gamma, nu, mu}); }
};

/// mu_hat(x) = W'/d + (p/d) sum W_i gamma_i - x + (1-p) sum (W_i gamma_i / d) psi_r(W_i x).
inline double mu_hat(double x, const Discretisation& D, double p, int r) {
    double acc = D.w_prime / D.d + p / D.d * D.light_weight() - x;
    for (std::size_t i = 0; i < D.num_classes(); ++i)
        acc += (1.0 - p) * D.levels[i] * D.fractions[i] / D.d * psi_r(r, D.levels[i] * x);
    return acc;
}

inline double mu_hat_derivative(double x, const Discretisation& D, double p, int r) {
    double acc = -1.0;
    for (std::size_t i = 0; i < D.num_classes(); ++i)
        acc += (1.0 - p) * D.levels[i] * D.levels[i] * D.fractions[i] / D.d * poisson_pmf(r - 1, D.levels[i] * x);
    return acc;
}

/// Compares the integrated solution with the closed forms evaluated at the
/// integrated I(tau), on grid points with tau <= tau_limit.
inline ClosedFormErrors closed_form_errors(const OdeSolution& sol, const Discretisation& D, double p, int r,
                                           double tau_limit = std::numeric_limits<double>::infinity()) {
    ClosedFormErrors e;
    const auto& L = sol.layout;
    for (std::size_t k = 0; k < sol.rows(); ++k) {
        const double t = sol.tau[k];
        if (t > tau_limit) break;
        const double I = sol.at(k, L.I());
        for (std::size_t i = 0; i < L.classes; ++i) {
            double s = 0.0;
            for (int j = 0; j < r; ++j) {
                const double g = sol.at(k, L.gamma(i, j));
                s += g;
                e.gamma = std::max(e.gamma, std::abs(g - closed_form_gamma(i, j, I, D, p)));
            }
            const double expect = (1.0 - p) * D.fractions[i] * poisson_cdf(r - 1, D.levels[i] * I / D.d);
            e.poisson = std::max(e.poisson, std::abs(s - expect));
        }
        const auto nm = closed_form_nu_mu(I, t, D, p, r);
        e.nu = std::max(e.nu, std::abs(sol.at(k, L.nu()) - nm.nu));
        e.mu = std::max(e.mu, std::abs(sol.at(k, L.mu()) - nm.mu));
        e.mu_hat = std::max(e.mu_hat, std::abs(mu_hat(I / D.d, D, p, r) - sol.at(k, L.mu()) / D.d));
    }
    return e;
}

/// Smallest positive root of mu_hat; the scan runs over [tol, total weight / d].
inline FixedPointResult discretised_fixed_point(const Discretisation& D, double p, int r, double tol = 1e-12,
                                                double step = 1e-4) {
    detail::require(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
    auto f = [&](double x) { return mu_hat(x, D, p, r); };
    auto df = [&](double x) { return mu_hat_derivative(x, D, p, r); };
    const double upper = (D.w_prime + D.light_weight()) / D.d + step;
    return detail::finish_fixed_point(scan_first_root(f, tol, upper, step, tol), f, df, 1e-7);
}

// ---------------------------------------------------------------------------
// CSV: tau,nu,mu_U,I,gamma_i_j (classes numbered from 1)

inline void write_ode_csv(std::ostream& os, const OdeSolution& sol, std::size_t stride = 1) {
    const auto& L = sol.layout;
    os << "tau,nu,mu_U,I";
    for (std::size_t i = 0; i < L.classes; ++i)
        for (int j = 0; j < L.r; ++j) os << ",gamma_" << i + 1 << '_' << j;
    os << '\n';
    os.precision(17);
    stride = std::max<std::size_t>(stride, 1);
    for (std::size_t k = 0; k < sol.rows(); ++k) {
        if (k % stride != 0 && k + 1 != sol.rows()) continue;
        os << sol.tau[k] << ',' << sol.at(k, L.nu()) << ',' << sol.at(k, L.mu()) << ',' << sol.at(k, L.I());
        for (std::size_t i = 0; i < L.classes; ++i)
            for (int j = 0; j < L.r; ++j) os << ',' << sol.at(k, L.gamma(i, j));
        os << '\n';
    }
}

}  // namespace bootperc
