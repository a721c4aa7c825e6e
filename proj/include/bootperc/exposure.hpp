#pragma once

// Sequential exposure: reveal the neighbourhood of one infected vertex per
// step, tracking only class counts (members of a class are exchangeable).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "bootperc/errors.hpp"
#include "bootperc/odeflow.hpp"
#include "bootperc/rng.hpp"
#include "bootperc/weights.hpp"

namespace bootperc {

struct ExposureInput {
    std::vector<double> levels;               // W_i
    std::vector<std::uint64_t> healthy;       // c_{i,0}(0): uninfected members of class i
    std::vector<std::uint64_t> seeded;        // initially infected members of class i
    std::vector<double> always_infected;      // heavy vertices placed in U(0) with their weights
    double normalizer = 0.0;
    int r = 2;
};

/// Class counts with each class member seeded independently with probability p.
inline ExposureInput exposure_input(std::span<const double> levels, std::span<const std::uint64_t> counts, double p,
                                    double normalizer, int r, Rng& rng,
                                    std::span<const double> always_infected = {}) {
    detail::require(levels.size() == counts.size(), "levels and counts differ in length");
    ExposureInput in;
    in.levels.assign(levels.begin(), levels.end());
    in.normalizer = normalizer;
    in.r = r;
    in.always_infected.assign(always_infected.begin(), always_infected.end());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const auto s = rng.binomial(counts[i], p);
        in.seeded.push_back(s);
        in.healthy.push_back(counts[i] - s);
    }
    return in;
}

/// From a class-labelled sequence and an explicit seed set.
inline ExposureInput exposure_input(const WeightSequence& ws, std::span<const std::uint32_t> seeds, double normalizer,
                                    int r, std::span<const double> always_infected = {}) {
    detail::require(ws.has_classes(), "sequential exposure needs a class-labelled sequence");
    ExposureInput in;
    in.normalizer = normalizer;
    in.r = r;
    in.always_infected.assign(always_infected.begin(), always_infected.end());
    const auto k = ws.num_classes();
    in.levels.assign(k, 0.0);
    std::vector<std::uint64_t> total(k, 0);
    in.seeded.assign(k, 0);
    std::vector<std::uint8_t> is_seed(ws.size(), 0);
    for (auto s : seeds) {
        detail::require(s < ws.size(), "seed vertex out of range");
        is_seed[s] = 1;
    }
    for (std::size_t v = 0; v < ws.size(); ++v) {
        const auto c = ws.class_of()[v];
        detail::require(c >= 0, "every vertex needs a class");
        const auto ci = static_cast<std::size_t>(c);
        in.levels[ci] = ws[v];
        ++total[ci];
        in.seeded[ci] += is_seed[v];
    }
    for (std::size_t i = 0; i < k; ++i) in.healthy.push_back(total[i] - in.seeded[i]);
    return in;
}

struct PercolationTrajectory {
    std::size_t classes = 0;
    int r = 0;
    std::vector<std::uint64_t> t;
    std::vector<std::uint64_t> u;
    std::vector<double> w_u;
    std::vector<std::uint64_t> c;  // per record, classes * r counts, row-major (i, j)
    std::uint64_t final_count = 0; // steps executed = |A_f|
    std::uint64_t initial_infected = 0;

    std::size_t records() const { return t.size(); }
    std::uint64_t count(std::size_t rec, std::size_t i, int j) const {
        return c[rec * classes * static_cast<std::size_t>(r) + i * static_cast<std::size_t>(r) + static_cast<std::size_t>(j)];
    }
};

/// Runs the exposure process to extinction of U. Records V(t) every `stride`
/// steps and always at t = 0 and at the final step.
inline PercolationTrajectory run_sequential_exposure(const ExposureInput& in, Rng& rng, std::uint64_t stride = 1) {
    const std::size_t k = in.levels.size();
    const int r = in.r;
    detail::require(r >= 1, "threshold r must be at least 1");
    detail::require(in.healthy.size() == k && in.seeded.size() == k, "class vectors differ in length");
    detail::require(in.normalizer > 0.0, "normalizer must be positive");
    stride = std::max<std::uint64_t>(stride, 1);

    PercolationTrajectory tr;
    tr.classes = k;
    tr.r = r;
    const auto R = static_cast<std::size_t>(r);
    std::vector<std::uint64_t> c(k * R, 0);
    std::vector<std::uint64_t> in_u(k, 0);  // unexposed infected light vertices per class
    for (std::size_t i = 0; i < k; ++i) {
        c[i * R] = in.healthy[i];
        in_u[i] = in.seeded[i];
    }
    std::vector<double> heavy(in.always_infected);
    long double heavy_sum = 0.0L;
    for (double w : heavy) heavy_sum += w;

    std::uint64_t light_u = 0;
    for (auto x : in_u) light_u += x;
    auto w_u = [&] {
        long double s = heavy_sum;
        for (std::size_t i = 0; i < k; ++i) s += static_cast<long double>(in_u[i]) * in.levels[i];
        return static_cast<double>(s);
    };
    auto record = [&](std::uint64_t t) {
        tr.t.push_back(t);
        tr.u.push_back(light_u + heavy.size());
        tr.w_u.push_back(w_u());
        tr.c.insert(tr.c.end(), c.begin(), c.end());
    };
    tr.initial_infected = light_u + heavy.size();
    record(0);

    std::uint64_t t = 0;
    while (light_u + heavy.size() > 0) {
        ++t;
        // pick v uniformly from U
        const auto pick = rng.below(light_u + heavy.size());
        double wv;
        if (pick < light_u) {
            std::uint64_t acc = 0;
            std::size_t i = 0;
            for (; i < k; ++i) {
                acc += in_u[i];
                if (pick < acc) break;
            }
            wv = in.levels[i];
            --in_u[i];
            --light_u;
        } else {
            const auto h = static_cast<std::size_t>(pick - light_u);
            wv = heavy[h];
            heavy_sum -= wv;
            heavy[h] = heavy.back();
            heavy.pop_back();
        }
        // marks: every waiting vertex independently, from the t-1 counts
        for (std::size_t i = 0; i < k; ++i) {
            const double q = std::min(in.levels[i] * wv / in.normalizer, 1.0);
            for (int j = r - 1; j >= 0; --j) {
                auto& cij = c[i * R + static_cast<std::size_t>(j)];
                const auto m = rng.binomial(cij, q);
                if (m == 0) continue;
                cij -= m;
                if (j == r - 1) {
                    in_u[i] += m;
                    light_u += m;
                } else {
                    c[i * R + static_cast<std::size_t>(j) + 1] += m;
                }
            }
        }
        if (t % stride == 0 || light_u + heavy.size() == 0) record(t);
    }
    tr.final_count = t;
    return tr;
}

inline void write_trajectory_csv(std::ostream& os, const PercolationTrajectory& tr) {
    os << "t,u,w_U";
    for (std::size_t i = 0; i < tr.classes; ++i)
        for (int j = 0; j < tr.r; ++j) os << ",c_" << i + 1 << '_' << j;
    os << '\n';
    os.precision(17);
    for (std::size_t k = 0; k < tr.records(); ++k) {
        os << tr.t[k] << ',' << tr.u[k] << ',' << tr.w_u[k];
        for (std::size_t i = 0; i < tr.classes; ++i)
            for (int j = 0; j < tr.r; ++j) os << ',' << tr.count(k, i, j);
        os << '\n';
    }
}

struct DeviationReport {
    double u = 0.0;     // sup |u(t)/n - nu(t/n)|
    double w_u = 0.0;   // sup |w_U(t)/n - mu_U(t/n)|
    double c = 0.0;     // sup over (i, j) of |c_ij(t)/n - gamma_ij(t/n)|
    bool truncated = false;  // trajectory ran past the solved ODE range
    std::size_t compared = 0;

    double max() const { return std::max({u, w_u, c}); }
};

/// Sup-norm deviations between the scaled trajectory and the fluid limit,
/// interpolating the ODE at t/n. Records beyond tau_hat are skipped and flagged.
inline DeviationReport deviation_report(const PercolationTrajectory& tr, const OdeSolution& sol, double n) {
    detail::require(tr.classes == sol.layout.classes && tr.r == sol.layout.r,
                    "trajectory and ODE have different class structure");
    DeviationReport rep;
    const auto& L = sol.layout;
    const double tau_end = sol.tau.back();
    for (std::size_t k = 0; k < tr.records(); ++k) {
        const double tau = static_cast<double>(tr.t[k]) / n;
        if (tau > tau_end) {
            rep.truncated = true;
            continue;
        }
        const auto s = sol.interpolate(tau);
        ++rep.compared;
        rep.u = std::max(rep.u, std::abs(static_cast<double>(tr.u[k]) / n - s[L.nu()]));
        rep.w_u = std::max(rep.w_u, std::abs(tr.w_u[k] / n - s[L.mu()]));
        for (std::size_t i = 0; i < tr.classes; ++i)
            for (int j = 0; j < tr.r; ++j)
                rep.c = std::max(rep.c, std::abs(static_cast<double>(tr.count(k, i, j)) / n - s[L.gamma(i, j)]));
    }
    return rep;
}

}  // namespace bootperc
