#pragma once

// (ell, gamma)-discretisations W^- and W^+ of a weight sequence, their limit
// laws, and the coupled sandwich experiment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bootperc/errors.hpp"
#include "bootperc/graphgen.hpp"
#include "bootperc/percolation.hpp"
#include "bootperc/rng.hpp"
#include "bootperc/weights.hpp"

namespace bootperc {

enum class Side { minus, plus, exact };

inline const char* to_string(Side s) {
    switch (s) {
        case Side::minus: return "minus";
        case Side::plus: return "plus";
        case Side::exact: return "exact";
    }
    return "?";
}

/// Partition of [x_0, C_gamma) into cells [W_i^-, W_i^+). For atomic F every
/// cell is a single atom (W_i^- = W_i^+) and the heavy part is {w > C_gamma}.
struct Partition {
    double gamma_requested = 0.0;
    double gamma = 0.0;  // attained value 1 - F(C_gamma) (atoms) or the request
    bool gamma_snapped = false;
    double c_gamma = 0.0;
    double w_gamma = 0.0;  // tail mean over the heavy part
    bool heavy_strict = false;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> mass;  // F-mass of each cell
    std::size_t ell = 0;
    double eps_ell = 0.0;

    std::size_t size() const noexcept { return lower.size(); }

    bool is_heavy(double w) const { return heavy_strict ? w > c_gamma : w >= c_gamma; }

    /// Cell containing a light weight.
    std::size_t cell_of(double w) const {
        detail::require(!is_heavy(w), "cell_of called on a heavy weight");
        detail::require(w >= lower.front(), "weight below x0 is outside the partition");
        auto it = std::upper_bound(lower.begin(), lower.end(), w);
        return static_cast<std::size_t>(it - lower.begin()) - 1;
    }
};

inline Partition build_partition(const WeightDistribution& dist, double gamma, std::size_t ell) {
    detail::require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
    detail::require(ell >= 1, "ell must be at least 1");
    Partition P;
    P.gamma_requested = gamma;
    P.ell = ell;
    P.c_gamma = c_gamma(dist, gamma);
    if (dist.is_discrete()) {
        const auto m = dist.atoms();
        P.heavy_strict = true;
        for (std::size_t i = 0; i < m.values.size() && m.values[i] <= P.c_gamma; ++i) {
            P.lower.push_back(m.values[i]);
            P.upper.push_back(m.values[i]);
            P.mass.push_back(m.probs[i]);
        }
        P.gamma = dist.survival(P.c_gamma);
        P.gamma_snapped = std::abs(P.gamma - gamma) > 1e-15;
        P.w_gamma = dist.tail_mean_strict(P.c_gamma);
        P.eps_ell = 1.0 / static_cast<double>(ell);
        return P;
    }
    P.gamma = gamma;
    P.w_gamma = dist.tail_mean(P.c_gamma);
    const auto K = static_cast<std::size_t>(std::floor((1.0 - gamma) * static_cast<double>(ell))) + 1;
    const double cell_mass = (1.0 - gamma) / static_cast<double>(K);
    double prev = dist.x0();
    for (std::size_t k = 1; k <= K; ++k) {
        const double next = k == K ? P.c_gamma : dist.quantile(static_cast<double>(k) * cell_mass);
        P.lower.push_back(prev);
        P.upper.push_back(next);
        P.mass.push_back(cell_mass);
        prev = next;
    }
    P.eps_ell = 1.0 / static_cast<double>(ell);
    return P;
}

/// Class-structured limit object feeding the fluid-limit equations. All
/// fractions are relative to the original vertex count n.
struct Discretisation {
    Side side = Side::exact;
    double gamma = 0.0;
    double c_gamma = 0.0;
    std::vector<double> levels;     // W_1 <= ... <= W_{p_ell}
    std::vector<double> fractions;  // gamma_i, sum 1 - gamma
    double gamma_prime = 0.0;       // heavy count / n
    double w_prime = 0.0;           // heavy weight / n
    double d = 0.0;                 // normalizer / n
    std::vector<double> heavy_weights;  // finite-n heavy vertices, if known

    std::size_t num_classes() const noexcept { return levels.size(); }
    double light_fraction() const { return detail::compensated_sum(fractions); }
    double light_weight() const {
        std::vector<double> t(levels.size());
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = levels[i] * fractions[i];
        return detail::compensated_sum(t);
    }
    /// Largest weight present; plays the role of C_gamma for exact discretisations.
    double max_weight() const {
        double m = levels.empty() ? 0.0 : levels.back();
        for (double w : heavy_weights) m = std::max(m, w);
        if (gamma_prime > 0.0) m = std::max(m, c_gamma);
        return m;
    }

    /// gamma = 0: the sequence is already finitary (point mass or mixture).
    static Discretisation exact(const WeightDistribution& dist) {
        detail::require(dist.is_discrete(), "exact discretisation needs a point mass or mixture");
        const auto m = dist.atoms();
        Discretisation D;
        D.side = Side::exact;
        D.levels = m.values;
        D.fractions = m.probs;
        D.d = dist.mean();
        D.c_gamma = m.values.back();
        return D;
    }

    /// Limit of W^- (heavy part -> p*gamma vertices at C_gamma) or of W^+.
    static Discretisation limit(const WeightDistribution& dist, const Partition& P, Side side, double p) {
        detail::require(side != Side::exact, "use Discretisation::exact for gamma = 0");
        detail::require(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
        Discretisation D;
        D.side = side;
        D.gamma = P.gamma;
        D.c_gamma = P.c_gamma;
        D.levels = side == Side::minus ? P.lower : P.upper;
        D.fractions = P.mass;
        D.d = dist.mean();
        const double C = P.c_gamma;
        if (side == Side::minus) {
            D.gamma_prime = p * P.gamma;
            D.w_prime = p * P.gamma * C;
        } else {
            const auto gp = plus_heavy_limits(dist, P);
            D.gamma_prime = gp.first;
            D.w_prime = gp.second;
        }
        return D;
    }

    /// (gamma^+, W_gamma^+) of the plus construction.
    static std::pair<double, double> plus_heavy_limits(const WeightDistribution& dist, const Partition& P) {
        const double C = P.c_gamma;
        const double heavy_mass = P.gamma;
        const double big_mass = dist.survival(2.0 * C) + (dist.cdf(2.0 * C) - dist.cdf_left(2.0 * C));
        const double big_mean = dist.tail_mean(2.0 * C);
        const double mid_mean = P.w_gamma - big_mean;
        return {heavy_mass - big_mass + 2.0 * big_mean / C, mid_mean + 4.0 * big_mean};
    }
};

// ---------------------------------------------------------------------------
// Finite-n constructions

struct MinusSequence {
    std::vector<double> weights;      // aligned with the base sequence; 0 = absent
    std::vector<Vertex> heavy_seeds;  // C_gamma^-, all weight C_gamma, always infected
    std::int64_t k_minus = 0;         // floor(p |C_gamma| - n^{2/3})
    std::size_t heavy_count = 0;      // |C_gamma|
    bool vacuous = false;             // heavy-minus set empty
    Discretisation disc;
};

/// Light vertices round down to W_i^-; the heavy part is replaced by
/// min(|A_0 cap C_gamma|, k_-) vertices of weight C_gamma, identified with the
/// lowest-labelled initially infected heavy vertices.
inline MinusSequence discretise_minus(const WeightSequence& ws, const Partition& P, double p,
                                      std::span<const Vertex> initially_infected) {
    detail::require(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
    const std::size_t n = ws.size();
    MinusSequence out;
    out.weights.assign(n, 0.0);
    std::vector<std::uint8_t> seeded(n, 0);
    for (Vertex v : initially_infected) {
        detail::require(v < n, "seed vertex out of range");
        seeded[v] = 1;
    }
    std::vector<std::size_t> counts(P.size(), 0);
    std::vector<Vertex> heavy_infected;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = ws[i];
        if (P.is_heavy(w)) {
            ++out.heavy_count;
            if (seeded[i]) heavy_infected.push_back(static_cast<Vertex>(i));
            continue;
        }
        const auto c = P.cell_of(w);
        out.weights[i] = P.lower[c];
        ++counts[c];
    }
    out.k_minus = static_cast<std::int64_t>(
        std::floor(p * static_cast<double>(out.heavy_count) - std::pow(static_cast<double>(n), 2.0 / 3.0)));
    const auto k = std::min<std::size_t>(heavy_infected.size(),
                                         static_cast<std::size_t>(std::max<std::int64_t>(out.k_minus, 0)));
    for (std::size_t i = 0; i < k; ++i) {
        out.heavy_seeds.push_back(heavy_infected[i]);
        out.weights[heavy_infected[i]] = P.c_gamma;
    }
    out.vacuous = out.heavy_seeds.empty();

    auto& D = out.disc;
    D.side = Side::minus;
    D.gamma = P.gamma;
    D.c_gamma = P.c_gamma;
    const double nn = static_cast<double>(n);
    for (std::size_t c = 0; c < P.size(); ++c) {
        if (counts[c] == 0) continue;
        D.levels.push_back(P.lower[c]);
        D.fractions.push_back(static_cast<double>(counts[c]) / nn);
    }
    D.gamma_prime = static_cast<double>(k) / nn;
    D.w_prime = static_cast<double>(k) * P.c_gamma / nn;
    D.heavy_weights.assign(k, P.c_gamma);
    D.d = ws.total_weight() / nn;
    return out;
}

/// Same, drawing the initially infected heavy vertices with probability p.
inline MinusSequence discretise_minus(const WeightSequence& ws, const Partition& P, double p, Rng& rng) {
    std::vector<Vertex> seeds;
    for (std::size_t i = 0; i < ws.size(); ++i)
        if (P.is_heavy(ws[i]) && rng.bernoulli(p)) seeds.push_back(static_cast<Vertex>(i));
    return discretise_minus(ws, P, p, seeds);
}

struct PlusSequence {
    std::vector<double> weights;  // light vertices keep labels 0..light_count-1, copies follow
    std::size_t light_count = 0;
    std::size_t heavy_count = 0;   // |C_gamma| in the base sequence
    std::size_t copies = 0;        // replicas of heavy vertices
    std::size_t filler = 0;        // R
    double eps_sum = 0.0;          // sum of eps_j over w_j >= 2 C_gamma
    Discretisation disc;

    std::size_t size() const noexcept { return weights.size(); }
};

/// Light vertices round up to W_i^+; a heavy vertex with w >= 2C becomes
/// 2 floor(w/C) copies of weight 2C, one in [C, 2C) is kept as is, and
/// R = ceil(2 sum eps_j) filler vertices of weight 2C are added.
inline PlusSequence discretise_plus(const WeightSequence& ws, const Partition& P) {
    const std::size_t n = ws.size();
    const double C = P.c_gamma;
    PlusSequence out;
    std::vector<double> heavy;
    std::vector<std::size_t> counts(P.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = ws[i];
        if (P.is_heavy(w)) {
            ++out.heavy_count;
            if (w >= 2.0 * C) {
                const double q = std::floor(w / C);
                out.eps_sum += w / C - q;
                heavy.insert(heavy.end(), static_cast<std::size_t>(2.0 * q), 2.0 * C);
            } else {
                heavy.push_back(w);
            }
            continue;
        }
        const auto c = P.cell_of(w);
        detail::require(w <= P.upper[c], "weight above its cell's upper level");
        // light vertices occupy the low labels because ws is sorted
        detail::require(out.light_count == i, "light vertices must precede heavy ones");
        out.weights.push_back(P.upper[c]);
        ++out.light_count;
        ++counts[c];
    }
    out.copies = heavy.size();
    out.filler = static_cast<std::size_t>(std::ceil(2.0 * out.eps_sum - 1e-12));
    heavy.insert(heavy.end(), out.filler, 2.0 * C);
    out.weights.insert(out.weights.end(), heavy.begin(), heavy.end());

    auto& D = out.disc;
    D.side = Side::plus;
    D.gamma = P.gamma;
    D.c_gamma = C;
    const double nn = static_cast<double>(n);
    for (std::size_t c = 0; c < P.size(); ++c) {
        if (counts[c] == 0) continue;
        D.levels.push_back(P.upper[c]);
        D.fractions.push_back(static_cast<double>(counts[c]) / nn);
    }
    D.gamma_prime = static_cast<double>(heavy.size()) / nn;
    D.w_prime = detail::compensated_sum(heavy) / nn;
    D.heavy_weights = std::move(heavy);
    D.d = ws.total_weight() / nn;
    return out;
}

// ---------------------------------------------------------------------------
// F-convergence

/// rho(gamma) = 2C P(W > 2C) + 3 gamma C + 6 W_gamma + E[W 1{W > 2C}].
inline double rho_error(const WeightDistribution& dist, const Partition& P) {
    const double C = P.c_gamma;
    return 2.0 * C * dist.survival(2.0 * C) + 3.0 * P.gamma * C + 6.0 * P.w_gamma + dist.tail_mean_strict(2.0 * C);
}

struct FConvergenceRow {
    std::size_t ell = 0;
    double sup_gap = 0.0;     // sup over [x0, C] of |F^(l,g) - F|
    double sup_bound = 0.0;   // 2 (gamma + W_gamma / C_gamma)
    double lemma_bound = 0.0; // (3/2)(gamma^+ - gamma)/(1 - gamma + gamma^+)
    double mean_gap = 0.0;    // |E U^(l,g) - d|
    double rho = 0.0;
    bool sup_ok = false;
    bool mean_ok = false;
    bool lemma_ok = false;
};

struct FConvergenceReport {
    double gamma = 0.0;
    Side side = Side::minus;
    std::vector<FConvergenceRow> rows;
    std::optional<std::size_t> l1;  // smallest ell in the family passing the sup condition
    bool gaps_shrink = true;        // sup gaps nonincreasing along the family
};

namespace detail {

// CDF of the normalised limit law of a discretisation, evaluated at x in
// [x0, C_gamma]; `left` selects the left limit.
inline double discretised_cdf(const Discretisation& D, const WeightDistribution& dist, double x, bool left) {
    const double total = D.light_fraction() + D.gamma_prime;
    double acc = 0.0;
    for (std::size_t i = 0; i < D.levels.size(); ++i)
        if (left ? D.levels[i] < x : D.levels[i] <= x) acc += D.fractions[i];
    const double C = D.c_gamma;
    if (D.side == Side::minus) {
        if (left ? C < x : C <= x) acc += D.gamma_prime;
    } else if (D.side == Side::plus) {
        // replicas in [C, 2C) follow F itself
        const double Fx = left ? dist.cdf_left(x) : dist.cdf(x);
        const double Fc = dist.cdf_left(C);
        if (x >= C) acc += std::max(0.0, Fx - Fc);
    }
    return acc / total;
}

}  // namespace detail

inline FConvergenceRow f_convergence_row(const WeightDistribution& dist, double gamma, std::size_t ell, Side side,
                                         double p) {
    const auto P = build_partition(dist, gamma, ell);
    const auto D = Discretisation::limit(dist, P, side, p);
    FConvergenceRow row;
    row.ell = ell;
    std::vector<double> pts{dist.x0(), P.c_gamma};
    pts.insert(pts.end(), P.lower.begin(), P.lower.end());
    pts.insert(pts.end(), P.upper.begin(), P.upper.end());
    for (double x : pts) {
        if (x < dist.x0() || x > P.c_gamma) continue;
        row.sup_gap = std::max(row.sup_gap, std::abs(detail::discretised_cdf(D, dist, x, false) - dist.cdf(x)));
        if (x > dist.x0())
            row.sup_gap = std::max(row.sup_gap,
                                   std::abs(detail::discretised_cdf(D, dist, x, true) - dist.cdf_left(x)));
    }
    row.sup_bound = 2.0 * (P.gamma + P.w_gamma / P.c_gamma);
    const double gplus = Discretisation::plus_heavy_limits(dist, P).first;
    row.lemma_bound = 1.5 * (gplus - P.gamma) / (1.0 - P.gamma + gplus);
    const double mean_disc = (D.light_weight() + D.w_prime) / (D.light_fraction() + D.gamma_prime);
    row.mean_gap = std::abs(mean_disc - dist.mean());
    row.rho = rho_error(dist, P);
    row.sup_ok = row.sup_gap < row.sup_bound;
    row.mean_ok = row.mean_gap < row.rho;
    row.lemma_ok = row.sup_gap < row.lemma_bound;
    return row;
}

inline FConvergenceReport check_f_convergence(const WeightDistribution& dist, double gamma,
                                              std::span<const std::size_t> ells, Side side, double p) {
    detail::require(ells.size() >= 2, "F-convergence check needs at least two values of ell");
    FConvergenceReport rep;
    rep.gamma = gamma;
    rep.side = side;
    for (auto ell : ells) rep.rows.push_back(f_convergence_row(dist, gamma, ell, side, p));
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (rep.rows[i].sup_gap > rep.rows[i - 1].sup_gap + 1e-15) rep.gaps_shrink = false;
    return rep;
}

/// Smallest ell in [1, ell_max] satisfying the sup condition of F-convergence.
inline std::optional<std::size_t> find_l1(const WeightDistribution& dist, double gamma, Side side, double p,
                                          std::size_t ell_max = 4096) {
    for (std::size_t ell = 1; ell <= ell_max; ++ell)
        if (f_convergence_row(dist, gamma, ell, side, p).sup_ok) return ell;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Upper-side edge inequality: w_k w_j / W <= 1 - (1 - 2 w_k C / W)^{2 floor(w_j / C)}

struct BonferroniReport {
    std::size_t checked = 0;
    std::size_t violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();  // min of rhs - lhs
    bool asserted = false;  // only for n >= 10^4; smaller n is report-only
};

inline BonferroniReport bonferroni_report(const WeightSequence& ws, const Partition& P) {
    BonferroniReport rep;
    const double W = ws.total_weight();
    const double C = P.c_gamma;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double w : ws.weights())
        if (!P.is_heavy(w)) lo = std::min(lo, w), hi = std::max(hi, w);
    if (hi == 0.0) return rep;
    // rhs - lhs is concave in w_k, so the light extremes suffice
    for (double wj : ws.weights()) {
        if (wj < 2.0 * C) continue;
        const double copies = 2.0 * std::floor(wj / C);
        for (double wk : {lo, hi}) {
            const double lhs = wk * wj / W;
            const double q = std::min(2.0 * wk * C / W, 1.0);
            const double rhs = -std::expm1(copies * std::log1p(-q));
            ++rep.checked;
            rep.worst_margin = std::min(rep.worst_margin, rhs - lhs);
            if (lhs > rhs) ++rep.violations;
        }
    }
    rep.asserted = ws.size() >= 10000;
    return rep;
}

// ---------------------------------------------------------------------------
// Sandwich experiment

struct DecileCheck {
    double level = 0.0;  // decile of the CL(w) sample
    double x = 0.0;
    double cdf_base = 0.0;
    double cdf_plus = 0.0;
    double sigma = 0.0;
    bool ok = false;     // cdf_plus <= cdf_base + 4 sigma
};

struct SandwichResult {
    std::vector<std::size_t> base;   // |A_f| on CL(w)
    std::vector<std::size_t> minus;  // |A_f^-(A_0 cup C^-)| on the coupled CL'(W^-)
    std::vector<std::size_t> plus;   // |A_f^+(A_0 cup C^+)| on an independent CL'(W^+)
    std::size_t subgraph_failures = 0;
    std::size_t lower_failures = 0;  // |A_f^-| > |A_f| or A_f^- not inside A_f
    std::size_t vacuous_runs = 0;
    std::vector<DecileCheck> deciles;
    bool dominance_ok = true;
    BonferroniReport bonferroni;
    std::size_t n_plus = 0;
    Partition partition;

    bool coupled_ok() const { return subgraph_failures == 0 && lower_failures == 0; }
};

inline std::vector<DecileCheck> ecdf_dominance(std::span<const std::size_t> base, std::span<const std::size_t> upper) {
    std::vector<double> b(base.begin(), base.end()), u(upper.begin(), upper.end());
    std::sort(b.begin(), b.end());
    std::sort(u.begin(), u.end());
    auto ecdf = [](const std::vector<double>& s, double x) {
        return static_cast<double>(std::upper_bound(s.begin(), s.end(), x) - s.begin()) / static_cast<double>(s.size());
    };
    std::vector<DecileCheck> out;
    for (int k = 1; k <= 9; ++k) {
        DecileCheck c;
        c.level = k / 10.0;
        const auto idx = static_cast<std::size_t>(std::ceil(c.level * static_cast<double>(b.size()))) - 1;
        c.x = b[std::min(idx, b.size() - 1)];
        c.cdf_base = ecdf(b, c.x);
        c.cdf_plus = ecdf(u, c.x);
        const double pooled = (c.cdf_base * static_cast<double>(b.size()) + c.cdf_plus * static_cast<double>(u.size())) /
                              static_cast<double>(b.size() + u.size());
        const double var = pooled * (1.0 - pooled) * (1.0 / static_cast<double>(b.size()) + 1.0 / static_cast<double>(u.size()));
        c.sigma = std::max(std::sqrt(var), 1.0 / static_cast<double>(b.size() + u.size()));
        c.ok = c.cdf_plus <= c.cdf_base + 4.0 * c.sigma;
        out.push_back(c);
    }
    return out;
}

/// One replicate: A_0 ~ Bernoulli(p) on [n]; (G, G^-) coupled; G^+ independent.
struct SandwichReplicate {
    std::size_t base = 0, minus = 0, plus = 0;
    bool subgraph = true;
    bool lower = true;
    bool vacuous = false;
};

inline SandwichReplicate sandwich_replicate(const WeightSequence& ws, const Partition& P, double p, int r,
                                            Rng& rng) {
    SandwichReplicate out;
    const auto seeds = seed_bernoulli(ws.size(), p, rng);
    const auto ms = discretise_minus(ws, P, p, seeds);
    out.vacuous = ms.vacuous;
    const auto cg = sample_coupled_minus(ws, ms.weights, rng);
    out.subgraph = cg.graph_minus.is_subgraph_of(cg.graph);

    const auto res = run_bootstrap(cg.graph, seeds, r);
    std::vector<Vertex> seeds_minus;
    for (Vertex v : seeds)
        if (ms.weights[v] > 0.0) seeds_minus.push_back(v);  // light seeds and C_gamma^-
    const auto res_minus = run_bootstrap(cg.graph_minus, seeds_minus, r);
    out.base = res.final_size;
    out.minus = res_minus.final_size;
    out.lower = out.minus <= out.base;
    for (std::size_t v = 0; v < ws.size() && out.lower; ++v)
        if (res_minus.infected[v] && !res.infected[v]) out.lower = false;

    const auto ps = discretise_plus(ws, P);
    const auto gp = sample_chung_lu_prime(ps.weights, ws.total_weight(), rng);
    std::vector<Vertex> seeds_plus;
    for (Vertex v : seeds)
        if (v < ps.light_count) seeds_plus.push_back(v);
    for (std::size_t v = ps.light_count; v < ps.size(); ++v) seeds_plus.push_back(static_cast<Vertex>(v));
    out.plus = run_bootstrap(gp, seeds_plus, r).final_size;
    return out;
}

inline SandwichResult sandwich_experiment(const WeightSequence& ws, const WeightDistribution& dist, double gamma,
                                          std::size_t ell, double p, int r, std::size_t replicates,
                                          std::uint64_t seed) {
    detail::require(replicates >= 1, "sandwich needs at least one replicate");
    SandwichResult out;
    out.partition = build_partition(dist, gamma, ell);
    for (std::size_t k = 0; k < replicates; ++k) {
        auto rng = Rng::stream(seed, k);
        const auto rep = sandwich_replicate(ws, out.partition, p, r, rng);
        out.base.push_back(rep.base);
        out.minus.push_back(rep.minus);
        out.plus.push_back(rep.plus);
        out.subgraph_failures += !rep.subgraph;
        out.lower_failures += !rep.lower;
        out.vacuous_runs += rep.vacuous;
    }
    out.deciles = ecdf_dominance(out.base, out.plus);
    out.dominance_ok = std::all_of(out.deciles.begin(), out.deciles.end(), [](auto& c) { return c.ok; });
    out.bonferroni = bonferroni_report(ws, out.partition);
    out.n_plus = discretise_plus(ws, out.partition).size();
    return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const Discretisation& D) {
    return {{"gamma", D.gamma},
            {"levels", D.levels},
            {"fractions", D.fractions},
            {"heavy", {{"count_fraction", D.gamma_prime}, {"weight_fraction", D.w_prime}, {"side", to_string(D.side)}}}};
}

inline Discretisation discretisation_from_json(const nlohmann::json& j, double d) {
    Discretisation D;
    D.gamma = j.at("gamma").get<double>();
    D.levels = j.at("levels").get<std::vector<double>>();
    D.fractions = j.at("fractions").get<std::vector<double>>();
    const auto& h = j.at("heavy");
    D.gamma_prime = h.at("count_fraction").get<double>();
    D.w_prime = h.at("weight_fraction").get<double>();
    const auto side = h.at("side").get<std::string>();
    D.side = side == "minus" ? Side::minus : side == "plus" ? Side::plus : Side::exact;
    D.d = d;
    detail::require(D.levels.size() == D.fractions.size(), "levels and fractions differ in length");
    D.c_gamma = D.levels.empty() ? 0.0 : D.levels.back();
    return D;
}

}  // namespace bootperc
