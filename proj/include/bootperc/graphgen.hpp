#pragma once

// Samplers for CL(w), CL'(w', W) and the monotone coupling CL'(w^-) <= CL(w).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "bootperc/errors.hpp"
#include "bootperc/graph.hpp"
#include "bootperc/rng.hpp"
#include "bootperc/weights.hpp"

namespace bootperc {

/// min(w_u w_v / normalizer, 1)
inline double edge_probability(double wu, double wv, double normalizer) {
    return std::min(wu * wv / normalizer, 1.0);
}

/// Sequences with at most this many distinct weights use the class-block sampler.
inline constexpr std::size_t kMaxBlockClasses = 64;

namespace detail {

// Geometric jumps over the pairs of each class block; every block has a constant
// probability so skips are exact. Expected cost O(k^2 + n + m).
inline std::vector<Edge> sample_class_blocks(double normalizer, const std::vector<double>& levels,
                                             const std::vector<std::vector<Vertex>>& members, Rng& rng) {
    std::vector<Edge> edges;
    const std::size_t k = levels.size();
    for (std::size_t a = 0; a < k; ++a) {
        const auto& A = members[a];
        for (std::size_t b = a; b < k; ++b) {
            const auto& B = members[b];
            const double q = edge_probability(levels[a], levels[b], normalizer);
            if (q <= 0.0) continue;
            if (a == b) {
                // Batagelj-Brandes walk over the strict lower triangle of A x A
                const auto sz = static_cast<std::int64_t>(A.size());
                std::int64_t row = 1, col = -1;
                while (row < sz) {
                    const auto skip = rng.geometric_skip(q);
                    if (skip >= static_cast<std::uint64_t>(sz) * static_cast<std::uint64_t>(sz)) break;
                    col += 1 + static_cast<std::int64_t>(skip);
                    while (col >= row && row < sz) {
                        col -= row;
                        ++row;
                    }
                    if (row < sz) edges.emplace_back(A[col], A[row]);
                }
            } else {
                const auto total = static_cast<std::uint64_t>(A.size()) * B.size();
                std::uint64_t idx = 0;
                while (true) {
                    const auto skip = rng.geometric_skip(q);
                    if (skip >= total - idx) break;
                    idx += skip;
                    edges.emplace_back(A[idx / B.size()], B[idx % B.size()]);
                    ++idx;
                    if (idx >= total) break;
                }
            }
        }
    }
    return edges;
}

// Miller-Hagberg: vertices in decreasing weight order; within a row the
// probability is nonincreasing, so skips drawn with the current bound p are
// corrected by thinning with q/p. Exact, expected O(n + m).
inline std::vector<Edge> sample_sorted_rows(std::span<const double> w, double normalizer, Rng& rng) {
    const std::size_t n = w.size();
    std::vector<Vertex> order(n);
    std::iota(order.begin(), order.end(), Vertex{0});
    std::stable_sort(order.begin(), order.end(), [&](Vertex a, Vertex b) { return w[a] > w[b]; });
    std::vector<Edge> edges;
    for (std::size_t u = 0; u + 1 < n; ++u) {
        const double wu = w[order[u]];
        if (wu <= 0.0) break;
        std::size_t v = u + 1;
        double p = edge_probability(wu, w[order[v]], normalizer);
        while (v < n && p > 0.0) {
            if (p < 1.0) {
                const auto skip = rng.geometric_skip(p);
                if (skip >= n - v) break;
                v += skip;
            }
            const double q = edge_probability(wu, w[order[v]], normalizer);
            if (q >= p || rng.uniform() < q / p) {
                const Vertex a = order[u], b = order[v];
                edges.emplace_back(std::min(a, b), std::max(a, b));
            }
            p = q;
            ++v;
        }
    }
    return edges;
}

inline std::vector<Edge> sample_edges(std::span<const double> w, double normalizer, Rng& rng) {
    std::map<double, std::vector<Vertex>> classes;
    for (Vertex i = 0; i < w.size(); ++i) {
        auto& bucket = classes[w[i]];
        bucket.push_back(i);
        if (classes.size() > kMaxBlockClasses) return sample_sorted_rows(w, normalizer, rng);
    }
    std::vector<double> levels;
    std::vector<std::vector<Vertex>> members;
    for (auto& [lvl, vs] : classes) {
        levels.push_back(lvl);
        members.push_back(std::move(vs));
    }
    return sample_class_blocks(normalizer, levels, members, rng);
}

}  // namespace detail

/// CL'(w', normalizer): pair {i, j} present independently with min(w'_i w'_j / normalizer, 1).
/// Zero weights are allowed and give isolated vertices.
inline SparseGraph sample_chung_lu_prime(std::span<const double> weights, double normalizer, Rng& rng) {
    detail::require(normalizer > 0.0 && std::isfinite(normalizer), "normalizer must be positive");
    for (double w : weights) detail::require(w >= 0.0 && std::isfinite(w), "weights must be non-negative");
    const auto edges = detail::sample_edges(weights, normalizer, rng);
    return SparseGraph::from_edges(weights.size(), edges);
}

inline SparseGraph sample_chung_lu_prime(const WeightSequence& ws, double normalizer, Rng& rng) {
    return sample_chung_lu_prime(ws.weights(), normalizer, rng);
}

/// CL(w): normalizer W_[n](w).
inline SparseGraph sample_chung_lu(const WeightSequence& ws, Rng& rng) {
    return sample_chung_lu_prime(ws.weights(), ws.total_weight(), rng);
}

/// O(n^2) reference sampler: one Bernoulli per pair.
inline SparseGraph sample_chung_lu_naive(std::span<const double> weights, double normalizer, Rng& rng) {
    std::vector<Edge> edges;
    const auto n = static_cast<Vertex>(weights.size());
    for (Vertex i = 0; i < n; ++i)
        for (Vertex j = i + 1; j < n; ++j)
            if (rng.uniform() < edge_probability(weights[i], weights[j], normalizer)) edges.emplace_back(i, j);
    return SparseGraph::from_edges(n, edges);
}

// ---------------------------------------------------------------------------
// Monotone coupling

/// Enough to regenerate both coupled graphs bit-exactly.
struct CouplingTranscript {
    std::uint64_t seed = 0;
    double normalizer = 0.0;
};

struct CoupledGraphs {
    SparseGraph graph;        // CL(w)
    SparseGraph graph_minus;  // CL'(w^-, W_[n](w)), same vertex labels
    CouplingTranscript transcript;
};

namespace detail {

inline CoupledGraphs sample_coupled_from_seed(const WeightSequence& ws, std::span<const double> minus,
                                              std::uint64_t seed) {
    const double normalizer = ws.total_weight();
    Rng rng(seed);
    auto g = sample_chung_lu_prime(ws.weights(), normalizer, rng);
    // Shared-uniform coupling: a pair's uniform U satisfies U < p for every edge of
    // G, and conditionally on that U is uniform on [0, p); the pair enters G^- iff U < p^-.
    std::vector<Edge> minus_edges;
    for (auto [u, v] : g.edges()) {
        const double p = edge_probability(ws[u], ws[v], normalizer);
        const double pm = edge_probability(minus[u], minus[v], normalizer);
        if (rng.uniform() * p < pm) minus_edges.emplace_back(u, v);
    }
    auto gm = SparseGraph::from_edges(ws.size(), minus_edges);
    return {std::move(g), std::move(gm), CouplingTranscript{seed, normalizer}};
}

}  // namespace detail

/// Samples G ~ CL(w) and G^- ~ CL'(w^-, W_[n](w)) on a common probability space
/// with G^- a subgraph of G. `minus` is aligned with the vertices of `ws`;
/// zero marks a vertex absent from the minus sequence.
inline CoupledGraphs sample_coupled_minus(const WeightSequence& ws, std::span<const double> minus, Rng& rng) {
    detail::require(minus.size() == ws.size(), "minus weights must align with the base sequence");
    for (std::size_t i = 0; i < ws.size(); ++i)
        detail::require(minus[i] >= 0.0 && minus[i] <= ws[i], "minus weights must be dominated pointwise");
    return detail::sample_coupled_from_seed(ws, minus, rng());
}

inline CoupledGraphs replay_coupled_minus(const WeightSequence& ws, std::span<const double> minus,
                                          const CouplingTranscript& transcript) {
    detail::require(minus.size() == ws.size(), "minus weights must align with the base sequence");
    return detail::sample_coupled_from_seed(ws, minus, transcript.seed);
}

// ---------------------------------------------------------------------------
// Expected-degree diagnostics

/// Exact E[deg(i)] = sum_{j != i} min(w_i w_j / normalizer, 1) for every vertex.
inline std::vector<double> expected_degrees(std::span<const double> w, double normalizer) {
    const std::size_t n = w.size();
    std::vector<double> sorted(w.begin(), w.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + sorted[i];
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w[i];
        if (wi <= 0.0) {
            out[i] = 0.0;
            continue;
        }
        // j saturates iff w_j >= normalizer / w_i
        const auto cut = static_cast<std::size_t>(
            std::lower_bound(sorted.begin(), sorted.end(), normalizer / wi) - sorted.begin());
        double e = wi * prefix[cut] / normalizer + static_cast<double>(n - cut);
        e -= edge_probability(wi, wi, normalizer);
        out[i] = e;
    }
    return out;
}

struct DegreeClassRow {
    double weight;          // mean weight of the class
    std::size_t count;
    double mean_degree;     // observed
    double expected_degree; // exact mean over the class
    double sigma;           // standard deviation of the observed class mean (upper bound for binned classes)
};

/// Per-class observed vs expected mean degree. Classes are the discretisation
/// classes when present, else distinct weights (if few), else ten quantile bins.
inline std::vector<DegreeClassRow> expected_degree_report(const WeightSequence& ws, const SparseGraph& g) {
    detail::require(g.num_vertices() == ws.size(), "graph and weights disagree on n");
    const auto w = ws.weights();
    const double normalizer = ws.total_weight();
    const std::size_t n = ws.size();

    std::vector<std::size_t> group(n);
    std::size_t num_groups = 0;
    bool exact_groups = true;
    if (ws.has_classes()) {
        std::map<std::int32_t, std::size_t> ids;
        for (std::size_t i = 0; i < n; ++i) ids.emplace(ws.class_of()[i], 0);
        for (auto& [k, id] : ids) id = num_groups++;
        for (std::size_t i = 0; i < n; ++i) group[i] = ids[ws.class_of()[i]];
    } else {
        std::map<double, std::size_t> ids;
        for (double x : w) {
            ids.emplace(x, 0);
            if (ids.size() > kMaxBlockClasses) break;
        }
        if (ids.size() <= kMaxBlockClasses) {
            for (auto& [k, id] : ids) id = num_groups++;
            for (std::size_t i = 0; i < n; ++i) group[i] = ids[w[i]];
        } else {
            exact_groups = false;
            num_groups = std::min<std::size_t>(10, n);
            for (std::size_t i = 0; i < n; ++i) group[i] = i * num_groups / n;  // w is sorted
        }
    }

    const auto expected = expected_degrees(w, normalizer);
    std::vector<double> wsum(num_groups, 0.0), dsum(num_groups, 0.0), esum(num_groups, 0.0), var(num_groups, 0.0);
    std::vector<std::size_t> cnt(num_groups, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = group[i];
        ++cnt[k];
        wsum[k] += w[i];
        dsum[k] += static_cast<double>(g.degree(static_cast<Vertex>(i)));
        esum[k] += expected[i];
    }
    if (exact_groups) {
        // Var(sum of class degrees) = inter-class Bernoulli variances + 4 x intra-class ones
        std::vector<double> level(num_groups);
        for (std::size_t k = 0; k < num_groups; ++k) level[k] = wsum[k] / static_cast<double>(cnt[k]);
        for (std::size_t a = 0; a < num_groups; ++a)
            for (std::size_t b = 0; b < num_groups; ++b) {
                const double p = edge_probability(level[a], level[b], normalizer);
                const double pairs = a == b ? 0.5 * static_cast<double>(cnt[a]) * static_cast<double>(cnt[a] - 1)
                                            : static_cast<double>(cnt[a]) * static_cast<double>(cnt[b]);
                var[a] += (a == b ? 4.0 : 1.0) * pairs * p * (1.0 - p);
            }
    } else {
        // sum_j p(1-p) <= E[deg i]
        for (std::size_t i = 0; i < n; ++i) var[group[i]] += 2.0 * expected[i];
    }
    std::vector<DegreeClassRow> rows;
    for (std::size_t k = 0; k < num_groups; ++k) {
        const auto c = static_cast<double>(cnt[k]);
        rows.push_back({wsum[k] / c, cnt[k], dsum[k] / c, esum[k] / c, std::sqrt(var[k]) / c});
    }
    return rows;
}

}  // namespace bootperc
