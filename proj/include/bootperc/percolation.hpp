#pragma once

// Threshold-r bootstrap percolation on a fixed graph.

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "bootperc/errors.hpp"
#include "bootperc/graph.hpp"
#include "bootperc/rng.hpp"

namespace bootperc {

struct PercolationResult {
    std::vector<std::uint8_t> infected;  // indicator of A_f
    std::size_t initial_size = 0;        // |A_0| after removing duplicates
    std::size_t final_size = 0;          // |A_f|
    std::size_t rounds = 0;              // synchronous waves that infected someone
    std::vector<std::size_t> per_round;  // newly infected per round; entry 0 is |A_0|

    bool contains(Vertex v) const { return infected[v] != 0; }
};

namespace detail {

inline std::vector<std::uint8_t> seed_mask(std::size_t n, std::span<const Vertex> seeds) {
    std::vector<std::uint8_t> mask(n, 0);
    for (Vertex s : seeds) {
        require(s < n, "seed vertex out of range");
        mask[s] = 1;
    }
    return mask;
}

}  // namespace detail

/// Queue-based engine, O(n + m). A vertex with frozen[v] != 0 never becomes
/// infected unless it is a seed. Rounds are recovered by processing the queue
/// one frontier at a time, which reproduces the synchronous schedule.
inline PercolationResult run_bootstrap(const SparseGraph& g, std::span<const Vertex> seeds, int r,
                                       std::span<const std::uint8_t> frozen = {}) {
    detail::require(r >= 1, "threshold r must be at least 1");
    const std::size_t n = g.num_vertices();
    detail::require(frozen.empty() || frozen.size() == n, "frozen mask must cover every vertex");
    PercolationResult out;
    out.infected = detail::seed_mask(n, seeds);
    std::vector<Vertex> frontier;
    for (Vertex v = 0; v < n; ++v)
        if (out.infected[v]) frontier.push_back(v);
    out.initial_size = frontier.size();
    out.per_round.push_back(frontier.size());

    std::vector<std::uint32_t> hits(n, 0);
    std::vector<Vertex> next;
    std::size_t total = frontier.size();
    while (!frontier.empty()) {
        next.clear();
        for (Vertex u : frontier) {
            for (Vertex v : g.neighbors(u)) {
                if (out.infected[v]) continue;
                if (++hits[v] == static_cast<std::uint32_t>(r) && (frozen.empty() || !frozen[v])) {
                    out.infected[v] = 1;
                    next.push_back(v);
                }
            }
        }
        if (next.empty()) break;
        ++out.rounds;
        out.per_round.push_back(next.size());
        total += next.size();
        frontier.swap(next);
    }
    out.final_size = total;
    return out;
}

/// Reference engine: recount every uninfected vertex against the previous
/// round's state until nothing changes. O(rounds * m); used for testing.
inline PercolationResult run_bootstrap_synchronous(const SparseGraph& g, std::span<const Vertex> seeds, int r,
                                                   std::span<const std::uint8_t> frozen = {}) {
    detail::require(r >= 1, "threshold r must be at least 1");
    const std::size_t n = g.num_vertices();
    detail::require(frozen.empty() || frozen.size() == n, "frozen mask must cover every vertex");
    PercolationResult out;
    out.infected = detail::seed_mask(n, seeds);
    out.initial_size = static_cast<std::size_t>(std::count(out.infected.begin(), out.infected.end(), 1));
    out.per_round.push_back(out.initial_size);
    std::size_t total = out.initial_size;
    for (;;) {
        std::vector<Vertex> newly;
        for (Vertex v = 0; v < n; ++v) {
            if (out.infected[v] || (!frozen.empty() && frozen[v])) continue;
            int c = 0;
            for (Vertex u : g.neighbors(v)) c += out.infected[u];
            if (c >= r) newly.push_back(v);
        }
        if (newly.empty()) break;
        for (Vertex v : newly) out.infected[v] = 1;
        ++out.rounds;
        out.per_round.push_back(newly.size());
        total += newly.size();
    }
    out.final_size = total;
    return out;
}

/// Post-hoc certificate: A_0 within A_f, every late infection has >= r infected
/// neighbours, and every healthy non-frozen vertex has < r.
inline bool verify_fixed_point(const SparseGraph& g, std::span<const Vertex> seeds, const PercolationResult& res,
                               int r, std::span<const std::uint8_t> frozen = {}) {
    const std::size_t n = g.num_vertices();
    if (res.infected.size() != n) return false;
    const auto seeded = detail::seed_mask(n, seeds);
    std::size_t count = 0;
    for (Vertex v = 0; v < n; ++v) {
        count += res.infected[v];
        if (seeded[v] && !res.infected[v]) return false;
        int c = 0;
        for (Vertex u : g.neighbors(v)) c += res.infected[u];
        if (res.infected[v] && !seeded[v] && (c < r || (!frozen.empty() && frozen[v]))) return false;
        if (!res.infected[v] && c >= r && (frozen.empty() || !frozen[v])) return false;
    }
    return count == res.final_size;
}

/// Every vertex independently with probability q, returned in increasing order.
inline std::vector<Vertex> seed_bernoulli(std::size_t n, double q, Rng& rng) {
    detail::require(q >= 0.0 && q <= 1.0, "seed probability must lie in [0, 1]");
    std::vector<Vertex> out;
    if (q <= 0.0 || n == 0) return out;
    if (q >= 1.0) {
        out.resize(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<Vertex>(i);
        return out;
    }
    out.reserve(static_cast<std::size_t>(q * static_cast<double>(n) * 1.1) + 16);
    std::uint64_t i = rng.geometric_skip(q);
    while (i < n) {
        out.push_back(static_cast<Vertex>(i));
        const auto skip = rng.geometric_skip(q);
        if (skip >= n) break;
        i += skip + 1;
    }
    return out;
}

}  // namespace bootperc
