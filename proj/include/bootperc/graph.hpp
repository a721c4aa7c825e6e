#pragma once

// Immutable compressed-adjacency graph plus its two file formats.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bootperc/errors.hpp"

namespace bootperc {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

class SparseGraph {
public:
    SparseGraph() = default;

    /// Builds the CSR form from an undirected edge list. Self-loops and duplicate
    /// edges are rejected (samplers never produce them).
    static SparseGraph from_edges(std::size_t n, std::span<const Edge> edges) {
        SparseGraph g;
        g.offsets_.assign(n + 1, 0);
        for (auto [u, v] : edges) {
            detail::require(u < n && v < n, "edge endpoint out of range");
            detail::require(u != v, "self-loops are not allowed");
            ++g.offsets_[u + 1];
            ++g.offsets_[v + 1];
        }
        for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
        g.neighbors_.resize(g.offsets_[n]);
        std::vector<std::uint64_t> pos(g.offsets_.begin(), g.offsets_.end() - 1);
        for (auto [u, v] : edges) {
            g.neighbors_[pos[u]++] = v;
            g.neighbors_[pos[v]++] = u;
        }
        for (std::size_t i = 0; i < n; ++i) {
            auto b = g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]);
            auto e = g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]);
            std::sort(b, e);
            detail::require(std::adjacent_find(b, e) == e, "duplicate edges are not allowed");
        }
        g.m_ = edges.size();
        return g;
    }

    std::size_t num_vertices() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t num_edges() const noexcept { return m_; }

    std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }

    std::span<const Vertex> neighbors(Vertex v) const {
        return {neighbors_.data() + offsets_[v], static_cast<std::size_t>(offsets_[v + 1] - offsets_[v])};
    }

    bool has_edge(Vertex u, Vertex v) const {
        const auto nb = neighbors(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    double mean_degree() const {
        const auto n = num_vertices();
        return n == 0 ? 0.0 : 2.0 * static_cast<double>(m_) / static_cast<double>(n);
    }

    std::span<const std::uint64_t> offsets() const noexcept { return offsets_; }
    std::span<const Vertex> adjacency() const noexcept { return neighbors_; }

    /// Edges {u, v} with u < v in lexicographic order.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(m_);
        for (Vertex u = 0; u < num_vertices(); ++u)
            for (Vertex v : neighbors(u))
                if (u < v) out.emplace_back(u, v);
        return out;
    }

    /// Every edge of *this is an edge of `super` (vertex labels shared).
    bool is_subgraph_of(const SparseGraph& super) const {
        if (num_vertices() > super.num_vertices()) return false;
        for (Vertex u = 0; u < num_vertices(); ++u) {
            const auto a = neighbors(u);
            const auto b = super.neighbors(u);
            if (!std::includes(b.begin(), b.end(), a.begin(), a.end())) return false;
        }
        return true;
    }

    /// Symmetric, loop-free, no multi-edges, degree sum = 2m.
    bool check_structure() const {
        std::uint64_t deg_sum = 0;
        for (Vertex u = 0; u < num_vertices(); ++u) {
            const auto nb = neighbors(u);
            deg_sum += nb.size();
            for (std::size_t k = 0; k < nb.size(); ++k) {
                if (nb[k] == u || nb[k] >= num_vertices()) return false;
                if (k > 0 && nb[k] <= nb[k - 1]) return false;
                if (!has_edge(nb[k], u)) return false;
            }
        }
        return deg_sum == 2 * m_;
    }

    friend bool operator==(const SparseGraph&, const SparseGraph&) = default;

private:
    std::vector<std::uint64_t> offsets_;
    std::vector<Vertex> neighbors_;
    std::size_t m_ = 0;
};

// ---------------------------------------------------------------------------
// Edge-list CSV: header "u,v", one edge per row with u < v, zero-based.

inline void write_edge_list_csv(std::ostream& os, const SparseGraph& g) {
    os << "u,v\n";
    for (auto [u, v] : g.edges()) os << u << ',' << v << '\n';
}

inline SparseGraph read_edge_list_csv(std::istream& is, std::size_t n) {
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("edge CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "u,v") throw std::invalid_argument("edge CSV: header must be 'u,v'");
    std::vector<Edge> edges;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("edge CSV: malformed row '" + line + "'");
        const auto u = std::stoull(line.substr(0, comma));
        const auto v = std::stoull(line.substr(comma + 1));
        edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
    }
    return SparseGraph::from_edges(n, edges);
}

// ---------------------------------------------------------------------------
// Binary adjacency "CLG1": magic, then little-endian u64 n, u64 m,
// u64 offsets[n+1], u64 neighbors[2m].

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t x) {
    std::array<unsigned char, 8> b{};
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
    os.write(reinterpret_cast<const char*>(b.data()), 8);
}

inline std::uint64_t get_u64(std::istream& is) {
    std::array<unsigned char, 8> b{};
    if (!is.read(reinterpret_cast<char*>(b.data()), 8)) throw std::runtime_error("CLG1: truncated file");
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return x;
}

}  // namespace detail

inline void write_binary(std::ostream& os, const SparseGraph& g) {
    os.write("CLG1", 4);
    detail::put_u64(os, g.num_vertices());
    detail::put_u64(os, g.num_edges());
    for (auto o : g.offsets()) detail::put_u64(os, o);
    for (auto v : g.adjacency()) detail::put_u64(os, v);
}

inline SparseGraph read_binary(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "CLG1", 4) != 0)
        throw std::runtime_error("CLG1: bad magic bytes");
    const auto n = detail::get_u64(is);
    const auto m = detail::get_u64(is);
    std::vector<std::uint64_t> offsets(n + 1);
    for (auto& o : offsets) o = detail::get_u64(is);
    if (offsets.front() != 0 || offsets.back() != 2 * m) throw std::runtime_error("CLG1: inconsistent offsets");
    std::vector<Edge> edges;
    edges.reserve(m);
    for (std::uint64_t u = 0; u < n; ++u) {
        for (auto k = offsets[u]; k < offsets[u + 1]; ++k) {
            const auto v = detail::get_u64(is);
            if (u < v) edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
        }
    }
    auto g = SparseGraph::from_edges(n, edges);
    if (g.num_edges() != m) throw std::runtime_error("CLG1: adjacency is not symmetric");
    return g;
}

}  // namespace bootperc
