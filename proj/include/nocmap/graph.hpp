// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "nocmap/detail/util.hpp"
#include "nocmap/error.hpp"

namespace nocmap {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

/// Immutable directed weighted multigraph in compressed adjacency form.
///
/// Vertex ids are dense (0..num_vertices-1). Out-edge lists are kept sorted
/// by destination id, then weight, which makes the edge-id numbering (CSR
/// position) canonical: two graphs built from the same edge multiset compare
/// equal field by field. Parallel edges and self-loops are kept; they carry
/// real traffic. An in-edge index (built once at construction) is provided
/// for reduce-style traversals.
class Graph {
   public:
    Graph() = default;

    /// Builds the canonical form from an arbitrary edge list.
    /// Every endpoint must be < num_vertices; weights must be >= 0.
    static Graph from_edges(std::uint64_t num_vertices,
                            std::vector<std::tuple<VertexId, VertexId, double>> edges) {
        Graph g;
        g.n_ = num_vertices;
        for (const auto &[u, v, w] : edges) {
            if (u >= num_vertices || v >= num_vertices)
                throw Error("edge endpoint " + std::to_string(std::max(u, v)) +
                            " out of range (num_vertices=" + std::to_string(num_vertices) + ")");
            if (w < 0.0) throw NegativeWeightError("negative edge weight");
        }
        if (edges.size() >= std::numeric_limits<EdgeId>::max())
            throw Error("graph too large for 32-bit edge ids");
        std::sort(edges.begin(), edges.end());
        g.m_ = edges.size();
        g.offsets_.assign(num_vertices + 1, 0);
        g.targets_.reserve(edges.size());
        g.weights_.reserve(edges.size());
        for (const auto &[u, v, w] : edges) g.offsets_[u + 1]++;
        for (std::uint64_t v = 0; v < num_vertices; ++v) g.offsets_[v + 1] += g.offsets_[v];
        for (const auto &[u, v, w] : edges) {
            g.targets_.push_back(v);
            g.weights_.push_back(w);
        }
        g.build_in_index();
        return g;
    }

    std::uint64_t num_vertices() const { return n_; }
    std::uint64_t num_edges() const { return m_; }

    std::uint32_t out_degree(VertexId v) const { return offsets_[v + 1] - offsets_[v]; }
    std::uint32_t in_degree(VertexId v) const { return in_offsets_[v + 1] - in_offsets_[v]; }

    /// First edge id of v's out-edge range; edge ids are CSR positions.
    EdgeId out_begin(VertexId v) const { return offsets_[v]; }
    EdgeId out_end(VertexId v) const { return offsets_[v + 1]; }

    VertexId edge_target(EdgeId e) const { return targets_[e]; }
    double edge_weight(EdgeId e) const { return weights_[e]; }
    VertexId edge_source(EdgeId e) const {
        // Edge ids are CSR positions, so the source is recoverable by search.
        auto it = std::upper_bound(offsets_.begin(), offsets_.end(), e);
        return static_cast<VertexId>((it - offsets_.begin()) - 1);
    }

    /// In-edge index: for vertex v, the ids of edges (u, v), sorted by source.
    const EdgeId *in_edges_begin(VertexId v) const { return in_edges_.data() + in_offsets_[v]; }
    const EdgeId *in_edges_end(VertexId v) const { return in_edges_.data() + in_offsets_[v + 1]; }

    bool has_negative_weight() const {
        return std::any_of(weights_.begin(), weights_.end(), [](double w) { return w < 0.0; });
    }

    /// Original id of a dense vertex id, when the source file had gaps.
    /// Identity when no remapping happened.
    std::uint64_t original_id(VertexId v) const {
        return original_ids_.empty() ? v : original_ids_[v];
    }
    bool was_remapped() const { return !original_ids_.empty(); }

    bool operator==(const Graph &other) const {
        return n_ == other.n_ && offsets_ == other.offsets_ && targets_ == other.targets_ &&
               weights_ == other.weights_;
    }

   private:
    friend Graph load_edge_list(const std::string &, bool, bool);

    void build_in_index() {
        in_offsets_.assign(n_ + 1, 0);
        in_edges_.resize(m_);
        for (EdgeId e = 0; e < m_; ++e) in_offsets_[targets_[e] + 1]++;
        for (std::uint64_t v = 0; v < n_; ++v) in_offsets_[v + 1] += in_offsets_[v];
        std::vector<std::uint32_t> cursor(in_offsets_.begin(), in_offsets_.end() - 1);
        // Walking edge ids in order keeps each in-list sorted by source id.
        for (EdgeId e = 0; e < m_; ++e) in_edges_[cursor[targets_[e]]++] = e;
    }

    std::uint64_t n_ = 0;
    std::uint64_t m_ = 0;
    std::vector<std::uint32_t> offsets_;   // size n+1
    std::vector<VertexId> targets_;        // size m
    std::vector<double> weights_;          // size m
    std::vector<std::uint32_t> in_offsets_;
    std::vector<EdgeId> in_edges_;
    std::vector<std::uint64_t> original_ids_;  // empty when identity
};

/// Reads a SNAP-style edge list: one "src dst" or "src dst weight" per line,
/// '#'-prefixed comment lines. A comment of the form "# Nodes: N" declares
/// the vertex universe (this is what save_edge_list emits, and it is what
/// keeps isolated vertices across a round-trip). Without a declaration the
/// vertex count is max id + 1. Files whose ids exceed the declared universe
/// (gappy SNAP downloads) are densified: distinct ids map, in ascending
/// order, to 0..D-1, and the original ids stay available for reporting.
inline Graph load_edge_list(const std::string &path, bool weighted, bool densify = true) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open edge list: " + path);

    std::vector<std::tuple<std::uint64_t, std::uint64_t, double>> raw;
    std::optional<std::uint64_t> declared_nodes;
    std::uint64_t max_id = 0;
    bool any_edge = false;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t i = 0;
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) continue;
        if (line[i] == '#') {
            // Look for "Nodes: <n>" in the comment (SNAP header convention).
            std::istringstream cs(line.substr(i + 1));
            std::string word;
            while (cs >> word) {
                if (word == "Nodes:" || word == "nodes:" || word == "Nodes" || word == "nodes") {
                    std::uint64_t n;
                    if (cs >> n) declared_nodes = n;
                    break;
                }
            }
            continue;
        }
        std::istringstream ls(line);
        std::uint64_t u, v;
        if (!(ls >> u >> v)) throw ParseError("malformed edge line", lineno);
        double w = 1.0;
        if (weighted) {
            if (!(ls >> w)) throw ParseError("missing weight column", lineno);
            if (w < 0.0) throw ParseError("negative edge weight", lineno);
        }
        std::string trailing;
        if (ls >> trailing && !trailing.empty() && trailing[0] != '#')
            throw ParseError("trailing tokens on edge line", lineno);
        raw.emplace_back(u, v, w);
        max_id = std::max({max_id, u, v});
        any_edge = true;
    }

    std::uint64_t universe = any_edge ? max_id + 1 : 0;
    if (declared_nodes) universe = std::max(universe, *declared_nodes);

    std::vector<std::uint64_t> remap_table;
    if (densify && any_edge && declared_nodes && max_id + 1 > *declared_nodes) {
        // Ids exceed the declared universe: compact the observed ids.
        std::vector<std::uint64_t> ids;
        ids.reserve(raw.size() * 2);
        for (const auto &[u, v, w] : raw) {
            ids.push_back(u);
            ids.push_back(v);
        }
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        remap_table = ids;
        auto dense = [&](std::uint64_t id) {
            return static_cast<std::uint64_t>(
                std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
        };
        for (auto &[u, v, w] : raw) {
            u = dense(u);
            v = dense(v);
        }
        universe = ids.size();
    }

    if (universe > std::numeric_limits<VertexId>::max())
        throw Error("graph too large for 32-bit vertex ids");

    std::vector<std::tuple<VertexId, VertexId, double>> edges;
    edges.reserve(raw.size());
    for (const auto &[u, v, w] : raw)
        edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v), w);
    Graph g = Graph::from_edges(universe, std::move(edges));
    g.original_ids_ = std::move(remap_table);
    return g;
}

/// Writes canonical edge-list text with a "# Nodes: N Edges: M" header so
/// that reloading reproduces the graph exactly (isolated vertices included).
inline void save_edge_list(const Graph &g, const std::string &path, bool weighted) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "# Nodes: " << g.num_vertices() << " Edges: " << g.num_edges() << "\n";
    for (VertexId u = 0; u < g.num_vertices(); ++u) {
        for (EdgeId e = g.out_begin(u); e != g.out_end(u); ++e) {
            out << u << ' ' << g.edge_target(e);
            if (weighted) out << ' ' << detail::format_double(g.edge_weight(e));
            out << '\n';
        }
    }
    if (!out) throw Error("write failed: " + path);
}

}  // namespace nocmap
