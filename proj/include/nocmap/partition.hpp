// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "nocmap/error.hpp"
#include "nocmap/graph.hpp"

namespace nocmap {

/// The four in-memory data structures distributed across graph engines.
enum class ShardKind : std::uint8_t {
    EdgeTable = 1,
    VertexProp = 2,
    VertexTemp = 3,
    EdgeProp = 4,
};

inline const char *shard_kind_name(ShardKind k) {
    switch (k) {
        case ShardKind::EdgeTable: return "edge_table";
        case ShardKind::VertexProp: return "vertex_prop";
        case ShardKind::VertexTemp: return "vertex_temp";
        case ShardKind::EdgeProp: return "edge_prop";
    }
    return "?";
}

using ShardId = std::uint32_t;

struct Shard {
    ShardId id = 0;
    ShardKind kind = ShardKind::EdgeTable;
    VertexId rank = 0;    // minimum vertex id of the cyclic class (shared by the co-rank group)
    std::uint32_t cls = 0;
    std::uint64_t capacity = 0;
    std::vector<std::uint32_t> contents;  // edge ids (kinds 1,4) or vertex ids (kinds 2,3)

    std::uint64_t size() const { return contents.size(); }
};

/// Whether the cyclic class of a vertex comes from its position in the
/// degree-sorted order (the load-balancing scheme) or from its raw id.
enum class ClassScheme { SortedPosition, RawId };

/// Assignment of edges and vertices to capacity-bounded shards, four kinds
/// per cyclic class. Mirror pairs (edge table <-> edge prop, vertex prop <->
/// vertex temp) hold identical contents and share the class rank. Each shard
/// is one logical NoC node by default; node_of can merge shards onto one
/// node for degenerate mappings (all co-located traffic is then local).
struct PartitionMap {
    std::uint32_t num_classes = 0;
    std::vector<Shard> shards;
    std::vector<std::uint32_t> vertex_class;     // vertex -> class
    std::vector<ShardId> vertex_shard_prop;      // vertex -> kind-2 shard
    std::vector<ShardId> vertex_shard_temp;      // vertex -> kind-3 shard
    std::vector<ShardId> edge_shard_table;       // edge -> kind-1 shard
    std::vector<ShardId> mirror;                 // shard -> mirror shard
    std::vector<ShardId> lead_edge_table;        // class -> first kind-1 shard
    std::vector<std::uint32_t> node_of;          // shard -> logical node
    std::vector<VertexId> sorted_order;          // permutation used for classes

    ShardId edge_shard_prop(EdgeId e) const { return mirror[edge_shard_table[e]]; }
    ShardId lead_edge_prop(std::uint32_t cls) const { return mirror[lead_edge_table[cls]]; }

    std::uint64_t num_shards() const { return shards.size(); }

    bool covers(const Graph &g) const {
        return vertex_shard_prop.size() == g.num_vertices() &&
               edge_shard_table.size() == g.num_edges();
    }

    /// Collapses every shard onto a single logical node; useful as the
    /// degenerate all-local mapping.
    void co_locate_all() { std::fill(node_of.begin(), node_of.end(), 0u); }
};

/// Descending out-degree, ties by ascending vertex id.
inline std::vector<VertexId> sort_vertices_by_degree(const Graph &g) {
    std::vector<VertexId> order(g.num_vertices());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](VertexId a, VertexId b) {
        if (g.out_degree(a) != g.out_degree(b)) return g.out_degree(a) > g.out_degree(b);
        return a < b;
    });
    return order;
}

/// Source-cut partitioning. Vertices are walked in degree-sorted order and
/// dealt cyclically over K classes; a class's vertex shards hold exactly its
/// vertices (split by capacity, in deal order) and its edge shards hold all
/// out-edges of those vertices. Every class gets at least one shard of each
/// kind, even when empty, so every co-rank group is complete.
inline PartitionMap partition(const Graph &g, std::uint32_t num_classes,
                              std::uint64_t capacity_edges, std::uint64_t capacity_vertices,
                              ClassScheme scheme = ClassScheme::SortedPosition) {
    if (num_classes == 0) throw PartitionError("cluster count must be at least 1");
    if (capacity_edges < 1 || capacity_vertices < 1)
        throw PartitionError("shard capacity below a single item");

    PartitionMap pm;
    pm.num_classes = num_classes;
    pm.sorted_order = (scheme == ClassScheme::SortedPosition)
                          ? sort_vertices_by_degree(g)
                          : [&] {
                                std::vector<VertexId> id(g.num_vertices());
                                std::iota(id.begin(), id.end(), 0);
                                return id;
                            }();
    pm.vertex_class.resize(g.num_vertices());
    pm.vertex_shard_prop.resize(g.num_vertices());
    pm.vertex_shard_temp.resize(g.num_vertices());
    pm.edge_shard_table.resize(g.num_edges());
    pm.lead_edge_table.assign(num_classes, 0);

    // Vertices of each class, in deal (position) order.
    std::vector<std::vector<VertexId>> class_vertices(num_classes);
    for (std::size_t p = 0; p < pm.sorted_order.size(); ++p) {
        const VertexId v = pm.sorted_order[p];
        const auto c = static_cast<std::uint32_t>(p % num_classes);
        class_vertices[c].push_back(v);
        pm.vertex_class[v] = c;
    }

    auto chunk = [](std::uint64_t total, std::uint64_t cap) {
        return total == 0 ? std::uint64_t{1} : (total + cap - 1) / cap;
    };

    for (std::uint32_t c = 0; c < num_classes; ++c) {
        const auto &verts = class_vertices[c];
        if (verts.empty()) continue;  // more classes than vertices

        const VertexId rank = *std::min_element(verts.begin(), verts.end());

        std::vector<std::uint32_t> class_edges;
        for (VertexId v : verts)
            for (EdgeId e = g.out_begin(v); e != g.out_end(v); ++e) class_edges.push_back(e);

        auto emit = [&](ShardKind kind, const std::vector<std::uint32_t> &items,
                        std::uint64_t cap) {
            std::vector<ShardId> ids;
            const std::uint64_t pieces = chunk(items.size(), cap);
            for (std::uint64_t i = 0; i < pieces; ++i) {
                Shard s;
                s.id = static_cast<ShardId>(pm.shards.size());
                s.kind = kind;
                s.rank = rank;
                s.cls = c;
                s.capacity = cap;
                const std::uint64_t lo = i * cap;
                const std::uint64_t hi = std::min<std::uint64_t>(items.size(), lo + cap);
                if (lo < hi) s.contents.assign(items.begin() + lo, items.begin() + hi);
                ids.push_back(s.id);
                pm.shards.push_back(std::move(s));
            }
            return ids;
        };

        const auto k1 = emit(ShardKind::EdgeTable, class_edges, capacity_edges);
        const auto k4 = emit(ShardKind::EdgeProp, class_edges, capacity_edges);
        const auto k2 = emit(ShardKind::VertexProp, verts, capacity_vertices);
        const auto k3 = emit(ShardKind::VertexTemp, verts, capacity_vertices);

        pm.mirror.resize(pm.shards.size());
        for (std::size_t i = 0; i < k1.size(); ++i) {
            pm.mirror[k1[i]] = k4[i];
            pm.mirror[k4[i]] = k1[i];
        }
        for (std::size_t i = 0; i < k2.size(); ++i) {
            pm.mirror[k2[i]] = k3[i];
            pm.mirror[k3[i]] = k2[i];
        }
        pm.lead_edge_table[c] = k1.front();

        for (ShardId sid : k1)
            for (std::uint32_t e : pm.shards[sid].contents) pm.edge_shard_table[e] = sid;
        for (ShardId sid : k2)
            for (std::uint32_t v : pm.shards[sid].contents) pm.vertex_shard_prop[v] = sid;
        for (ShardId sid : k3)
            for (std::uint32_t v : pm.shards[sid].contents) pm.vertex_shard_temp[v] = sid;
    }

    pm.node_of.resize(pm.shards.size());
    std::iota(pm.node_of.begin(), pm.node_of.end(), 0u);
    return pm;
}

struct ClassLoad {
    std::uint64_t edges = 0;
    std::uint64_t vertices = 0;
};

inline std::vector<ClassLoad> class_load_profile(const PartitionMap &pm) {
    std::vector<ClassLoad> loads(pm.num_classes);
    for (const Shard &s : pm.shards) {
        if (s.kind == ShardKind::EdgeTable) loads[s.cls].edges += s.size();
        if (s.kind == ShardKind::VertexProp) loads[s.cls].vertices += s.size();
    }
    return loads;
}

/// Max-over-mean of per-class edge counts; 1.0 is perfectly balanced.
inline double edge_load_imbalance(const PartitionMap &pm) {
    const auto loads = class_load_profile(pm);
    std::uint64_t total = 0, max_load = 0;
    for (const auto &l : loads) {
        total += l.edges;
        max_load = std::max(max_load, l.edges);
    }
    if (total == 0) return 1.0;
    const double mean = static_cast<double>(total) / static_cast<double>(loads.size());
    return static_cast<double>(max_load) / mean;
}

inline void save_shards_csv(const PartitionMap &pm, const std::string &path) {
    std::ofstream shards(path);
    if (!shards) throw Error("cannot open for writing: " + path);
    shards << "shard_id,kind,rank,class,size,capacity\n";
    for (const Shard &s : pm.shards)
        shards << s.id << ',' << static_cast<int>(s.kind) << ',' << s.rank << ',' << s.cls << ','
               << s.size() << ',' << s.capacity << '\n';
}

inline void save_membership_csv(const PartitionMap &pm, const std::string &path) {
    std::ofstream members(path);
    if (!members) throw Error("cannot open for writing: " + path);
    members << "item_id,kind,shard_id\n";
    for (const Shard &s : pm.shards)
        for (std::uint32_t item : s.contents)
            members << item << ',' << static_cast<int>(s.kind) << ',' << s.id << '\n';
}

inline void save_partition_csv(const PartitionMap &pm, const std::string &shards_path,
                               const std::string &membership_path) {
    save_shards_csv(pm, shards_path);
    save_membership_csv(pm, membership_path);
}

}  // namespace nocmap
