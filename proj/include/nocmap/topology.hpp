// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nocmap/detail/util.hpp"
#include "nocmap/error.hpp"
#include "nocmap/partition.hpp"
#include "nocmap/trace.hpp"

namespace nocmap {

struct TopoNode {
    ShardId shard = 0;
    std::uint8_t index = 1;  // 1 = edge table, 2 = vertex prop, 3 = vertex temp, 4 = edge prop
    VertexId rank = 0;
};

struct TopoEdge {
    std::uint32_t a = 0;  // node positions, a < b
    std::uint32_t b = 0;
    double weight = 0.0;
};

/// The shard-affinity graph whose nodes get placed on the grid. In literal
/// mode an edge of weight 1 links every same-rank pair of one edge-side
/// shard (index 1 or 4) with one vertex-side shard (index 2 or 3); edge
/// table never links to edge prop, nor vertex prop to vertex temp. In
/// traffic mode the weight is the measured byte count between the shards.
struct TopologyGraph {
    std::vector<TopoNode> nodes;
    std::vector<TopoEdge> edges;  // sorted by (a, b), each unordered pair once
};

enum class AffinityMode { PaperLiteral, TrafficWeighted };

inline TopologyGraph build_topology_graph(const PartitionMap &pm, AffinityMode mode,
                                          const TrafficTrace *trace = nullptr) {
    TopologyGraph tg;
    tg.nodes.reserve(pm.shards.size());
    for (const Shard &s : pm.shards)
        tg.nodes.push_back({s.id, static_cast<std::uint8_t>(s.kind), s.rank});

    if (mode == AffinityMode::PaperLiteral) {
        std::map<VertexId, std::vector<std::uint32_t>> by_rank;
        for (std::uint32_t i = 0; i < tg.nodes.size(); ++i)
            by_rank[tg.nodes[i].rank].push_back(i);
        for (const auto &[rank, members] : by_rank) {
            for (std::uint32_t i : members) {
                const auto ii = tg.nodes[i].index;
                if (ii != 1 && ii != 4) continue;
                for (std::uint32_t j : members) {
                    const auto ij = tg.nodes[j].index;
                    if (ij != 2 && ij != 3) continue;
                    tg.edges.push_back({std::min(i, j), std::max(i, j), 1.0});
                }
            }
        }
    } else {
        if (trace == nullptr)
            throw TraceMismatchError("traffic-weighted topology needs a trace");
        std::vector<std::uint32_t> pos(pm.shards.size());
        for (std::uint32_t i = 0; i < tg.nodes.size(); ++i) pos[tg.nodes[i].shard] = i;
        std::map<std::pair<std::uint32_t, std::uint32_t>, double> acc;
        for (const TraceMessage &m : trace->messages) {
            if (m.src >= pm.shards.size() || m.dst >= pm.shards.size())
                throw TraceMismatchError("trace shard id " +
                                         std::to_string(std::max(m.src, m.dst)) +
                                         " unknown to the partition map");
            const auto i = pos[m.src], j = pos[m.dst];
            if (i == j) continue;
            acc[{std::min(i, j), std::max(i, j)}] += static_cast<double>(m.bytes);
        }
        for (const auto &[key, w] : acc) tg.edges.push_back({key.first, key.second, w});
    }
    std::sort(tg.edges.begin(), tg.edges.end(), [](const TopoEdge &x, const TopoEdge &y) {
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    return tg;
}

inline void save_topology(const TopologyGraph &tg, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "# nocmap topology: node,<shard>,<index>,<rank> / edge,<shard_a>,<shard_b>,<weight>\n";
    for (const TopoNode &n : tg.nodes)
        out << "node," << n.shard << ',' << static_cast<int>(n.index) << ',' << n.rank << '\n';
    for (const TopoEdge &e : tg.edges)
        out << "edge," << tg.nodes[e.a].shard << ',' << tg.nodes[e.b].shard << ','
            << detail::format_double(e.weight) << '\n';
    if (!out) throw Error("write failed: " + path);
}

inline TopologyGraph load_topology(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open topology: " + path);
    TopologyGraph tg;
    std::map<ShardId, std::uint32_t> pos;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string kind;
        std::getline(ls, kind, ',');
        try {
            if (kind == "node") {
                std::string f1, f2, f3;
                std::getline(ls, f1, ',');
                std::getline(ls, f2, ',');
                std::getline(ls, f3, ',');
                TopoNode n;
                n.shard = static_cast<ShardId>(std::stoul(f1));
                n.index = static_cast<std::uint8_t>(std::stoul(f2));
                n.rank = static_cast<VertexId>(std::stoul(f3));
                if (n.index < 1 || n.index > 4) throw Error("index out of range");
                pos[n.shard] = static_cast<std::uint32_t>(tg.nodes.size());
                tg.nodes.push_back(n);
            } else if (kind == "edge") {
                std::string f1, f2, f3;
                std::getline(ls, f1, ',');
                std::getline(ls, f2, ',');
                std::getline(ls, f3, ',');
                const auto a = pos.at(static_cast<ShardId>(std::stoul(f1)));
                const auto b = pos.at(static_cast<ShardId>(std::stoul(f2)));
                tg.edges.push_back({std::min(a, b), std::max(a, b), std::stod(f3)});
            } else {
                throw Error("unknown row kind: " + kind);
            }
        } catch (const std::out_of_range &) {
            throw ParseError("edge names unknown node", lineno);
        } catch (const std::invalid_argument &) {
            throw ParseError("malformed topology row", lineno);
        }
    }
    return tg;
}

}  // namespace nocmap
