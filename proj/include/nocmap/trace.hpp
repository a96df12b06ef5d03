// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nocmap/error.hpp"
#include "nocmap/graph.hpp"
#include "nocmap/partition.hpp"

namespace nocmap {

enum class Phase : std::uint8_t { Process = 0, Reduce = 1, Apply = 2 };

inline const char *phase_name(Phase p) {
    switch (p) {
        case Phase::Process: return "Process";
        case Phase::Reduce: return "Reduce";
        case Phase::Apply: return "Apply";
    }
    return "?";
}

inline Phase phase_from_name(const std::string &s) {
    if (s == "Process") return Phase::Process;
    if (s == "Reduce") return Phase::Reduce;
    if (s == "Apply") return Phase::Apply;
    throw Error("unknown phase: " + s);
}

/// One shard-to-shard transfer. Word-granular traffic between the same pair
/// of shards within one (iteration, phase) is aggregated into a single
/// message, so bytes is always a positive multiple of the word size.
struct TraceMessage {
    std::uint32_t iteration = 0;
    Phase phase = Phase::Process;
    ShardId src = 0;
    ShardId dst = 0;
    std::uint64_t bytes = 0;
};

/// Ordered multiset of recorded messages. Local traffic (same logical node)
/// is never recorded. Canonical order: iteration, phase, src, dst.
struct TrafficTrace {
    std::uint32_t word_size = 8;
    std::vector<TraceMessage> messages;
    std::array<std::uint64_t, 3> phase_bytes{{0, 0, 0}};  // recorded bytes per phase

    std::uint64_t total_bytes() const {
        return phase_bytes[0] + phase_bytes[1] + phase_bytes[2];
    }
    std::uint32_t num_iterations() const {
        return messages.empty() ? 0 : messages.back().iteration + 1;
    }
};

inline void save_trace_csv(const TrafficTrace &t, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "iteration,phase,src_shard,dst_shard,bytes\n";
    for (const TraceMessage &m : t.messages)
        out << m.iteration << ',' << phase_name(m.phase) << ',' << m.src << ',' << m.dst << ','
            << m.bytes << '\n';
    if (!out) throw Error("write failed: " + path);
}

inline TrafficTrace load_trace_csv(const std::string &path, std::uint32_t word_size = 8) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open trace: " + path);
    TrafficTrace t;
    t.word_size = word_size;
    std::string line;
    if (!std::getline(in, line) || line != "iteration,phase,src_shard,dst_shard,bytes")
        throw Error("bad trace header in " + path);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        TraceMessage m;
        std::string field;
        try {
            std::getline(ls, field, ',');
            m.iteration = static_cast<std::uint32_t>(std::stoul(field));
            std::getline(ls, field, ',');
            m.phase = phase_from_name(field);
            std::getline(ls, field, ',');
            m.src = static_cast<ShardId>(std::stoul(field));
            std::getline(ls, field, ',');
            m.dst = static_cast<ShardId>(std::stoul(field));
            std::getline(ls, field, ',');
            m.bytes = std::stoull(field);
        } catch (const std::exception &) {
            throw ParseError("malformed trace row", lineno);
        }
        t.phase_bytes[static_cast<int>(m.phase)] += m.bytes;
        t.messages.push_back(m);
    }
    return t;
}

/// Per-phase recorded bytes divided by (E + V) * word_size.
inline std::array<double, 3> normalized_data_movement(const TrafficTrace &t, const Graph &g) {
    const double denom =
        static_cast<double>(g.num_edges() + g.num_vertices()) * static_cast<double>(t.word_size);
    std::array<double, 3> out{{0.0, 0.0, 0.0}};
    if (denom == 0.0) return out;
    for (int p = 0; p < 3; ++p) out[p] = static_cast<double>(t.phase_bytes[p]) / denom;
    return out;
}

}  // namespace nocmap
