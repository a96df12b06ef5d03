// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nocmap/detail/util.hpp"
#include "nocmap/error.hpp"
#include "nocmap/placement.hpp"
#include "nocmap/trace.hpp"

namespace nocmap {

struct NoCParams {
    double frequency_hz = 1e9;
    std::uint32_t packet_size = 8;   // bytes
    double per_hop_latency = 1e-9;   // seconds; switch + channel combined
    std::uint32_t ports = 4;         // recorded for reporting, not a contention limit
    double energy_per_hop_per_packet = 0.1e-12;        // joules
    double energy_per_injection_per_packet = 0.05e-12; // joules

    void validate() const {
        if (packet_size == 0) throw Error("packet size must be positive");
        if (!(per_hop_latency > 0.0)) throw Error("per-hop latency must be positive");
    }
};

inline std::uint64_t packetize(std::uint64_t bytes, std::uint32_t packet_size) {
    if (packet_size == 0) throw Error("packet size must be positive");
    return (bytes + packet_size - 1) / packet_size;
}

/// Shard-id-indexed coordinates; the bridge between a Placement (aligned
/// with topology nodes) and a trace (which speaks shard ids).
struct ShardCoords {
    std::vector<Coord> by_shard;

    static ShardCoords from(const TopologyGraph &tg, const Placement &p) {
        ShardCoords sc;
        ShardId max_shard = 0;
        for (const TopoNode &n : tg.nodes) max_shard = std::max(max_shard, n.shard);
        sc.by_shard.assign(max_shard + 1, Coord{});
        for (std::size_t i = 0; i < tg.nodes.size(); ++i)
            sc.by_shard[tg.nodes[i].shard] = p.coords[i];
        return sc;
    }
    static ShardCoords from(const LoadedPlacement &lp) {
        ShardCoords sc;
        ShardId max_shard = 0;
        for (const TopoNode &n : lp.nodes) max_shard = std::max(max_shard, n.shard);
        sc.by_shard.assign(max_shard + 1, Coord{});
        for (std::size_t i = 0; i < lp.nodes.size(); ++i)
            sc.by_shard[lp.nodes[i].shard] = lp.coords[i];
        return sc;
    }

    Coord coord_of(ShardId s) const {
        if (s >= by_shard.size() || !by_shard[s].placed())
            throw UnplacedShardError("shard " + std::to_string(s) + " has no placement");
        return by_shard[s];
    }
};

/// Number of links a packet traverses from a to b; identical to the
/// placement-module cost for the same topology and mode.
inline std::uint32_t route_hops(const GridSpec &grid, CostMode mode, Coord a, Coord b) {
    return hop_cost(grid.topology, mode, a, b);
}

namespace detail {

/// Enumerates the directed link segments of the routing path. Mesh (and the
/// as-printed flattened-butterfly reading) uses dimension-ordered X-then-Y
/// unit steps; the corrected flattened butterfly takes one express link per
/// differing dimension.
template <typename Fn>
void walk_route(const GridSpec &grid, CostMode mode, Coord a, Coord b, Fn &&per_link) {
    auto cell = [&](Coord c) {
        return static_cast<std::uint64_t>(c.x) * grid.height + static_cast<std::uint64_t>(c.y);
    };
    if (grid.topology == NocTopology::FlattenedButterfly && mode == CostMode::Corrected) {
        Coord cur = a;
        if (cur.x != b.x) {
            Coord next{b.x, cur.y};
            per_link(cell(cur), cell(next));
            cur = next;
        }
        if (cur.y != b.y) per_link(cell(cur), cell(b));
        return;
    }
    Coord cur = a;
    while (cur.x != b.x) {
        Coord next{cur.x + (b.x > cur.x ? 1 : -1), cur.y};
        per_link(cell(cur), cell(next));
        cur = next;
    }
    while (cur.y != b.y) {
        Coord next{cur.x, cur.y + (b.y > cur.y ? 1 : -1)};
        per_link(cell(cur), cell(next));
        cur = next;
    }
}

}  // namespace detail

/// Accumulated replay results. Totals are always derived from the
/// per-(iteration, phase) rows in canonical order, which is what makes
/// segment-wise replay plus merge bit-identical to a sequential replay.
struct SimReport {
    struct Row {
        std::uint32_t iteration = 0;
        Phase phase = Phase::Process;
        std::uint64_t packets = 0;
        std::uint64_t hop_packets = 0;       // sum of packets x hops
        std::uint64_t max_link_packets = 0;  // bottleneck link load
        std::uint64_t link_packet_sum = 0;   // total load over links; equals hop_packets
        double serial_latency = 0.0;         // seconds
        double parallel_latency = 0.0;       // seconds
        double energy = 0.0;                 // joules
    };

    NoCParams params;
    std::vector<Row> rows;  // sorted by (iteration, phase)

    std::uint64_t total_packets = 0;
    std::uint64_t total_hop_packets = 0;
    double avg_hop_count = 0.0;
    double serial_latency = 0.0;
    double parallel_latency = 0.0;
    double energy = 0.0;
    std::array<std::uint64_t, 3> phase_packets{{0, 0, 0}};

    void finalize() {
        total_packets = 0;
        total_hop_packets = 0;
        serial_latency = parallel_latency = energy = 0.0;
        phase_packets = {{0, 0, 0}};
        for (const Row &r : rows) {
            total_packets += r.packets;
            total_hop_packets += r.hop_packets;
            serial_latency += r.serial_latency;
            parallel_latency += r.parallel_latency;
            energy += r.energy;
            phase_packets[static_cast<int>(r.phase)] += r.packets;
        }
        avg_hop_count = total_packets
                            ? static_cast<double>(total_hop_packets) /
                                  static_cast<double>(total_packets)
                            : 0.0;
    }
};

/// Replays a trace over placed shards: every message is packetized, routed,
/// and charged packets x hops x per-hop latency plus per-hop and injection
/// energy. Per (iteration, phase), link loads along the routing paths give
/// the bottleneck-link parallel latency; phases within an iteration are
/// serial, so rows sum.
inline SimReport replay(const TrafficTrace &trace, const ShardCoords &coords,
                        const GridSpec &grid, const NoCParams &params,
                        CostMode mode = CostMode::Paper) {
    params.validate();
    SimReport rep;
    rep.params = params;

    std::map<std::pair<std::uint32_t, std::uint8_t>, std::size_t> row_index;
    std::map<std::pair<std::uint32_t, std::uint8_t>, std::map<std::uint64_t, std::uint64_t>>
        link_loads;

    for (const TraceMessage &m : trace.messages) {
        const Coord a = coords.coord_of(m.src);
        const Coord b = coords.coord_of(m.dst);
        const std::uint64_t packets = packetize(m.bytes, params.packet_size);
        const std::uint32_t hops = route_hops(grid, mode, a, b);
        const auto key = std::make_pair(m.iteration, static_cast<std::uint8_t>(m.phase));
        auto [it, fresh] = row_index.emplace(key, rep.rows.size());
        if (fresh) {
            SimReport::Row r;
            r.iteration = m.iteration;
            r.phase = m.phase;
            rep.rows.push_back(r);
        }
        SimReport::Row &row = rep.rows[it->second];
        row.packets += packets;
        row.hop_packets += packets * hops;
        auto &loads = link_loads[key];
        detail::walk_route(grid, mode, a, b,
                           [&](std::uint64_t from, std::uint64_t to) {
                               loads[from * grid.cells() + to] += packets;
                           });
    }

    for (auto &row : rep.rows) {
        const auto key = std::make_pair(row.iteration, static_cast<std::uint8_t>(row.phase));
        std::uint64_t max_load = 0, load_sum = 0;
        for (const auto &[link, load] : link_loads[key]) {
            max_load = std::max(max_load, load);
            load_sum += load;
        }
        row.max_link_packets = max_load;
        row.link_packet_sum = load_sum;
        row.serial_latency = static_cast<double>(row.hop_packets) * params.per_hop_latency;
        row.parallel_latency = static_cast<double>(max_load) * params.per_hop_latency;
        row.energy = static_cast<double>(row.hop_packets) * params.energy_per_hop_per_packet +
                     static_cast<double>(row.packets) * params.energy_per_injection_per_packet;
    }
    std::sort(rep.rows.begin(), rep.rows.end(), [](const auto &x, const auto &y) {
        if (x.iteration != y.iteration) return x.iteration < y.iteration;
        return static_cast<int>(x.phase) < static_cast<int>(y.phase);
    });
    rep.finalize();
    return rep;
}

/// Merges reports from disjoint (iteration, phase) segments. Totals are
/// rebuilt from the merged rows, so merging segment replays reproduces the
/// sequential replay bit for bit.
inline SimReport merge_reports(const SimReport &a, const SimReport &b) {
    SimReport out;
    out.params = a.params;
    out.rows = a.rows;
    out.rows.insert(out.rows.end(), b.rows.begin(), b.rows.end());
    std::sort(out.rows.begin(), out.rows.end(), [](const auto &x, const auto &y) {
        if (x.iteration != y.iteration) return x.iteration < y.iteration;
        return static_cast<int>(x.phase) < static_cast<int>(y.phase);
    });
    for (std::size_t i = 1; i < out.rows.size(); ++i)
        if (out.rows[i].iteration == out.rows[i - 1].iteration &&
            out.rows[i].phase == out.rows[i - 1].phase)
            throw Error("cannot merge overlapping report segments");
    out.finalize();
    return out;
}

struct Comparison {
    double speedup = 1.0;
    double energy_ratio = 1.0;
    double hop_reduction = 0.0;
};

/// Baseline-over-optimized ratios. A zero optimized total against a nonzero
/// baseline is reported as infinity rather than an error.
inline Comparison compare(const SimReport &optimized, const SimReport &baseline) {
    auto ratio = [](double base, double opt) {
        if (opt == 0.0) return base == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
        return base / opt;
    };
    Comparison c;
    c.speedup = ratio(baseline.parallel_latency, optimized.parallel_latency);
    c.energy_ratio = ratio(baseline.energy, optimized.energy);
    c.hop_reduction =
        1.0 - (baseline.avg_hop_count == 0.0
                   ? (optimized.avg_hop_count == 0.0 ? 1.0
                                                     : std::numeric_limits<double>::infinity())
                   : optimized.avg_hop_count / baseline.avg_hop_count);
    return c;
}

inline void save_report_iterations_csv(const SimReport &r, const std::string &path) {
    std::ofstream it(path);
    if (!it) throw Error("cannot open for writing: " + path);
    it << "iteration,phase,packets,hop_packets,max_link_packets,serial_ns,parallel_ns,energy_pj\n";
    for (const auto &row : r.rows)
        it << row.iteration << ',' << phase_name(row.phase) << ',' << row.packets << ','
           << row.hop_packets << ',' << row.max_link_packets << ','
           << detail::format_double(row.serial_latency * 1e9) << ','
           << detail::format_double(row.parallel_latency * 1e9) << ','
           << detail::format_double(row.energy * 1e12) << '\n';
}

/// Writes the metric summary and, when iterations_path is nonempty, the
/// per-(iteration, phase) breakdown.
inline void save_report_csv(const SimReport &r, const std::string &summary_path,
                            const std::string &iterations_path = {}) {
    std::ofstream sum(summary_path);
    if (!sum) throw Error("cannot open for writing: " + summary_path);
    sum << "metric,value\n";
    sum << "total_packets," << r.total_packets << '\n';
    sum << "total_hop_packets," << r.total_hop_packets << '\n';
    sum << "avg_hop_count," << detail::format_double(r.avg_hop_count) << '\n';
    sum << "serial_latency_ns," << detail::format_double(r.serial_latency * 1e9) << '\n';
    sum << "parallel_latency_ns," << detail::format_double(r.parallel_latency * 1e9) << '\n';
    sum << "energy_pj," << detail::format_double(r.energy * 1e12) << '\n';
    for (int p = 0; p < 3; ++p)
        sum << "packets_" << phase_name(static_cast<Phase>(p)) << ',' << r.phase_packets[p]
            << '\n';

    if (iterations_path.empty()) return;
    save_report_iterations_csv(r, iterations_path);
}

/// The summary fields needed to compare two stored reports.
struct ReportSummary {
    std::uint64_t total_packets = 0;
    std::uint64_t total_hop_packets = 0;
    double avg_hop_count = 0.0;
    double serial_latency_ns = 0.0;
    double parallel_latency_ns = 0.0;
    double energy_pj = 0.0;
};

inline ReportSummary load_report_summary(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open report: " + path);
    ReportSummary s;
    std::string line;
    if (!std::getline(in, line) || line != "metric,value")
        throw Error("bad report header in " + path);
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        const std::string key = line.substr(0, comma);
        const std::string val = line.substr(comma + 1);
        if (key == "total_packets") s.total_packets = std::stoull(val);
        else if (key == "total_hop_packets") s.total_hop_packets = std::stoull(val);
        else if (key == "avg_hop_count") s.avg_hop_count = std::stod(val);
        else if (key == "serial_latency_ns") s.serial_latency_ns = std::stod(val);
        else if (key == "parallel_latency_ns") s.parallel_latency_ns = std::stod(val);
        else if (key == "energy_pj") s.energy_pj = std::stod(val);
    }
    return s;
}

}  // namespace nocmap
