// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nocmap/detail/util.hpp"
#include "nocmap/engine.hpp"
#include "nocmap/error.hpp"
#include "nocmap/nocsim.hpp"
#include "nocmap/placement.hpp"
#include "nocmap/topology.hpp"

namespace nocmap {

enum class PlacementStrategy : std::uint8_t { Exact, Heuristic, Random };

inline const char *strategy_name(PlacementStrategy s) {
    switch (s) {
        case PlacementStrategy::Exact: return "exact";
        case PlacementStrategy::Heuristic: return "heuristic";
        case PlacementStrategy::Random: return "random";
    }
    return "?";
}

/// Everything one experiment run needs, parsed from the sectioned key-value
/// text format (see configs/ for annotated samples).
struct ExperimentConfig {
    // [graph]
    bool generate = true;
    std::uint64_t vertices = 0;
    double avg_degree = 8.0;
    double skew = 1.0;
    std::uint64_t graph_seed = 1;
    std::string graph_path;
    bool weighted = false;

    // [algorithms]
    std::vector<Algorithm> algorithms;
    VertexId source_vertex = 0;
    double damping = 0.85;
    double epsilon = 1e-4;
    std::uint64_t max_iterations = 100;

    // [partition]
    std::uint32_t clusters = 1;
    std::uint64_t capacity_edges = 65536;    // 1 MB of 16-byte edge records
    std::uint64_t capacity_vertices = 131072;  // 1 MB of 8-byte words
    bool co_locate = false;  // put every shard on one logical node (all traffic local)

    // [grid]
    GridSpec grid{8, 8, NocTopology::Mesh2D};
    CostMode cost_mode = CostMode::Paper;

    // [placement]
    PlacementStrategy strategy = PlacementStrategy::Heuristic;
    std::uint64_t placement_seed = 1;
    std::uint64_t anneal_budget = 200000;
    std::vector<std::uint64_t> baseline_seeds;
    AffinityMode affinity = AffinityMode::PaperLiteral;

    // [noc]
    NoCParams noc;

    // [output]
    std::string output_dir = "out";
};

namespace detail {

inline std::string trim(const std::string &s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::uint64_t> parse_seed_list(const std::string &text) {
    std::vector<std::uint64_t> seeds;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const auto lo = std::stoull(trim(text.substr(0, dots)));
        const auto hi = std::stoull(trim(text.substr(dots + 2)));
        for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        return seeds;
    }
    std::istringstream ss(text);
    std::uint64_t s;
    while (ss >> s) seeds.push_back(s);
    return seeds;
}

}  // namespace detail

/// Parses the config file. Syntax problems (unreadable file, lines that are
/// not a section header or key = value) throw; semantic checks live in
/// validate_experiment_config so that they can all be reported together.
inline ExperimentConfig parse_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    ExperimentConfig cfg;
    cfg.noc = NoCParams{};
    std::string section, line;
    std::size_t lineno = 0;
    bool saw_baseline_seeds = false;

    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("unterminated section header at line " + std::to_string(lineno));
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value at line " + std::to_string(lineno));
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        try {
            if (section == "graph") {
                if (key == "source") cfg.generate = (val == "generate");
                else if (key == "vertices") cfg.vertices = std::stoull(val);
                else if (key == "avg_degree") cfg.avg_degree = std::stod(val);
                else if (key == "skew") cfg.skew = std::stod(val);
                else if (key == "seed") cfg.graph_seed = std::stoull(val);
                else if (key == "path") cfg.graph_path = val;
                else if (key == "weighted") cfg.weighted = (val == "true" || val == "1");
                else throw ConfigError("unknown key graph." + key);
            } else if (section == "algorithms") {
                if (key == "run") {
                    std::istringstream as(val);
                    std::string a;
                    while (as >> a) {
                        if (a == "bfs") cfg.algorithms.push_back(Algorithm::BFS);
                        else if (a == "sssp") cfg.algorithms.push_back(Algorithm::SSSP);
                        else if (a == "pagerank") cfg.algorithms.push_back(Algorithm::PageRank);
                        else throw ConfigError("unknown algorithm: " + a);
                    }
                } else if (key == "source_vertex") cfg.source_vertex =
                    static_cast<VertexId>(std::stoul(val));
                else if (key == "damping") cfg.damping = std::stod(val);
                else if (key == "epsilon") cfg.epsilon = std::stod(val);
                else if (key == "max_iterations") cfg.max_iterations = std::stoull(val);
                else throw ConfigError("unknown key algorithms." + key);
            } else if (section == "partition") {
                if (key == "clusters") cfg.clusters = static_cast<std::uint32_t>(std::stoul(val));
                else if (key == "capacity_edges") cfg.capacity_edges = std::stoull(val);
                else if (key == "capacity_vertices") cfg.capacity_vertices = std::stoull(val);
                else if (key == "co_locate") cfg.co_locate = (val == "true" || val == "1");
                else throw ConfigError("unknown key partition." + key);
            } else if (section == "grid") {
                if (key == "width") cfg.grid.width = static_cast<std::uint32_t>(std::stoul(val));
                else if (key == "height") cfg.grid.height =
                    static_cast<std::uint32_t>(std::stoul(val));
                else if (key == "topology") {
                    if (val == "mesh") cfg.grid.topology = NocTopology::Mesh2D;
                    else if (val == "fbfly") cfg.grid.topology = NocTopology::FlattenedButterfly;
                    else throw ConfigError("unknown topology: " + val);
                } else if (key == "cost_mode") {
                    if (val == "paper") cfg.cost_mode = CostMode::Paper;
                    else if (val == "corrected") cfg.cost_mode = CostMode::Corrected;
                    else throw ConfigError("unknown cost mode: " + val);
                } else throw ConfigError("unknown key grid." + key);
            } else if (section == "placement") {
                if (key == "strategy") {
                    if (val == "exact") cfg.strategy = PlacementStrategy::Exact;
                    else if (val == "heuristic") cfg.strategy = PlacementStrategy::Heuristic;
                    else if (val == "random") cfg.strategy = PlacementStrategy::Random;
                    else throw ConfigError("unknown strategy: " + val);
                } else if (key == "seed") cfg.placement_seed = std::stoull(val);
                else if (key == "anneal_budget") cfg.anneal_budget = std::stoull(val);
                else if (key == "baseline_seeds") {
                    cfg.baseline_seeds = detail::parse_seed_list(val);
                    saw_baseline_seeds = true;
                } else if (key == "affinity") {
                    if (val == "literal") cfg.affinity = AffinityMode::PaperLiteral;
                    else if (val == "traffic") cfg.affinity = AffinityMode::TrafficWeighted;
                    else throw ConfigError("unknown affinity mode: " + val);
                } else throw ConfigError("unknown key placement." + key);
            } else if (section == "noc") {
                if (key == "frequency_ghz") cfg.noc.frequency_hz = std::stod(val) * 1e9;
                else if (key == "packet_bytes") cfg.noc.packet_size =
                    static_cast<std::uint32_t>(std::stoul(val));
                else if (key == "hop_latency_ns") cfg.noc.per_hop_latency = std::stod(val) * 1e-9;
                else if (key == "ports") cfg.noc.ports = static_cast<std::uint32_t>(std::stoul(val));
                else if (key == "hop_energy_pj") cfg.noc.energy_per_hop_per_packet =
                    std::stod(val) * 1e-12;
                else if (key == "injection_energy_pj")
                    cfg.noc.energy_per_injection_per_packet = std::stod(val) * 1e-12;
                else throw ConfigError("unknown key noc." + key);
            } else if (section == "output") {
                if (key == "directory") cfg.output_dir = val;
                else throw ConfigError("unknown key output." + key);
            } else {
                throw ConfigError("unknown section [" + section + "] at line " +
                                  std::to_string(lineno));
            }
        } catch (const ConfigError &) {
            throw;
        } catch (const std::exception &) {
            throw ConfigError("bad value for " + section + "." + key + " at line " +
                              std::to_string(lineno));
        }
    }
    if (!saw_baseline_seeds)
        for (std::uint64_t s = 1; s <= 10; ++s) cfg.baseline_seeds.push_back(s);
    return cfg;
}

/// All semantic problems at once; an empty list means the config is runnable.
inline std::vector<std::string> validate_experiment_config(const ExperimentConfig &cfg) {
    std::vector<std::string> v;
    if (cfg.generate) {
        if (cfg.vertices < 1) v.push_back("graph.vertices must be at least 1");
        if (cfg.avg_degree < 0) v.push_back("graph.avg_degree must be nonnegative");
        if (cfg.skew <= 0) v.push_back("graph.skew must be positive");
    } else {
        if (cfg.graph_path.empty()) v.push_back("graph.path required when source = file");
        else if (!std::filesystem::exists(cfg.graph_path))
            v.push_back("graph.path not found: " + cfg.graph_path);
    }
    if (cfg.algorithms.empty()) v.push_back("algorithms.run lists no algorithms");
    if (cfg.generate && cfg.vertices > 0 && cfg.source_vertex >= cfg.vertices)
        v.push_back("algorithms.source_vertex outside generated graph");
    if (!(cfg.damping > 0.0 && cfg.damping < 1.0))
        v.push_back("algorithms.damping outside (0,1)");
    if (!(cfg.epsilon > 0.0)) v.push_back("algorithms.epsilon must be positive");
    if (cfg.max_iterations == 0) v.push_back("algorithms.max_iterations must be positive");
    if (cfg.clusters == 0) v.push_back("partition.clusters must be at least 1");
    if (cfg.capacity_edges == 0 || cfg.capacity_vertices == 0)
        v.push_back("partition capacities must hold at least one item");
    if (cfg.grid.width == 0 || cfg.grid.height == 0) v.push_back("grid dimensions must be positive");
    if (cfg.grid.height < 3)
        v.push_back("grid.height below 3 leaves no interior row for vertex shards");

    // Shard estimate: 2 edge-side and 2 vertex-side shard sets per class,
    // inflated by capacity overflow when the graph size is known up front.
    if (cfg.clusters > 0 && cfg.capacity_edges > 0 && cfg.capacity_vertices > 0) {
        std::uint64_t shard_estimate = 4ull * cfg.clusters;
        if (cfg.generate && cfg.vertices > 0) {
            const auto est_edges =
                static_cast<std::uint64_t>(cfg.avg_degree * static_cast<double>(cfg.vertices));
            const std::uint64_t per_class_e =
                (est_edges + cfg.clusters - 1) / cfg.clusters;
            const std::uint64_t per_class_v =
                (cfg.vertices + cfg.clusters - 1) / cfg.clusters;
            const std::uint64_t e_shards =
                std::max<std::uint64_t>(1, (per_class_e + cfg.capacity_edges - 1) /
                                               cfg.capacity_edges);
            const std::uint64_t v_shards =
                std::max<std::uint64_t>(1, (per_class_v + cfg.capacity_vertices - 1) /
                                               cfg.capacity_vertices);
            shard_estimate = 2ull * cfg.clusters * (e_shards + v_shards);
        }
        if (shard_estimate > cfg.grid.cells())
            v.push_back("grid too small: about " + std::to_string(shard_estimate) +
                        " shards for " + std::to_string(cfg.grid.cells()) + " cells");
        // Vertex shards are confined to the interior band (x > 0 and
        // neither border row); at least 2K cells must exist there.
        if (cfg.grid.width >= 1 && cfg.grid.height >= 2) {
            const std::uint64_t interior =
                static_cast<std::uint64_t>(cfg.grid.width - 1) * (cfg.grid.height - 2);
            if (interior < 2ull * cfg.clusters)
                v.push_back("interior band holds " + std::to_string(interior) +
                            " cells but vertex shards need at least " +
                            std::to_string(2ull * cfg.clusters));
        }
    }
    if (cfg.strategy == PlacementStrategy::Exact && cfg.grid.cells() > 16)
        v.push_back("exact strategy is limited to grids of at most 16 cells");
    if (cfg.baseline_seeds.empty())
        v.push_back("placement.baseline_seeds must list at least one seed");
    if (cfg.noc.packet_size == 0) v.push_back("noc.packet_bytes must be positive");
    if (!(cfg.noc.per_hop_latency > 0)) v.push_back("noc.hop_latency_ns must be positive");
    if (cfg.output_dir.empty()) v.push_back("output.directory must be set");
    return v;
}

/// Canonical echo of a parsed config: fixed section and key order, one
/// normalized value spelling. Two configs that parse the same echo the same.
inline std::string canonical_config_text(const ExperimentConfig &cfg) {
    std::ostringstream out;
    out << "[graph]\n";
    out << "source = " << (cfg.generate ? "generate" : "file") << "\n";
    if (cfg.generate) {
        out << "vertices = " << cfg.vertices << "\n";
        out << "avg_degree = " << detail::format_double(cfg.avg_degree) << "\n";
        out << "skew = " << detail::format_double(cfg.skew) << "\n";
        out << "seed = " << cfg.graph_seed << "\n";
    } else {
        out << "path = " << cfg.graph_path << "\n";
        out << "weighted = " << (cfg.weighted ? "true" : "false") << "\n";
    }
    out << "\n[algorithms]\nrun =";
    for (Algorithm a : cfg.algorithms) out << ' ' << algorithm_name(a);
    out << "\n";
    out << "source_vertex = " << cfg.source_vertex << "\n";
    out << "damping = " << detail::format_double(cfg.damping) << "\n";
    out << "epsilon = " << detail::format_double(cfg.epsilon) << "\n";
    out << "max_iterations = " << cfg.max_iterations << "\n";
    out << "\n[partition]\n";
    out << "clusters = " << cfg.clusters << "\n";
    out << "capacity_edges = " << cfg.capacity_edges << "\n";
    out << "capacity_vertices = " << cfg.capacity_vertices << "\n";
    out << "co_locate = " << (cfg.co_locate ? "true" : "false") << "\n";
    out << "\n[grid]\n";
    out << "width = " << cfg.grid.width << "\n";
    out << "height = " << cfg.grid.height << "\n";
    out << "topology = " << topology_name(cfg.grid.topology) << "\n";
    out << "cost_mode = " << cost_mode_name(cfg.cost_mode) << "\n";
    out << "\n[placement]\n";
    out << "strategy = " << strategy_name(cfg.strategy) << "\n";
    out << "seed = " << cfg.placement_seed << "\n";
    out << "anneal_budget = " << cfg.anneal_budget << "\n";
    out << "baseline_seeds =";
    for (std::uint64_t s : cfg.baseline_seeds) out << ' ' << s;
    out << "\n";
    out << "affinity = "
        << (cfg.affinity == AffinityMode::PaperLiteral ? "literal" : "traffic") << "\n";
    out << "\n[noc]\n";
    out << "frequency_ghz = " << detail::format_double(cfg.noc.frequency_hz / 1e9) << "\n";
    out << "packet_bytes = " << cfg.noc.packet_size << "\n";
    out << "hop_latency_ns = " << detail::format_double(cfg.noc.per_hop_latency * 1e9) << "\n";
    out << "ports = " << cfg.noc.ports << "\n";
    out << "hop_energy_pj = "
        << detail::format_double(cfg.noc.energy_per_hop_per_packet * 1e12) << "\n";
    out << "injection_energy_pj = "
        << detail::format_double(cfg.noc.energy_per_injection_per_packet * 1e12) << "\n";
    out << "\n[output]\n";
    out << "directory = " << cfg.output_dir << "\n";
    return out.str();
}

}  // namespace nocmap
