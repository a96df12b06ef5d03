// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nocmap/config.hpp"
#include "nocmap/degree_stats.hpp"
#include "nocmap/engine.hpp"
#include "nocmap/generator.hpp"
#include "nocmap/graph.hpp"
#include "nocmap/nocsim.hpp"
#include "nocmap/partition.hpp"
#include "nocmap/placement.hpp"
#include "nocmap/svg.hpp"
#include "nocmap/topology.hpp"
#include "nocmap/trace.hpp"

namespace nocmap {

struct ComparisonRow {
    std::string graph;
    std::string algorithm;
    std::string topology;
    std::string strategy;
    double avg_hop = 0.0;
    double serial_ns = 0.0;
    double parallel_ns = 0.0;
    double energy_pj = 0.0;
    double speedup_vs_random = 1.0;
    double energy_ratio_vs_random = 1.0;
    double hop_reduction_vs_random = 0.0;
};

/// Per-(graph, algorithm, topology) group the table always carries the
/// aggregated random-baseline row its other rows are normalized against.
struct ComparisonTable {
    std::vector<ComparisonRow> rows;
};

inline void save_comparison_csv(const ComparisonTable &t, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "graph,algorithm,topology,strategy,avg_hop,serial_ns,parallel_ns,energy_pj,"
           "speedup_vs_random,energy_ratio_vs_random,hop_reduction_vs_random\n";
    for (const ComparisonRow &r : t.rows)
        out << r.graph << ',' << r.algorithm << ',' << r.topology << ',' << r.strategy << ','
            << detail::format_double(r.avg_hop) << ',' << detail::format_double(r.serial_ns)
            << ',' << detail::format_double(r.parallel_ns) << ','
            << detail::format_double(r.energy_pj) << ','
            << detail::format_double(r.speedup_vs_random) << ','
            << detail::format_double(r.energy_ratio_vs_random) << ','
            << detail::format_double(r.hop_reduction_vs_random) << '\n';
}

namespace detail {

/// Collects files as they are finished so a failed run can clean up after
/// itself; all writes go through a temp-then-rename step.
class ArtifactWriter {
   public:
    explicit ArtifactWriter(const std::filesystem::path &dir) : dir_(dir) {
        std::filesystem::create_directories(dir_);
    }

    std::filesystem::path path(const std::string &name) const { return dir_ / name; }

    template <typename Fn>
    void write(const std::string &name, Fn &&writer) {
        const auto final_path = dir_ / name;
        const auto tmp_path = dir_ / (name + ".tmp");
        writer(tmp_path.string());
        std::filesystem::rename(tmp_path, final_path);
        written_.push_back(final_path);
    }

    void write_text(const std::string &name, const std::string &text) {
        write(name, [&](const std::string &p) {
            std::ofstream out(p);
            if (!out) throw Error("cannot open for writing: " + p);
            out << text;
            if (!out) throw Error("write failed: " + p);
        });
    }

    void discard_all() noexcept {
        std::error_code ec;
        for (const auto &p : written_) std::filesystem::remove(p, ec);
        std::filesystem::remove(dir_, ec);  // only succeeds when now empty
    }

   private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> written_;
};

inline double geometric_mean(const std::vector<double> &xs) {
    if (xs.empty()) return 0.0;
    double log_sum = 0.0;
    for (double x : xs) log_sum += std::log(x);
    return std::exp(log_sum / static_cast<double>(xs.size()));
}

}  // namespace detail

struct ExperimentResult {
    ComparisonTable table;
    std::string graph_name;
    std::string output_dir;
    // Normalized data movement per algorithm (process, reduce, apply).
    std::map<std::string, std::array<double, 3>> movement;
};

/// Runs the whole pipeline for one config: load or generate the graph,
/// partition it, execute every requested algorithm collecting traces, place
/// the shards (optimized strategy plus every random baseline seed), replay
/// everything, and write the tables and charts. Identical configs produce
/// byte-identical artifact trees. On failure the partially written files
/// are removed and the error is rethrown tagged with the pipeline stage.
inline ExperimentResult run_experiment(const ExperimentConfig &cfg) {
    {
        const auto violations = validate_experiment_config(cfg);
        if (!violations.empty()) {
            std::string msg = "invalid config:";
            for (const auto &v : violations) msg += "\n  - " + v;
            throw ConfigError(msg);
        }
    }
    detail::ArtifactWriter out{std::filesystem::path(cfg.output_dir)};
    std::string stage = "setup";
    try {
        ExperimentResult result;
        result.output_dir = cfg.output_dir;
        {
            // The echo normalizes the output directory to the tree itself so
            // that the same experiment reproduces byte-identically wherever
            // its artifacts land.
            ExperimentConfig echoed = cfg;
            echoed.output_dir = ".";
            out.write_text("config.echo.txt", canonical_config_text(echoed));
        }

        // --- graph
        stage = "graph";
        Graph g;
        if (cfg.generate) {
            g = generate_power_law_graph(cfg.vertices, cfg.avg_degree, cfg.skew, cfg.graph_seed);
            std::ostringstream name;
            name << "plaw_v" << cfg.vertices << "_d" << detail::format_double(cfg.avg_degree)
                 << "_s" << detail::format_double(cfg.skew) << "_seed" << cfg.graph_seed;
            result.graph_name = name.str();
            out.write("graph.txt",
                      [&](const std::string &p) { save_edge_list(g, p, cfg.weighted); });
        } else {
            g = load_edge_list(cfg.graph_path, cfg.weighted);
            result.graph_name = std::filesystem::path(cfg.graph_path).stem().string();
        }
        if (!cfg.algorithms.empty() && cfg.source_vertex >= g.num_vertices() &&
            g.num_vertices() > 0)
            throw Error("source vertex " + std::to_string(cfg.source_vertex) +
                        " outside graph with " + std::to_string(g.num_vertices()) + " vertices");

        // --- partition
        stage = "partition";
        PartitionMap pm =
            partition(g, cfg.clusters, cfg.capacity_edges, cfg.capacity_vertices);
        if (cfg.co_locate) pm.co_locate_all();
        out.write("shards.csv", [&](const std::string &p) { save_shards_csv(pm, p); });
        out.write("membership.csv",
                  [&](const std::string &p) { save_membership_csv(pm, p); });

        const TopologyGraph literal_tg = build_topology_graph(pm, AffinityMode::PaperLiteral);
        out.write("topology.txt",
                  [&](const std::string &p) { save_topology(literal_tg, p); });

        // --- per-algorithm pipeline
        const std::string topo_name = topology_name(cfg.grid.topology);
        std::vector<double> speedups, energy_ratios;
        BarChart hop_chart, move_chart, speed_chart, energy_chart;
        hop_chart.title = "Average hop count: " + std::string(strategy_name(cfg.strategy)) +
                          " vs random (" + topo_name + ")";
        hop_chart.y_label = "average hops per packet";
        hop_chart.series = {strategy_name(cfg.strategy), "random (mean)"};
        move_chart.title = "Normalized data movement per phase";
        move_chart.y_label = "bytes / ((V+E) x word)";
        move_chart.series = {"Process", "Reduce", "Apply"};
        speed_chart.title = "Speedup vs random placement (" + topo_name + ")";
        speed_chart.y_label = "baseline / optimized parallel latency";
        speed_chart.series = {"speedup"};
        energy_chart.title = "Energy ratio vs random placement (" + topo_name + ")";
        energy_chart.y_label = "baseline / optimized energy";
        energy_chart.series = {"energy ratio"};

        for (Algorithm algo : cfg.algorithms) {
            const std::string an = algorithm_name(algo);
            stage = std::string("engine:") + an;
            AlgorithmSpec spec;
            std::optional<VertexId> source;
            switch (algo) {
                case Algorithm::BFS:
                    spec = bfs_spec();
                    source = cfg.source_vertex;
                    break;
                case Algorithm::SSSP:
                    spec = sssp_spec();
                    source = cfg.source_vertex;
                    break;
                case Algorithm::PageRank:
                    spec = pagerank_spec(cfg.damping, cfg.epsilon, cfg.max_iterations);
                    break;
            }
            TraceResult tr = emit_traces(g, spec, source, pm);
            out.write("trace_" + an + ".csv",
                      [&](const std::string &p) { save_trace_csv(tr.trace, p); });
            {
                std::ostringstream stats;
                stats << "iteration,frontier,process_words,reduce_words,apply_words\n";
                for (std::size_t i = 0; i < tr.stats.iterations; ++i)
                    stats << i << ',' << tr.stats.frontier_sizes[i] << ','
                          << tr.stats.phase_words[i][0] << ',' << tr.stats.phase_words[i][1]
                          << ',' << tr.stats.phase_words[i][2] << '\n';
                out.write_text("stats_" + an + ".csv", stats.str());
            }
            result.movement[an] = normalized_data_movement(tr.trace, g);

            stage = std::string("placement:") + an;
            const TopologyGraph tg =
                cfg.affinity == AffinityMode::PaperLiteral
                    ? literal_tg
                    : build_topology_graph(pm, AffinityMode::TrafficWeighted, &tr.trace);
            Placement placed;
            switch (cfg.strategy) {
                case PlacementStrategy::Exact: {
                    ExactOptions eo;
                    eo.cost_mode = cfg.cost_mode;
                    eo.allow_large = true;
                    placed = solve_placement_exact(tg, cfg.grid, eo);
                    break;
                }
                case PlacementStrategy::Heuristic: {
                    HeuristicOptions ho;
                    ho.budget = cfg.anneal_budget;
                    ho.cost_mode = cfg.cost_mode;
                    placed = solve_placement_heuristic(tg, cfg.grid, cfg.placement_seed, ho);
                    break;
                }
                case PlacementStrategy::Random:
                    placed = random_placement(tg, cfg.grid, cfg.placement_seed, cfg.cost_mode);
                    break;
            }
            const std::string strat = strategy_name(cfg.strategy);
            out.write("placement_" + an + "_" + strat + ".csv",
                      [&](const std::string &p) { save_placement_csv(tg, placed, p); });
            {
                std::ostringstream side;
                side << "key,value\n";
                side << "objective," << detail::format_double(placed.objective) << '\n';
                side << "solver," << strat << '\n';
                side << "seed," << cfg.placement_seed << '\n';
                side << "budget," << cfg.anneal_budget << '\n';
                side << "topology," << topo_name << '\n';
                side << "cost_mode," << cost_mode_name(cfg.cost_mode) << '\n';
                side << "grid," << cfg.grid.width << 'x' << cfg.grid.height << '\n';
                side << "affinity,"
                     << (cfg.affinity == AffinityMode::PaperLiteral ? "literal" : "traffic")
                     << '\n';
                out.write_text("placement_" + an + "_" + strat + ".summary.csv", side.str());
            }

            stage = std::string("replay:") + an;
            const SimReport opt_report =
                replay(tr.trace, ShardCoords::from(tg, placed), cfg.grid, cfg.noc, cfg.cost_mode);
            out.write("report_" + an + "_" + strat + ".csv",
                      [&](const std::string &p) { save_report_csv(opt_report, p); });
            out.write("report_" + an + "_" + strat + "_iterations.csv",
                      [&](const std::string &p) { save_report_iterations_csv(opt_report, p); });

            stage = std::string("baseline:") + an;
            double base_hop = 0.0, base_parallel = 0.0, base_serial = 0.0, base_energy = 0.0;
            for (std::uint64_t s : cfg.baseline_seeds) {
                const Placement rp = random_placement(tg, cfg.grid, s, cfg.cost_mode);
                const SimReport rep =
                    replay(tr.trace, ShardCoords::from(tg, rp), cfg.grid, cfg.noc, cfg.cost_mode);
                out.write("report_" + an + "_random_" + std::to_string(s) + ".csv",
                          [&](const std::string &p) { save_report_csv(rep, p); });
                base_hop += rep.avg_hop_count;
                base_parallel += rep.parallel_latency;
                base_serial += rep.serial_latency;
                base_energy += rep.energy;
            }
            const double nseeds = static_cast<double>(cfg.baseline_seeds.size());
            base_hop /= nseeds;
            base_parallel /= nseeds;
            base_serial /= nseeds;
            base_energy /= nseeds;

            ComparisonRow opt_row;
            opt_row.graph = result.graph_name;
            opt_row.algorithm = an;
            opt_row.topology = topo_name;
            opt_row.strategy = strat;
            opt_row.avg_hop = opt_report.avg_hop_count;
            opt_row.serial_ns = opt_report.serial_latency * 1e9;
            opt_row.parallel_ns = opt_report.parallel_latency * 1e9;
            opt_row.energy_pj = opt_report.energy * 1e12;
            opt_row.speedup_vs_random = opt_report.parallel_latency == 0.0
                                            ? 1.0
                                            : base_parallel / opt_report.parallel_latency;
            opt_row.energy_ratio_vs_random =
                opt_report.energy == 0.0 ? 1.0 : base_energy / opt_report.energy;
            opt_row.hop_reduction_vs_random =
                base_hop == 0.0 ? 0.0 : 1.0 - opt_report.avg_hop_count / base_hop;

            ComparisonRow base_row = opt_row;
            base_row.strategy = "random(mean of " +
                                std::to_string(cfg.baseline_seeds.size()) + ")";
            base_row.avg_hop = base_hop;
            base_row.serial_ns = base_serial * 1e9;
            base_row.parallel_ns = base_parallel * 1e9;
            base_row.energy_pj = base_energy * 1e12;
            base_row.speedup_vs_random = 1.0;
            base_row.energy_ratio_vs_random = 1.0;
            base_row.hop_reduction_vs_random = 0.0;

            result.table.rows.push_back(opt_row);
            result.table.rows.push_back(base_row);
            speedups.push_back(opt_row.speedup_vs_random);
            energy_ratios.push_back(opt_row.energy_ratio_vs_random);

            hop_chart.group_labels.push_back(an);
            hop_chart.values.push_back({opt_row.avg_hop, base_hop});
            const auto &mv = result.movement[an];
            move_chart.group_labels.push_back(an);
            move_chart.values.push_back({mv[0], mv[1], mv[2]});
            speed_chart.group_labels.push_back(an);
            speed_chart.values.push_back({opt_row.speedup_vs_random});
            energy_chart.group_labels.push_back(an);
            energy_chart.values.push_back({opt_row.energy_ratio_vs_random});
        }

        stage = "report";
        out.write("comparison.csv",
                  [&](const std::string &p) { save_comparison_csv(result.table, p); });
        out.write("hops.svg", [&](const std::string &p) { save_bar_chart_svg(hop_chart, p); });
        out.write("movement.svg",
                  [&](const std::string &p) { save_bar_chart_svg(move_chart, p); });
        out.write("speedup.svg",
                  [&](const std::string &p) { save_bar_chart_svg(speed_chart, p); });
        out.write("energy.svg",
                  [&](const std::string &p) { save_bar_chart_svg(energy_chart, p); });
        {
            std::ostringstream sum;
            sum << "graph: " << result.graph_name << "\n";
            sum << "strategy: " << strategy_name(cfg.strategy) << " on " << topo_name << " ("
                << cfg.grid.width << "x" << cfg.grid.height << ", "
                << cost_mode_name(cfg.cost_mode) << " cost)\n";
            sum << "baseline: mean of " << cfg.baseline_seeds.size() << " random placements\n";
            sum << "geomean_speedup: " << detail::format_double(detail::geometric_mean(speedups))
                << "\n";
            sum << "geomean_energy_ratio: "
                << detail::format_double(detail::geometric_mean(energy_ratios)) << "\n";
            out.write_text("summary.txt", sum.str());
        }
        return result;
    } catch (const std::exception &e) {
        out.discard_all();
        throw PipelineError(stage, e.what());
    }
}

}  // namespace nocmap
