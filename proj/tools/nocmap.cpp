// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "nocmap/config.hpp"
#include "nocmap/experiment.hpp"
#include "nocmap/generator.hpp"
#include "nocmap/graph.hpp"
#include "nocmap/nocsim.hpp"
#include "nocmap/partition.hpp"
#include "nocmap/placement.hpp"
#include "nocmap/topology.hpp"
#include "nocmap/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

nocmap::GridSpec parse_grid(const std::string &text, const std::string &topology) {
    nocmap::GridSpec grid;
    const auto x = text.find('x');
    if (x == std::string::npos) throw nocmap::ConfigError("grid must look like 8x8");
    grid.width = static_cast<std::uint32_t>(std::stoul(text.substr(0, x)));
    grid.height = static_cast<std::uint32_t>(std::stoul(text.substr(x + 1)));
    if (topology == "mesh") grid.topology = nocmap::NocTopology::Mesh2D;
    else if (topology == "fbfly") grid.topology = nocmap::NocTopology::FlattenedButterfly;
    else throw nocmap::ConfigError("unknown topology: " + topology);
    return grid;
}

nocmap::CostMode parse_cost_mode(const std::string &text) {
    if (text == "paper") return nocmap::CostMode::Paper;
    if (text == "corrected") return nocmap::CostMode::Corrected;
    throw nocmap::ConfigError("unknown cost mode: " + text);
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"nocmap: graph-shard placement and on-chip traffic simulation"};
    app.require_subcommand(1);

    // --- run
    auto *run_cmd = app.add_subcommand("run", "run the full experiment pipeline from a config");
    std::string run_config;
    std::string run_output_dir, run_strategy, run_topology, run_cost_mode;
    std::optional<std::uint64_t> run_seed;
    run_cmd->add_option("config", run_config, "experiment config file")->required();
    run_cmd->add_option("--output-dir", run_output_dir, "override output.directory");
    run_cmd->add_option("--strategy", run_strategy, "override placement strategy")
        ->check(CLI::IsMember({"exact", "heuristic", "random"}));
    run_cmd->add_option("--topology", run_topology, "override grid topology")
        ->check(CLI::IsMember({"mesh", "fbfly"}));
    run_cmd->add_option("--cost-mode", run_cost_mode, "override distance model")
        ->check(CLI::IsMember({"paper", "corrected"}));
    run_cmd->add_option("--seed", run_seed, "override placement seed");

    // --- validate
    auto *val_cmd = app.add_subcommand("validate", "check a config and echo it canonically");
    std::string val_config;
    val_cmd->add_option("config", val_config, "experiment config file")->required();

    // --- gen-graph
    auto *gen_cmd = app.add_subcommand("gen-graph", "generate a power-law graph edge list");
    std::uint64_t gen_vertices = 0;
    double gen_avg = 8.0, gen_skew = 1.0;
    std::uint64_t gen_seed = 1;
    std::string gen_out;
    gen_cmd->add_option("vertices", gen_vertices, "vertex count")->required();
    gen_cmd->add_option("avg_degree", gen_avg, "average out-degree target")->required();
    gen_cmd->add_option("skew", gen_skew, "power-law slope target")->required();
    gen_cmd->add_option("out", gen_out, "output edge-list path")->required();
    gen_cmd->add_option("--seed", gen_seed, "generator seed");

    // --- partition
    auto *part_cmd = app.add_subcommand("partition", "partition a graph into shards");
    std::string part_graph, part_out;
    std::uint32_t part_k = 1;
    std::uint64_t part_cap_e = 65536, part_cap_v = 131072;
    bool part_weighted = false;
    part_cmd->add_option("graph", part_graph, "edge-list file")->required();
    part_cmd->add_option("K", part_k, "cluster count")->required();
    part_cmd->add_option("out", part_out, "output directory")->required();
    part_cmd->add_option("--capacity-edges", part_cap_e, "edges per shard");
    part_cmd->add_option("--capacity-vertices", part_cap_v, "vertices per shard");
    part_cmd->add_flag("--weighted", part_weighted, "edge list has a weight column");

    // --- place
    auto *place_cmd = app.add_subcommand("place", "place topology-graph nodes on a grid");
    std::string place_topo_file, place_grid = "8x8", place_strategy = "heuristic", place_out;
    std::string place_topology = "mesh", place_cost = "paper";
    std::uint64_t place_seed = 1, place_budget = 200000;
    place_cmd->add_option("topology-file", place_topo_file, "topology graph file")->required();
    place_cmd->add_option("grid", place_grid, "grid as WxH")->required();
    place_cmd->add_option("strategy", place_strategy, "exact | heuristic | random")
        ->required()
        ->check(CLI::IsMember({"exact", "heuristic", "random"}));
    place_cmd->add_option("out", place_out, "output placement CSV")->required();
    place_cmd->add_option("--seed", place_seed, "solver seed");
    place_cmd->add_option("--budget", place_budget, "annealing iterations");
    place_cmd->add_option("--topology", place_topology, "mesh | fbfly")
        ->check(CLI::IsMember({"mesh", "fbfly"}));
    place_cmd->add_option("--cost-mode", place_cost, "paper | corrected")
        ->check(CLI::IsMember({"paper", "corrected"}));

    // --- replay
    auto *replay_cmd = app.add_subcommand("replay", "replay a trace over a placement");
    std::string replay_trace, replay_placement, replay_params, replay_out;
    std::string replay_topology = "mesh", replay_cost = "paper", replay_grid;
    replay_cmd->add_option("trace", replay_trace, "trace CSV")->required();
    replay_cmd->add_option("placement", replay_placement, "placement CSV")->required();
    replay_cmd->add_option("params", replay_params, "config file providing the [noc] section")
        ->required();
    replay_cmd->add_option("out", replay_out, "output report prefix")->required();
    replay_cmd->add_option("--grid", replay_grid, "grid as WxH (default: placement bounds)");
    replay_cmd->add_option("--topology", replay_topology, "mesh | fbfly")
        ->check(CLI::IsMember({"mesh", "fbfly"}));
    replay_cmd->add_option("--cost-mode", replay_cost, "paper | corrected")
        ->check(CLI::IsMember({"paper", "corrected"}));

    // --- compare
    auto *cmp_cmd = app.add_subcommand("compare", "compare two report summaries");
    std::string cmp_a, cmp_b;
    cmp_cmd->add_option("optimized", cmp_a, "optimized report summary CSV")->required();
    cmp_cmd->add_option("baseline", cmp_b, "baseline report summary CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        using namespace nocmap;
        if (*run_cmd) {
            ExperimentConfig cfg = parse_config(run_config);
            if (!run_output_dir.empty()) cfg.output_dir = run_output_dir;
            if (!run_strategy.empty()) {
                if (run_strategy == "exact") cfg.strategy = PlacementStrategy::Exact;
                if (run_strategy == "heuristic") cfg.strategy = PlacementStrategy::Heuristic;
                if (run_strategy == "random") cfg.strategy = PlacementStrategy::Random;
            }
            if (!run_topology.empty())
                cfg.grid.topology = run_topology == "mesh" ? NocTopology::Mesh2D
                                                           : NocTopology::FlattenedButterfly;
            if (!run_cost_mode.empty()) cfg.cost_mode = parse_cost_mode(run_cost_mode);
            if (run_seed) cfg.placement_seed = *run_seed;
            const auto violations = validate_experiment_config(cfg);
            if (!violations.empty()) {
                for (const auto &v : violations) std::cerr << "violation: " << v << "\n";
                return kExitValidation;
            }
            const ExperimentResult result = run_experiment(cfg);
            std::cout << "wrote " << result.output_dir << " ("
                      << result.table.rows.size() << " comparison rows)\n";
            for (const ComparisonRow &r : result.table.rows)
                std::cout << "  " << r.algorithm << " " << r.strategy << ": avg_hop "
                          << detail::format_double(r.avg_hop) << ", speedup "
                          << detail::format_double(r.speedup_vs_random) << ", energy ratio "
                          << detail::format_double(r.energy_ratio_vs_random) << "\n";
            return kExitOk;
        }
        if (*val_cmd) {
            const ExperimentConfig cfg = parse_config(val_config);
            const auto violations = validate_experiment_config(cfg);
            if (!violations.empty()) {
                for (const auto &v : violations) std::cerr << "violation: " << v << "\n";
                return kExitValidation;
            }
            std::cout << canonical_config_text(cfg);
            return kExitOk;
        }
        if (*gen_cmd) {
            const Graph g = generate_power_law_graph(gen_vertices, gen_avg, gen_skew, gen_seed);
            save_edge_list(g, gen_out, false);
            std::cout << "wrote " << gen_out << ": " << g.num_vertices() << " vertices, "
                      << g.num_edges() << " edges\n";
            return kExitOk;
        }
        if (*part_cmd) {
            const Graph g = load_edge_list(part_graph, part_weighted);
            const PartitionMap pm = partition(g, part_k, part_cap_e, part_cap_v);
            std::filesystem::create_directories(part_out);
            const auto dir = std::filesystem::path(part_out);
            save_shards_csv(pm, (dir / "shards.csv").string());
            save_membership_csv(pm, (dir / "membership.csv").string());
            save_topology(build_topology_graph(pm, AffinityMode::PaperLiteral),
                          (dir / "topology.txt").string());
            std::cout << "wrote " << part_out << ": " << pm.num_shards() << " shards, imbalance "
                      << detail::format_double(edge_load_imbalance(pm)) << "\n";
            return kExitOk;
        }
        if (*place_cmd) {
            const TopologyGraph tg = load_topology(place_topo_file);
            const GridSpec grid = parse_grid(place_grid, place_topology);
            const CostMode mode = parse_cost_mode(place_cost);
            Placement p;
            if (place_strategy == "exact") {
                ExactOptions eo;
                eo.cost_mode = mode;
                eo.allow_large = true;
                p = solve_placement_exact(tg, grid, eo);
            } else if (place_strategy == "heuristic") {
                HeuristicOptions ho;
                ho.budget = place_budget;
                ho.cost_mode = mode;
                p = solve_placement_heuristic(tg, grid, place_seed, ho);
            } else {
                p = random_placement(tg, grid, place_seed, mode);
            }
            save_placement_csv(tg, p, place_out);
            std::cout << "wrote " << place_out << ": objective "
                      << detail::format_double(p.objective) << "\n";
            return kExitOk;
        }
        if (*replay_cmd) {
            const TrafficTrace trace = load_trace_csv(replay_trace);
            const LoadedPlacement lp = load_placement_csv(replay_placement);
            const ExperimentConfig params = parse_config(replay_params);
            GridSpec grid;
            if (!replay_grid.empty()) {
                grid = parse_grid(replay_grid, replay_topology);
            } else {
                std::int32_t w = 0, h = 0;
                for (const Coord &c : lp.coords) {
                    w = std::max(w, c.x + 1);
                    h = std::max(h, c.y + 1);
                }
                grid.width = static_cast<std::uint32_t>(w);
                grid.height = static_cast<std::uint32_t>(h);
                grid.topology = replay_topology == "mesh" ? NocTopology::Mesh2D
                                                          : NocTopology::FlattenedButterfly;
            }
            const SimReport rep = replay(trace, ShardCoords::from(lp), grid, params.noc,
                                         parse_cost_mode(replay_cost));
            save_report_csv(rep, replay_out + ".csv", replay_out + "_iterations.csv");
            std::cout << "wrote " << replay_out << ".csv: " << rep.total_packets << " packets, "
                      << "avg hop " << detail::format_double(rep.avg_hop_count) << "\n";
            return kExitOk;
        }
        if (*cmp_cmd) {
            const ReportSummary a = load_report_summary(cmp_a);
            const ReportSummary b = load_report_summary(cmp_b);
            auto ratio = [](double base, double opt) {
                if (opt == 0.0)
                    return base == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
                return base / opt;
            };
            std::cout << "speedup," << detail::format_double(
                             ratio(b.parallel_latency_ns, a.parallel_latency_ns))
                      << "\n";
            std::cout << "energy_ratio," << detail::format_double(ratio(b.energy_pj, a.energy_pj))
                      << "\n";
            const double hop_red =
                b.avg_hop_count == 0.0 ? 0.0 : 1.0 - a.avg_hop_count / b.avg_hop_count;
            std::cout << "hop_reduction," << detail::format_double(hop_red) << "\n";
            return kExitOk;
        }
    } catch (const nocmap::ConfigError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
