// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "nocmap/detail/util.hpp"
#include "nocmap/error.hpp"
#include "nocmap/graph.hpp"
#include "nocmap/partition.hpp"
#include "nocmap/trace.hpp"

namespace nocmap {

enum class Algorithm : std::uint8_t { BFS, SSSP, PageRank };

inline const char *algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::BFS: return "bfs";
        case Algorithm::SSSP: return "sssp";
        case Algorithm::PageRank: return "pagerank";
    }
    return "?";
}

/// A vertex-centric program: how an active vertex pushes values along its
/// out-edges (process), how incoming values fold into the per-vertex
/// accumulator (reduce; must be commutative and associative with
/// reduce(identity, x) = x), and how the accumulator becomes the next
/// property (apply). The activation rule decides frontier membership.
struct AlgorithmSpec {
    Algorithm name = Algorithm::BFS;
    bool needs_source = false;
    bool requires_nonnegative_weights = false;
    double source_value = 0.0;
    std::function<double(std::uint64_t num_vertices)> initial_prop;
    double reduce_identity = 0.0;
    std::function<double(double src_prop, double weight, std::uint32_t src_out_degree)> process;
    std::function<double(double acc, double eprop)> reduce;
    std::function<double(double acc, double old_prop, std::uint64_t num_vertices)> apply;
    std::function<bool(double new_prop, double old_prop)> activate;
    bool all_active = false;             // every vertex active every iteration
    bool apply_all = false;              // apply runs over all vertices
    bool redistribute_dangling = false;  // fold zero-out-degree mass back in uniformly
    enum class Convergence : std::uint8_t { EmptyFrontier, L1Delta } convergence =
        Convergence::EmptyFrontier;
    double epsilon = 0.0;
    std::uint64_t max_iterations = 0;  // 0 = derive a safe bound from the graph
    double damping = 0.0;
};

/// Depth labels: property +inf except 0 at the source, min-reduce over
/// depth+1 contributions, activation on strict decrease.
inline AlgorithmSpec bfs_spec() {
    AlgorithmSpec s;
    s.name = Algorithm::BFS;
    s.needs_source = true;
    s.source_value = 0.0;
    s.initial_prop = [](std::uint64_t) { return std::numeric_limits<double>::infinity(); };
    s.reduce_identity = std::numeric_limits<double>::infinity();
    s.process = [](double prop, double, std::uint32_t) { return prop + 1.0; };
    s.reduce = [](double acc, double e) { return std::min(acc, e); };
    s.apply = [](double acc, double old, std::uint64_t) { return std::min(old, acc); };
    s.activate = [](double nw, double old) { return nw < old; };
    s.convergence = AlgorithmSpec::Convergence::EmptyFrontier;
    return s;
}

/// Shortest distances over nonnegative weights; same shape as BFS with the
/// edge weight in place of the unit hop.
inline AlgorithmSpec sssp_spec() {
    AlgorithmSpec s = bfs_spec();
    s.name = Algorithm::SSSP;
    s.requires_nonnegative_weights = true;
    s.process = [](double prop, double weight, std::uint32_t) { return prop + weight; };
    return s;
}

/// Standard damped PageRank by power iteration: each vertex spreads
/// rank/out-degree, sums arrive in the accumulator, dangling mass is
/// redistributed uniformly (rank keeps summing to 1), and the run converges
/// when the L1 step delta drops below epsilon.
inline AlgorithmSpec pagerank_spec(double damping, double epsilon,
                                   std::uint64_t max_iterations) {
    if (!(damping > 0.0 && damping < 1.0)) throw Error("damping outside (0,1)");
    if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
    AlgorithmSpec s;
    s.name = Algorithm::PageRank;
    s.initial_prop = [](std::uint64_t n) { return 1.0 / static_cast<double>(n); };
    s.reduce_identity = 0.0;
    s.process = [](double prop, double, std::uint32_t deg) {
        return prop / static_cast<double>(deg);
    };
    s.reduce = [](double acc, double e) { return acc + e; };
    s.apply = [damping](double acc, double, std::uint64_t n) {
        return (1.0 - damping) / static_cast<double>(n) + damping * acc;
    };
    s.activate = [](double, double) { return true; };
    s.all_active = true;
    s.apply_all = true;
    s.redistribute_dangling = true;
    s.convergence = AlgorithmSpec::Convergence::L1Delta;
    s.epsilon = epsilon;
    s.max_iterations = max_iterations;
    s.damping = damping;
    return s;
}

/// Execution-shape knobs. The literal reduce mode charges reduce traffic for
/// every in-edge of every vertex each iteration (worst-case accounting);
/// values still fold only from sources that were active, so results do not
/// change. The shuffle seed permutes in-edge fold order per vertex, which a
/// commutative reduce must not notice.
struct ExecOptions {
    bool literal_reduce_all = false;
    std::optional<std::uint64_t> reduce_shuffle_seed;
};

struct IterationStats {
    std::uint64_t iterations = 0;
    bool converged = true;  // false = stopped at max_iterations (reported, not thrown)
    std::uint64_t final_frontier_size = 0;
    std::uint32_t word_size = 8;
    std::vector<std::uint64_t> frontier_sizes;  // input frontier per executed iteration
    // Model words per iteration and phase, before local-traffic dropping.
    std::vector<std::array<std::uint64_t, 3>> phase_words;
    // Conservation counters per iteration.
    std::vector<std::uint64_t> process_pair_count;
    std::vector<std::uint64_t> process_edge_count;
    std::vector<std::uint64_t> reduce_edge_count;
    std::vector<std::uint64_t> apply_update_count;

    std::array<std::uint64_t, 3> total_phase_words() const {
        std::array<std::uint64_t, 3> t{{0, 0, 0}};
        for (const auto &w : phase_words)
            for (int p = 0; p < 3; ++p) t[p] += w[p];
        return t;
    }
    std::array<std::uint64_t, 3> total_phase_bytes() const {
        auto t = total_phase_words();
        for (auto &x : t) x *= word_size;
        return t;
    }
};

struct RunResult {
    std::vector<double> properties;
    IterationStats stats;
};

struct TraceResult {
    TrafficTrace trace;
    IterationStats stats;
};

namespace detail {

struct EngineOutput {
    std::vector<double> properties;
    IterationStats stats;
    TrafficTrace trace;
};

/// One engine drives both run_algorithm and emit_traces so that the stats
/// they report cannot drift apart. Phases run in order each iteration:
/// process over the frontier's out-edges, reduce over the in-edges those
/// writes touched (charged to the destination class's lead edge shards),
/// apply over accumulated vertices. All loops ascend over ids, so results
/// and traces are deterministic.
inline EngineOutput execute(const Graph &g, const AlgorithmSpec &spec,
                            std::optional<VertexId> source, const PartitionMap *pm,
                            bool record_trace, const ExecOptions &opt) {
    const std::uint64_t n = g.num_vertices();
    const std::uint32_t word = 8;

    if (spec.needs_source) {
        if (!source) throw Error(std::string(algorithm_name(spec.name)) + " needs a source vertex");
        if (*source >= n) throw Error("source vertex out of range");
    }
    if (spec.requires_nonnegative_weights && g.has_negative_weight())
        throw NegativeWeightError("negative edge weight rejected at run start");
    if (record_trace) {
        if (pm == nullptr) throw Error("trace recording needs a partition map");
        if (!pm->covers(g)) throw UnmappedItemError("partition map does not cover this graph");
    }

    EngineOutput out;
    out.trace.word_size = word;
    out.stats.word_size = word;

    std::vector<double> &props = out.properties;
    props.assign(n, spec.initial_prop ? spec.initial_prop(n) : 0.0);
    if (spec.needs_source && n > 0) props[*source] = spec.source_value;

    std::vector<double> temp(n, spec.reduce_identity);
    std::vector<double> eprop(g.num_edges(), 0.0);
    std::vector<std::uint32_t> eprop_iter(g.num_edges(), UINT32_MAX);

    std::vector<VertexId> frontier;
    if (spec.all_active) {
        frontier.resize(n);
        std::iota(frontier.begin(), frontier.end(), 0);
    } else if (spec.needs_source && n > 0) {
        frontier.push_back(*source);
    }

    const std::uint64_t max_iters =
        spec.max_iterations > 0 ? spec.max_iterations : n + 1;

    // Per-iteration message accumulator, keyed in canonical order.
    std::map<std::tuple<std::uint8_t, ShardId, ShardId>, std::uint64_t> msg_words;
    auto emit = [&](Phase phase, ShardId src, ShardId dst, std::array<std::uint64_t, 3> &words,
                    std::uint64_t count = 1) {
        words[static_cast<int>(phase)] += count;
        if (record_trace && pm->node_of[src] != pm->node_of[dst])
            msg_words[{static_cast<std::uint8_t>(phase), src, dst}] += count;
    };

    std::optional<nocmap::detail::Rng> shuffle_rng;
    if (opt.reduce_shuffle_seed) shuffle_rng.emplace(*opt.reduce_shuffle_seed);

    std::uint32_t iter = 0;
    for (; iter < max_iters && !frontier.empty(); ++iter) {
        out.stats.frontier_sizes.push_back(frontier.size());
        std::array<std::uint64_t, 3> words{{0, 0, 0}};
        std::uint64_t pair_count = 0, proc_edges = 0, red_edges = 0, updates = 0;

        double dangling_mass = 0.0;
        if (spec.redistribute_dangling) {
            for (VertexId v = 0; v < n; ++v)
                if (g.out_degree(v) == 0) dangling_mass += props[v];
        }

        // --- Process: frontier vertices push along out-edges.
        std::vector<VertexId> touched;
        std::vector<bool> touched_flag(n, false);
        for (VertexId u : frontier) {
            const EdgeId lo = g.out_begin(u), hi = g.out_end(u);
            if (lo == hi) continue;
            const std::uint32_t deg = hi - lo;
            if (pm != nullptr) {
                ShardId prev_shard = UINT32_MAX;
                for (EdgeId e = lo; e != hi; ++e) {
                    const ShardId s = pm->edge_shard_table[e];
                    if (s != prev_shard) {
                        ++pair_count;
                        emit(Phase::Process, s, pm->vertex_shard_prop[u], words);
                        prev_shard = s;
                    }
                }
            } else {
                ++pair_count;
                words[0] += 1;  // one conceptual edge-table read per active vertex
            }
            for (EdgeId e = lo; e != hi; ++e) {
                eprop[e] = spec.process(props[u], g.edge_weight(e), deg);
                eprop_iter[e] = iter;
                ++proc_edges;
                if (pm != nullptr)
                    emit(Phase::Process, pm->vertex_shard_prop[u], pm->edge_shard_prop(e), words);
                else
                    words[0] += 1;
                const VertexId v = g.edge_target(e);
                if (!touched_flag[v]) {
                    touched_flag[v] = true;
                    touched.push_back(v);
                }
            }
        }
        std::sort(touched.begin(), touched.end());

        // --- Reduce: fold freshly produced edge values into accumulators.
        auto reduce_vertex = [&](VertexId u) {
            std::vector<EdgeId> fresh;
            for (const EdgeId *it = g.in_edges_begin(u); it != g.in_edges_end(u); ++it)
                if (eprop_iter[*it] == iter) fresh.push_back(*it);
            if (shuffle_rng) nocmap::detail::shuffle(*shuffle_rng, fresh);
            for (EdgeId e : fresh) {
                temp[u] = spec.reduce(temp[u], eprop[e]);
                ++red_edges;
                if (!opt.literal_reduce_all) {
                    if (pm != nullptr) {
                        const std::uint32_t cls = pm->vertex_class[u];
                        emit(Phase::Reduce, pm->lead_edge_table[cls], pm->vertex_shard_temp[u],
                             words);
                        emit(Phase::Reduce, pm->lead_edge_prop(cls), pm->vertex_shard_temp[u],
                             words);
                    } else {
                        words[1] += 2;
                    }
                }
            }
        };
        for (VertexId u : touched) reduce_vertex(u);
        if (opt.literal_reduce_all) {
            // Worst-case accounting: every in-edge of every vertex is read.
            for (VertexId u = 0; u < n; ++u) {
                const auto in_deg = g.in_degree(u);
                if (in_deg == 0) continue;
                if (pm != nullptr) {
                    const std::uint32_t cls = pm->vertex_class[u];
                    emit(Phase::Reduce, pm->lead_edge_table[cls], pm->vertex_shard_temp[u], words,
                         in_deg);
                    emit(Phase::Reduce, pm->lead_edge_prop(cls), pm->vertex_shard_temp[u], words,
                         in_deg);
                } else {
                    words[1] += 2ull * in_deg;
                }
            }
        }

        // --- Apply: accumulator + old property -> new property.
        std::vector<VertexId> next_frontier;
        double l1_delta = 0.0;
        auto apply_vertex = [&](VertexId u) {
            double acc = temp[u];
            if (spec.redistribute_dangling) acc += dangling_mass / static_cast<double>(n);
            const double old = props[u];
            const double nw = spec.apply(acc, old, n);
            if (nw != old) {
                ++updates;
                if (pm != nullptr) {
                    if (pm->vertex_shard_temp[u] != pm->vertex_shard_prop[u])
                        emit(Phase::Apply, pm->vertex_shard_temp[u], pm->vertex_shard_prop[u],
                             words);
                } else {
                    words[2] += 1;
                }
            }
            l1_delta += std::abs(nw - old);
            props[u] = nw;
            if (!spec.all_active && spec.activate(nw, old)) next_frontier.push_back(u);
            temp[u] = spec.reduce_identity;
        };
        if (spec.apply_all) {
            for (VertexId u = 0; u < n; ++u) apply_vertex(u);
        } else {
            for (VertexId u : touched) apply_vertex(u);
        }

        if (record_trace) {
            for (const auto &[key, count] : msg_words) {
                const auto &[phase, src, dst] = key;
                TraceMessage m;
                m.iteration = iter;
                m.phase = static_cast<Phase>(phase);
                m.src = src;
                m.dst = dst;
                m.bytes = count * word;
                out.trace.messages.push_back(m);
                out.trace.phase_bytes[phase] += m.bytes;
            }
            msg_words.clear();
        }

        out.stats.phase_words.push_back(words);
        out.stats.process_pair_count.push_back(pair_count);
        out.stats.process_edge_count.push_back(proc_edges);
        out.stats.reduce_edge_count.push_back(red_edges);
        out.stats.apply_update_count.push_back(updates);

        if (spec.all_active) {
            if (spec.convergence == AlgorithmSpec::Convergence::L1Delta && l1_delta < spec.epsilon) {
                ++iter;
                frontier.clear();
                break;
            }
            // frontier stays the full vertex set
        } else {
            frontier = std::move(next_frontier);
        }
    }

    out.stats.iterations = out.stats.frontier_sizes.size();
    out.stats.final_frontier_size = frontier.size();
    out.stats.converged = frontier.empty();
    return out;
}

}  // namespace detail

/// Runs a vertex-centric program to convergence. Results are independent of
/// any partitioning. A run that hits max_iterations reports converged=false
/// in its stats rather than throwing.
inline RunResult run_algorithm(const Graph &g, const AlgorithmSpec &spec,
                               std::optional<VertexId> source = std::nullopt,
                               const ExecOptions &opt = {}) {
    auto out = detail::execute(g, spec, source, nullptr, false, opt);
    return RunResult{std::move(out.properties), std::move(out.stats)};
}

/// Runs the same execution while recording shard-to-shard traffic under the
/// given partition map. Messages between shards on the same logical node are
/// dropped; everything else lands in the trace in canonical order.
inline TraceResult emit_traces(const Graph &g, const AlgorithmSpec &spec,
                               std::optional<VertexId> source, const PartitionMap &pm,
                               const ExecOptions &opt = {}) {
    if (!pm.covers(g))
        throw UnmappedItemError("partition map covers " +
                                std::to_string(pm.vertex_shard_prop.size()) + " vertices / " +
                                std::to_string(pm.edge_shard_table.size()) +
                                " edges, graph has " + std::to_string(g.num_vertices()) + " / " +
                                std::to_string(g.num_edges()));
    auto out = detail::execute(g, spec, source, &pm, true, opt);
    return TraceResult{std::move(out.trace), std::move(out.stats)};
}

}  // namespace nocmap
