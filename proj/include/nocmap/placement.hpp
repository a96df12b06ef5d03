// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nocmap/detail/util.hpp"
#include "nocmap/error.hpp"
#include "nocmap/topology.hpp"

namespace nocmap {

enum class NocTopology : std::uint8_t { Mesh2D, FlattenedButterfly };

/// Flattened-butterfly distance model: Paper keeps the plain L1 measure
/// (same as mesh); Corrected charges one hop per differing dimension,
/// which is what the express links actually provide.
enum class CostMode : std::uint8_t { Paper, Corrected };

inline const char *topology_name(NocTopology t) {
    return t == NocTopology::Mesh2D ? "mesh" : "fbfly";
}
inline const char *cost_mode_name(CostMode m) {
    return m == CostMode::Paper ? "paper" : "corrected";
}

struct GridSpec {
    std::uint32_t width = 0;
    std::uint32_t height = 0;  // k rows
    NocTopology topology = NocTopology::Mesh2D;

    std::uint32_t cells() const { return width * height; }
};

struct Coord {
    std::int32_t x = -1;
    std::int32_t y = -1;
    bool operator==(const Coord &o) const { return x == o.x && y == o.y; }
    bool placed() const { return x >= 0; }
};

inline std::uint32_t hop_cost(NocTopology topo, CostMode mode, Coord a, Coord b) {
    const auto dx = static_cast<std::uint32_t>(std::abs(a.x - b.x));
    const auto dy = static_cast<std::uint32_t>(std::abs(a.y - b.y));
    if (topo == NocTopology::FlattenedButterfly && mode == CostMode::Corrected)
        return (dx != 0 ? 1u : 0u) + (dy != 0 ? 1u : 0u);
    return dx + dy;
}

struct Placement {
    std::vector<Coord> coords;  // aligned with TopologyGraph::nodes
    double objective = 0.0;
};

/// Total affinity-weighted hop count, each unordered pair counted once,
/// accumulated in canonical edge order (the stored objective of every
/// solver is exactly this sum).
inline double placement_objective(const TopologyGraph &tg, const std::vector<Coord> &coords,
                                  const GridSpec &grid, CostMode mode) {
    double h = 0.0;
    for (const TopoEdge &e : tg.edges)
        h += e.weight * hop_cost(grid.topology, mode, coords[e.a], coords[e.b]);
    return h;
}

/// Band rules for a regular, scalable layout on a height-k grid with y = 0
/// the bottom row: edge-table shards keep off the bottom row, edge-prop
/// shards keep off the top row, vertex shards stay interior and off the
/// x = 0 column.
inline bool cell_allowed(std::uint8_t index, std::int32_t x, std::int32_t y,
                         const GridSpec &grid) {
    const std::int32_t k = static_cast<std::int32_t>(grid.height);
    if (x < 0 || y < 0 || x >= static_cast<std::int32_t>(grid.width) || y >= k) return false;
    switch (index) {
        case 1: return y > 0;
        case 4: return y < k - 1;
        case 2:
        case 3: return y > 0 && y < k - 1 && x > 0;
    }
    return false;
}

struct Violation {
    ShardId shard = 0;
    std::string what;
};

/// Empty result means the placement is injective, in bounds, and satisfies
/// the band rules. Violations are data, not errors.
inline std::vector<Violation> check_constraints(const std::vector<Coord> &coords,
                                                const std::vector<TopoNode> &nodes,
                                                const GridSpec &grid) {
    std::vector<Violation> out;
    std::map<std::pair<std::int32_t, std::int32_t>, ShardId> seen;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Coord c = coords.at(i);
        const TopoNode &n = nodes[i];
        if (c.x < 0 || c.y < 0 || c.x >= static_cast<std::int32_t>(grid.width) ||
            c.y >= static_cast<std::int32_t>(grid.height)) {
            out.push_back({n.shard, "outside grid bounds"});
            continue;
        }
        auto [it, fresh] = seen.emplace(std::make_pair(c.x, c.y), n.shard);
        if (!fresh)
            out.push_back({n.shard, "shares cell with shard " + std::to_string(it->second)});
        if (!cell_allowed(n.index, c.x, c.y, grid))
            out.push_back({n.shard, "band constraint violated for index " +
                                        std::to_string(static_cast<int>(n.index)) + " at (" +
                                        std::to_string(c.x) + "," + std::to_string(c.y) + ")"});
    }
    return out;
}

namespace detail {

inline std::vector<Coord> all_cells(const GridSpec &grid) {
    std::vector<Coord> cells;
    cells.reserve(grid.cells());
    for (std::int32_t x = 0; x < static_cast<std::int32_t>(grid.width); ++x)
        for (std::int32_t y = 0; y < static_cast<std::int32_t>(grid.height); ++y)
            cells.push_back({x, y});
    return cells;
}

/// Deterministic constructive layout: vertex shards walk the interior from
/// the grid center outwards (classes in rank order claim consecutive
/// cells), edge-table shards then fill from the top row down, edge-prop
/// shards from the bottom row up. Exclusive rows get covered first, which
/// keeps tightly packed grids feasible.
inline std::vector<Coord> banded_initial_layout(const TopologyGraph &tg, const GridSpec &grid) {
    if (tg.nodes.size() > grid.cells())
        throw InfeasibleError("grid has " + std::to_string(grid.cells()) + " cells for " +
                              std::to_string(tg.nodes.size()) + " shards");
    const double cx = (static_cast<double>(grid.width) - 1.0) / 2.0;
    const double cy = (static_cast<double>(grid.height) - 1.0) / 2.0;

    auto interior = all_cells(grid);
    interior.erase(std::remove_if(interior.begin(), interior.end(),
                                  [&](Coord c) { return !cell_allowed(2, c.x, c.y, grid); }),
                   interior.end());
    std::sort(interior.begin(), interior.end(), [&](Coord a, Coord b) {
        const double da = (a.x - cx) * (a.x - cx) + (a.y - cy) * (a.y - cy);
        const double db = (b.x - cx) * (b.x - cx) + (b.y - cy) * (b.y - cy);
        if (da != db) return da < db;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    auto top_down = all_cells(grid);
    std::sort(top_down.begin(), top_down.end(), [](Coord a, Coord b) {
        if (a.y != b.y) return a.y > b.y;
        return a.x < b.x;
    });
    auto bottom_up = all_cells(grid);
    std::sort(bottom_up.begin(), bottom_up.end(), [](Coord a, Coord b) {
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });

    std::vector<Coord> coords(tg.nodes.size());
    std::vector<std::vector<bool>> taken(grid.width,
                                         std::vector<bool>(grid.height, false));
    auto take_first = [&](const std::vector<Coord> &pool, std::uint8_t index) {
        for (Coord c : pool) {
            if (taken[c.x][c.y]) continue;
            if (!cell_allowed(index, c.x, c.y, grid)) continue;
            taken[c.x][c.y] = true;
            return c;
        }
        throw InfeasibleError("no admissible cell left for shard index " +
                              std::to_string(static_cast<int>(index)));
    };

    // Rank order groups classes; within a class vertex-prop precedes
    // vertex-temp so mirror pairs land on adjacent interior cells.
    std::vector<std::uint32_t> order(tg.nodes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (tg.nodes[a].rank != tg.nodes[b].rank) return tg.nodes[a].rank < tg.nodes[b].rank;
        if (tg.nodes[a].index != tg.nodes[b].index) return tg.nodes[a].index < tg.nodes[b].index;
        return tg.nodes[a].shard < tg.nodes[b].shard;
    });
    for (std::uint32_t i : order)
        if (tg.nodes[i].index == 2 || tg.nodes[i].index == 3)
            coords[i] = take_first(interior, tg.nodes[i].index);
    for (std::uint32_t i : order)
        if (tg.nodes[i].index == 1) coords[i] = take_first(top_down, 1);
    for (std::uint32_t i : order)
        if (tg.nodes[i].index == 4) coords[i] = take_first(bottom_up, 4);
    return coords;
}

struct NodeAdjacency {
    std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;

    explicit NodeAdjacency(const TopologyGraph &tg) : adj(tg.nodes.size()) {
        for (const TopoEdge &e : tg.edges) {
            adj[e.a].emplace_back(e.b, e.weight);
            adj[e.b].emplace_back(e.a, e.weight);
        }
    }

    double node_cost(const TopologyGraph &, const std::vector<Coord> &coords,
                     const GridSpec &grid, CostMode mode, std::uint32_t i) const {
        double c = 0.0;
        for (const auto &[j, w] : adj[i])
            if (coords[j].placed()) c += w * hop_cost(grid.topology, mode, coords[i], coords[j]);
        return c;
    }
};

}  // namespace detail

struct ExactOptions {
    std::uint32_t max_positions = 9;  // exhaustive search bound on grid cells
    bool allow_large = false;         // enable branch-and-bound beyond the bound
    CostMode cost_mode = CostMode::Paper;
};

/// Provably minimum-objective placement subject to the band constraints.
/// Assignments are explored in lexicographic coordinate order, so among
/// equal-cost optima the lexicographically smallest coordinate vector wins.
inline Placement solve_placement_exact(const TopologyGraph &tg, const GridSpec &grid,
                                       const ExactOptions &opt = {}) {
    if (grid.cells() > opt.max_positions && !opt.allow_large)
        throw Error("grid exceeds the exhaustive threshold (" +
                    std::to_string(opt.max_positions) +
                    " positions); enable branch and bound for larger grids");
    if (tg.nodes.size() > grid.cells())
        throw InfeasibleError("more shards than grid cells");

    const auto cells = detail::all_cells(grid);  // already in (x, y) lex order
    detail::NodeAdjacency nbr(tg);

    std::vector<Coord> coords(tg.nodes.size());
    std::vector<std::vector<bool>> taken(grid.width, std::vector<bool>(grid.height, false));
    std::optional<std::vector<Coord>> best;
    double best_cost = std::numeric_limits<double>::infinity();

    auto dfs = [&](auto &&self, std::uint32_t i, double partial) -> void {
        if (best && partial >= best_cost) return;
        if (i == tg.nodes.size()) {
            best = coords;
            best_cost = partial;
            return;
        }
        for (Coord c : cells) {
            if (taken[c.x][c.y]) continue;
            if (!cell_allowed(tg.nodes[i].index, c.x, c.y, grid)) continue;
            coords[i] = c;
            taken[c.x][c.y] = true;
            self(self, i + 1, partial + nbr.node_cost(tg, coords, grid, opt.cost_mode, i));
            taken[c.x][c.y] = false;
            coords[i] = {-1, -1};
        }
    };
    dfs(dfs, 0, 0.0);
    if (!best) throw InfeasibleError("constraints admit no assignment on this grid");
    Placement p;
    p.coords = *best;
    p.objective = placement_objective(tg, p.coords, grid, opt.cost_mode);
    return p;
}

struct HeuristicOptions {
    std::uint64_t budget = 0;  // total annealing steps; 0 = keep the banded initial layout
    std::uint32_t rounds = 8;  // reheat/kick cycles the budget is split across
    CostMode cost_mode = CostMode::Paper;
};

namespace detail {

/// Working state for the local search: coordinates plus the reverse
/// occupancy grid, with incremental delta evaluation over the affinity
/// adjacency.
class PlacementSearch {
   public:
    PlacementSearch(const TopologyGraph &tg, const GridSpec &grid, CostMode mode,
                    std::vector<Coord> initial)
        : tg_(tg), grid_(grid), mode_(mode), nbr_(tg), coords_(std::move(initial)) {
        rebuild_occupancy();
    }

    const std::vector<Coord> &coords() const { return coords_; }
    void set_coords(std::vector<Coord> cs) {
        coords_ = std::move(cs);
        rebuild_occupancy();
    }

    double exact_cost() const { return placement_objective(tg_, coords_, grid_, mode_); }

    double delta_move(std::uint32_t i, Coord to) {
        const double before = nbr_.node_cost(tg_, coords_, grid_, mode_, i);
        const Coord from = coords_[i];
        coords_[i] = to;
        const double after = nbr_.node_cost(tg_, coords_, grid_, mode_, i);
        coords_[i] = from;
        return after - before;
    }
    double delta_swap(std::uint32_t i, std::uint32_t j) {
        const double before = nbr_.node_cost(tg_, coords_, grid_, mode_, i) +
                              nbr_.node_cost(tg_, coords_, grid_, mode_, j);
        std::swap(coords_[i], coords_[j]);
        const double after = nbr_.node_cost(tg_, coords_, grid_, mode_, i) +
                             nbr_.node_cost(tg_, coords_, grid_, mode_, j);
        std::swap(coords_[i], coords_[j]);
        return after - before;
    }
    void commit_move(std::uint32_t i, Coord to) {
        occupant_[coords_[i].x][coords_[i].y] = -1;
        occupant_[to.x][to.y] = static_cast<std::int32_t>(i);
        coords_[i] = to;
    }
    void commit_swap(std::uint32_t i, std::uint32_t j) {
        std::swap(occupant_[coords_[i].x][coords_[i].y], occupant_[coords_[j].x][coords_[j].y]);
        std::swap(coords_[i], coords_[j]);
    }
    std::int32_t occupant(Coord c) const { return occupant_[c.x][c.y]; }
    bool allowed(std::uint32_t i, Coord c) const {
        return cell_allowed(tg_.nodes[i].index, c.x, c.y, grid_);
    }

    /// Any-improvement sweeps until a local optimum (or the sweep cap).
    void polish(const std::vector<Coord> &cells) {
        bool improved = true;
        int sweeps = 0;
        while (improved && sweeps++ < 64) {
            improved = false;
            for (std::uint32_t i = 0; i < tg_.nodes.size(); ++i) {
                for (Coord c : cells) {
                    const std::int32_t occ = occupant(c);
                    if (occ == static_cast<std::int32_t>(i)) continue;
                    if (occ < 0) {
                        if (!allowed(i, c)) continue;
                        if (delta_move(i, c) < -1e-12) {
                            commit_move(i, c);
                            improved = true;
                        }
                    } else {
                        const auto j = static_cast<std::uint32_t>(occ);
                        if (j <= i) continue;
                        if (!allowed(i, coords_[j]) || !allowed(j, coords_[i])) continue;
                        if (delta_swap(i, j) < -1e-12) {
                            commit_swap(i, j);
                            improved = true;
                        }
                    }
                }
            }
        }
    }

   private:
    void rebuild_occupancy() {
        occupant_.assign(grid_.width, std::vector<std::int32_t>(grid_.height, -1));
        for (std::size_t i = 0; i < coords_.size(); ++i)
            if (coords_[i].placed()) occupant_[coords_[i].x][coords_[i].y] =
                static_cast<std::int32_t>(i);
    }

    const TopologyGraph &tg_;
    const GridSpec &grid_;
    CostMode mode_;
    NodeAdjacency nbr_;
    std::vector<Coord> coords_;
    std::vector<std::vector<std::int32_t>> occupant_;
};

}  // namespace detail

/// Banded constructive layout refined by iterated local search: rounds of
/// simulated annealing (reheated each round) followed by greedy polish,
/// with a random constraint-preserving kick between rounds. Deterministic
/// for a fixed seed; the result never costs more than the initial layout.
inline Placement solve_placement_heuristic(const TopologyGraph &tg, const GridSpec &grid,
                                           std::uint64_t seed, const HeuristicOptions &opt = {}) {
    detail::PlacementSearch search(tg, grid, opt.cost_mode,
                                   detail::banded_initial_layout(tg, grid));
    const auto cells = detail::all_cells(grid);

    std::vector<Coord> best_coords = search.coords();
    double best_cost = search.exact_cost();

    if (opt.budget > 0 && !tg.nodes.empty()) {
        detail::Rng rng(seed);
        const std::uint32_t rounds = std::max<std::uint32_t>(1, opt.rounds);
        const std::uint64_t steps_per_round = std::max<std::uint64_t>(1, opt.budget / rounds);

        for (std::uint32_t round = 0; round < rounds; ++round) {
            if (round > 0) {
                // Kick: restart from the incumbent and scramble a quarter of
                // the shards by random admissible swaps/moves.
                search.set_coords(best_coords);
                const std::size_t kicks = std::max<std::size_t>(2, tg.nodes.size() / 4);
                for (std::size_t k = 0; k < kicks; ++k) {
                    const auto i =
                        static_cast<std::uint32_t>(detail::uniform_index(rng, tg.nodes.size()));
                    const Coord target = cells[detail::uniform_index(rng, cells.size())];
                    const std::int32_t occ = search.occupant(target);
                    if (occ == static_cast<std::int32_t>(i)) continue;
                    if (occ < 0) {
                        if (search.allowed(i, target)) search.commit_move(i, target);
                    } else {
                        const auto j = static_cast<std::uint32_t>(occ);
                        if (search.allowed(i, search.coords()[j]) &&
                            search.allowed(j, search.coords()[i]))
                            search.commit_swap(i, j);
                    }
                }
            }
            double current = search.exact_cost();
            const double t0 = std::max(1.0, 0.08 * std::max(current, 1.0));
            const double decay =
                std::pow(1e-4, 1.0 / static_cast<double>(steps_per_round));
            double temp = t0;
            for (std::uint64_t step = 0; step < steps_per_round; ++step, temp *= decay) {
                const auto i =
                    static_cast<std::uint32_t>(detail::uniform_index(rng, tg.nodes.size()));
                const Coord target = cells[detail::uniform_index(rng, cells.size())];
                const std::int32_t occ = search.occupant(target);
                if (occ == static_cast<std::int32_t>(i)) continue;
                if (occ < 0) {
                    if (!search.allowed(i, target)) continue;
                    const double d = search.delta_move(i, target);
                    if (d <= 0.0 || detail::uniform_unit(rng) < std::exp(-d / temp)) {
                        search.commit_move(i, target);
                        current += d;
                    }
                } else {
                    const auto j = static_cast<std::uint32_t>(occ);
                    if (!search.allowed(i, search.coords()[j])) continue;
                    if (!search.allowed(j, search.coords()[i])) continue;
                    const double d = search.delta_swap(i, j);
                    if (d <= 0.0 || detail::uniform_unit(rng) < std::exp(-d / temp)) {
                        search.commit_swap(i, j);
                        current += d;
                    }
                }
            }
            search.polish(cells);
            const double cost = search.exact_cost();
            if (cost < best_cost) {
                best_cost = cost;
                best_coords = search.coords();
            }
        }
    }

    Placement p;
    p.coords = best_coords;
    p.objective = placement_objective(tg, p.coords, grid, opt.cost_mode);
    return p;
}

/// Uniform random injection of shards into grid cells; the baseline the
/// optimized placements are compared against. Band constraints are not
/// enforced here on purpose.
inline Placement random_placement(const TopologyGraph &tg, const GridSpec &grid,
                                  std::uint64_t seed, CostMode mode = CostMode::Paper) {
    if (tg.nodes.size() > grid.cells())
        throw InfeasibleError("more shards than grid cells");
    auto cells = detail::all_cells(grid);
    detail::Rng rng(seed);
    detail::shuffle(rng, cells);
    Placement p;
    p.coords.assign(tg.nodes.size(), Coord{});
    for (std::size_t i = 0; i < tg.nodes.size(); ++i) p.coords[i] = cells[i];
    p.objective = placement_objective(tg, p.coords, grid, mode);
    return p;
}

inline void save_placement_csv(const TopologyGraph &tg, const Placement &p,
                               const std::string &path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "shard_id,index,rank,x,y\n";
    for (std::size_t i = 0; i < tg.nodes.size(); ++i)
        out << tg.nodes[i].shard << ',' << static_cast<int>(tg.nodes[i].index) << ','
            << tg.nodes[i].rank << ',' << p.coords[i].x << ',' << p.coords[i].y << '\n';
    if (!out) throw Error("write failed: " + path);
}

struct LoadedPlacement {
    std::vector<TopoNode> nodes;
    std::vector<Coord> coords;
};

inline LoadedPlacement load_placement_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open placement: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "shard_id,index,rank,x,y")
        throw Error("bad placement header in " + path);
    LoadedPlacement lp;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f;
        try {
            TopoNode n;
            Coord c;
            std::getline(ls, f, ',');
            n.shard = static_cast<ShardId>(std::stoul(f));
            std::getline(ls, f, ',');
            n.index = static_cast<std::uint8_t>(std::stoul(f));
            std::getline(ls, f, ',');
            n.rank = static_cast<VertexId>(std::stoul(f));
            std::getline(ls, f, ',');
            c.x = std::stoi(f);
            std::getline(ls, f, ',');
            c.y = std::stoi(f);
            lp.nodes.push_back(n);
            lp.coords.push_back(c);
        } catch (const std::exception &) {
            throw ParseError("malformed placement row", lineno);
        }
    }
    return lp;
}

}  // namespace nocmap
