// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include "nocmap/error.hpp"
#include "nocmap/graph.hpp"

namespace nocmap {

enum class DegreeDirection { Out, In };

/// Map from degree d to the number of vertices with that degree.
struct DegreeHistogram {
    std::map<std::uint32_t, std::uint64_t> entries;

    std::uint64_t total_vertices() const {
        std::uint64_t t = 0;
        for (const auto &[d, n] : entries) t += n;
        return t;
    }
};

struct PowerLawFit {
    double alpha = 0.0;      // magnitude of the log-log slope
    double r_squared = 0.0;  // goodness of fit in [0, 1]
};

inline DegreeHistogram degree_histogram(const Graph &g,
                                        DegreeDirection dir = DegreeDirection::Out) {
    DegreeHistogram h;
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
        std::uint32_t d = (dir == DegreeDirection::Out) ? g.out_degree(v) : g.in_degree(v);
        h.entries[d]++;
    }
    return h;
}

/// Least-squares fit of log n(d) against log d over the nonzero-degree,
/// nonzero-count entries. alpha is the negated slope; a flat or rising
/// histogram is reported as NonPositiveSlopeError since a power law needs
/// alpha > 0.
inline PowerLawFit fit_power_law(const DegreeHistogram &h) {
    std::vector<std::pair<double, double>> pts;
    for (const auto &[d, n] : h.entries) {
        if (d == 0 || n == 0) continue;
        pts.emplace_back(std::log(static_cast<double>(d)), std::log(static_cast<double>(n)));
    }
    if (pts.size() < 3)
        throw InsufficientSupportError("power-law fit needs >= 3 nonzero-degree entries, got " +
                                       std::to_string(pts.size()));
    double sx = 0, sy = 0;
    for (const auto &[x, y] : pts) {
        sx += x;
        sy += y;
    }
    const double mx = sx / pts.size(), my = sy / pts.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto &[x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0) throw InsufficientSupportError("all degrees equal; slope undefined");
    const double slope = sxy / sxx;
    if (slope >= 0.0)
        throw NonPositiveSlopeError("log-log slope is " + std::to_string(slope) +
                                    "; no decaying power law");
    PowerLawFit fit;
    fit.alpha = -slope;
    fit.r_squared = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

/// Orders vertices by descending out-degree (ties by ascending id) and walks
/// the cumulative edge mass: point k is (k/V, top-k out-degree sum / E).
/// Monotone in both coordinates and ends at (1, 1).
inline std::vector<std::pair<double, double>> edge_coverage_curve(const Graph &g) {
    if (g.num_edges() == 0) throw EmptyGraphError("coverage curve undefined for edgeless graph");
    std::vector<VertexId> order(g.num_vertices());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](VertexId a, VertexId b) {
        if (g.out_degree(a) != g.out_degree(b)) return g.out_degree(a) > g.out_degree(b);
        return a < b;
    });
    std::vector<std::pair<double, double>> curve;
    curve.reserve(g.num_vertices());
    std::uint64_t cum = 0;
    const double nv = static_cast<double>(g.num_vertices());
    const double ne = static_cast<double>(g.num_edges());
    for (std::size_t k = 0; k < order.size(); ++k) {
        cum += g.out_degree(order[k]);
        curve.emplace_back(static_cast<double>(k + 1) / nv, static_cast<double>(cum) / ne);
    }
    return curve;
}

/// Fraction of edges covered by the top `vertex_fraction` of vertices.
inline double coverage_at(const std::vector<std::pair<double, double>> &curve,
                          double vertex_fraction) {
    double best = 0.0;
    for (const auto &[vf, ef] : curve) {
        if (vf <= vertex_fraction + 1e-12) best = ef;
    }
    return best;
}

}  // namespace nocmap
