// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nocmap/detail/util.hpp"
#include "nocmap/error.hpp"

namespace nocmap {

/// A grouped bar chart: one group per x label, one bar per series.
struct BarChart {
    std::string title;
    std::string y_label;
    std::vector<std::string> series;
    std::vector<std::string> group_labels;
    std::vector<std::vector<double>> values;  // values[group][series]
};

/// Emits a self-contained static SVG. The numbers behind the bars are
/// embedded as a CSV comment block so charts can be diffed against the
/// tables they were drawn from.
inline void save_bar_chart_svg(const BarChart &chart, const std::string &path) {
    const int width = 720, height = 420;
    const int ml = 70, mr = 20, mt = 50, mb = 70;
    const int plot_w = width - ml - mr, plot_h = height - mt - mb;
    static const char *palette[] = {"#4878a8", "#e49444", "#6aa56e", "#b65d5d",
                                    "#8a7cb0", "#a88d4c"};

    double max_v = 0.0;
    for (const auto &g : chart.values)
        for (double v : g) max_v = std::max(max_v, v);
    if (max_v <= 0.0) max_v = 1.0;
    // Tidy 1/2/5 axis step giving about five gridlines.
    const double raw = max_v / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    const double step = (norm <= 1.0 ? 1.0 : norm <= 2.0 ? 2.0 : norm <= 5.0 ? 5.0 : 10.0) * mag;
    const double top = step * std::ceil(max_v / step - 1e-9);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"sans-serif\">\n";
    svg << "<!-- data\n";
    svg << "group";
    for (const auto &s : chart.series) svg << ',' << s;
    svg << '\n';
    for (std::size_t g = 0; g < chart.group_labels.size(); ++g) {
        svg << chart.group_labels[g];
        for (double v : chart.values[g]) svg << ',' << detail::format_double(v);
        svg << '\n';
    }
    svg << "-->\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << chart.title << "</text>\n";

    // Axis, gridlines, tick labels.
    for (double v = 0.0; v <= top + 1e-9; v += step) {
        const double y = mt + plot_h - (v / top) * plot_h;
        svg << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + plot_w << "\" y2=\""
            << y << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << ml - 6 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << detail::format_double(v)
            << "</text>\n";
    }
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << mt + plot_h << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt + plot_h << "\" x2=\"" << ml + plot_w
        << "\" y2=\"" << mt + plot_h << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"16\" y=\"" << mt + plot_h / 2
        << "\" font-size=\"12\" transform=\"rotate(-90 16 " << mt + plot_h / 2 << ")\" "
        << "text-anchor=\"middle\">" << chart.y_label << "</text>\n";

    const std::size_t groups = chart.group_labels.size();
    const std::size_t nseries = chart.series.size();
    const double group_w = groups ? static_cast<double>(plot_w) / groups : plot_w;
    const double bar_w = nseries ? group_w * 0.7 / nseries : group_w;
    for (std::size_t g = 0; g < groups; ++g) {
        const double gx = ml + g * group_w + group_w * 0.15;
        for (std::size_t s = 0; s < nseries && s < chart.values[g].size(); ++s) {
            const double v = chart.values[g][s];
            const double h = (v / top) * plot_h;
            svg << "<rect x=\"" << gx + s * bar_w << "\" y=\"" << mt + plot_h - h << "\" width=\""
                << bar_w * 0.9 << "\" height=\"" << h << "\" fill=\"" << palette[s % 6]
                << "\"/>\n";
        }
        svg << "<text x=\"" << gx + nseries * bar_w / 2 << "\" y=\"" << mt + plot_h + 16
            << "\" text-anchor=\"middle\" font-size=\"12\">" << chart.group_labels[g]
            << "</text>\n";
    }
    // Legend.
    for (std::size_t s = 0; s < nseries; ++s) {
        const double lx = ml + s * 140.0;
        const double ly = height - 24;
        svg << "<rect x=\"" << lx << "\" y=\"" << ly - 10 << "\" width=\"12\" height=\"12\" fill=\""
            << palette[s % 6] << "\"/>\n";
        svg << "<text x=\"" << lx + 16 << "\" y=\"" << ly << "\" font-size=\"12\">"
            << chart.series[s] << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << svg.str();
    if (!out) throw Error("write failed: " + path);
}

}  // namespace nocmap
