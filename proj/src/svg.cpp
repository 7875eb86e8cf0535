#include "ser/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ser/errors.hpp"

namespace ser {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string scatter_svg(const FeatureTable& table, const PlotSpec& spec) {
    if (table.m() != 2) throw UserError("plot: embedding must have exactly 2 dimensions, got " +
                                        std::to_string(table.m()));
    if (spec.width <= 0 || spec.height <= 0) throw UserError("plot: dimensions must be positive");

    std::set<std::string> class_set;
    for (const auto& u : table.rows) class_set.insert(u.label);
    std::vector<std::string> classes(class_set.begin(), class_set.end());
    auto color_of = [&](const std::string& label) {
        const auto idx = static_cast<std::size_t>(
            std::lower_bound(classes.begin(), classes.end(), label) - classes.begin());
        return std::string(kPalette[idx % (sizeof(kPalette) / sizeof(kPalette[0]))]);
    };

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (table.n() > 0) {
        xmin = xmax = table.X(0, 0);
        ymin = ymax = table.X(0, 1);
        for (std::size_t i = 0; i < table.n(); ++i) {
            xmin = std::min(xmin, table.X(i, 0));
            xmax = std::max(xmax, table.X(i, 0));
            ymin = std::min(ymin, table.X(i, 1));
            ymax = std::max(ymax, table.X(i, 1));
        }
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    const double margin = 40.0;
    const double sx = (spec.width - 2 * margin) / (xmax - xmin);
    const double sy = (spec.height - 2 * margin) / (ymax - ymin);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
        << spec.height << "\" viewBox=\"0 0 " << spec.width << " " << spec.height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < table.n(); ++i) {
        const double px = margin + (table.X(i, 0) - xmin) * sx;
        const double py = spec.height - margin - (table.X(i, 1) - ymin) * sy;
        svg << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py) << "\" r=\""
            << fmt(spec.point_radius) << "\" fill=\"" << color_of(table.rows[i].label)
            << "\"/>\n";
    }
    // legend
    double ly = margin;
    for (const auto& cls : classes) {
        svg << "<circle cx=\"" << fmt(spec.width - margin - 100.0) << "\" cy=\"" << fmt(ly)
            << "\" r=\"5\" fill=\"" << color_of(cls) << "\"/>\n";
        svg << "<text x=\"" << fmt(spec.width - margin - 90.0) << "\" y=\"" << fmt(ly + 4.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << cls << "</text>\n";
        ly += 18.0;
    }
    svg << "<text x=\"" << fmt(spec.width / 2.0) << "\" y=\"" << fmt(spec.height - 8.0)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
        << spec.x_label << "</text>\n";
    svg << "<text x=\"12\" y=\"" << fmt(spec.height / 2.0)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 12 "
        << fmt(spec.height / 2.0) << ")\">" << spec.y_label << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

void write_scatter_svg(const FeatureTable& table, const PlotSpec& spec,
                       const std::string& path) {
    const std::string svg = scatter_svg(table, spec);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write SVG: " + path);
    out << svg;
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace ser
