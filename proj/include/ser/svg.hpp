#pragma once

#include <string>

#include "ser/dataio.hpp"

namespace ser {

struct PlotSpec {
    int width = 800;
    int height = 600;
    double point_radius = 3.0;
    std::string x_label = "dim0";
    std::string y_label = "dim1";
};

// Scatter plot of a 2-column embedding table, colored by class label.
// Output is a standalone deterministic SVG.
std::string scatter_svg(const FeatureTable& table, const PlotSpec& spec);

void write_scatter_svg(const FeatureTable& table, const PlotSpec& spec,
                       const std::string& path);

}  // namespace ser
