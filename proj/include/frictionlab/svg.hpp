#pragma once

#include <string>
#include <vector>

namespace frictionlab::svg {

// Grid data for a heatmap: cell(y, x) values with axis tick labels.
struct HeatmapData {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<std::string> x_ticks;
    std::vector<std::string> y_ticks;
    std::vector<std::vector<double>> cells;  // [y][x]
};

// Renders a standalone SVG heatmap. Byte-deterministic: identical input
// produces identical output. Colors are linear in the metric between
// light (minimum) and dark (maximum); each cell carries a numeric label.
std::string render_heatmap(const HeatmapData& data);

}  // namespace frictionlab::svg
