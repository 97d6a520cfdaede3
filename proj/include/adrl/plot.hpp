#pragma once

// Static SVG charts built from recorded run data.

#include <string>
#include <vector>

namespace adrl {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

std::string render_line_chart(const LineChart& chart);

struct Heatmap {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<std::string> x_ticks;
    std::vector<std::string> y_ticks;
    std::vector<std::vector<double>> cells;  // [row][col]; NaN draws an empty cell
};

std::string render_heatmap(const Heatmap& map);

}  // namespace adrl
