#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace filtop {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotOptions {
    std::string title;
    std::string x_label = "t";
    std::string y_label = "error";
    bool log_y = false;
    int width = 720;
    int height = 480;
};

/// Minimal static line plot: axes, tick labels, one polyline per series and a
/// small legend. Non-finite points are dropped; with log_y, non-positive
/// values are clamped to a tenth of the smallest positive value.
void write_line_plot(const std::filesystem::path& path, const std::vector<PlotSeries>& series,
                     const PlotOptions& options);

}  // namespace filtop
