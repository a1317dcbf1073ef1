#pragma once

#include <string>
#include <vector>

#include "wavecast/tensor.hpp"

namespace wavecast {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color; // CSS color
};

/// Deterministic, self-contained line plot: fixed 800x480 viewBox, axes with
/// tick labels, legend, one polyline per series, config echo in <metadata>.
std::string render_line_svg(const std::vector<PlotSeries>& series, const std::string& title,
                            const std::string& x_label, const std::string& y_label,
                            const std::string& config_echo);

/// Heatmap of a [rows x cols] matrix; min maps to light, max to dark. Row
/// labels optional (size must match when given).
std::string render_heatmap_svg(const Tensor& values, const std::vector<std::string>& row_labels,
                               const std::string& title, const std::string& config_echo);

void write_svg(const std::string& path, const std::string& svg);

} // namespace wavecast
