#pragma once

#include <string>
#include <vector>

namespace wz::svg {

struct Series {
    std::string label;
    std::vector<double> x, y;  // NaN y values break the line
};

/// Fixed 640x400 layout; output depends only on the inputs.
std::string line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

/// Row-major values [rows][cols]; row 0 is drawn at the bottom.
std::string heatmap(const std::string& title, std::size_t rows, std::size_t cols, const std::vector<double>& values);

struct Bars {
    std::string label;
    std::vector<double> counts;
};

/// Grouped histogram over shared bin edges.
std::string histogram(const std::string& title, const std::vector<double>& edges, const std::vector<Bars>& groups);

}  // namespace wz::svg
