#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace tou {

/// Minimal static SVG line chart.
std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<std::pair<double, double>>& points);

}  // namespace tou
