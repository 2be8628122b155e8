#pragma once

#include <string>
#include <vector>

namespace plot {

enum class Style { Line, Points, Bars };

struct Series {
    std::string label;
    Style style = Style::Line;
    std::vector<double> x, y;
    std::vector<double> yerr;   // Points only, may be empty
    std::vector<double> x_hi;   // Bars only: right edge, x holds the left edge
};

struct Panel {
    std::string title;
    std::string xlabel, ylabel;
    std::vector<Series> series;
};

// Panels are stacked vertically in one document.
std::string render_svg(const std::vector<Panel>& panels, int width = 720, int panel_height = 360);

}  // namespace plot
