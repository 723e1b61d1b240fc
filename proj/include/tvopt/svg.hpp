#pragma once

// Self-contained SVG rendering: log-scale curve plots with decade ticks and a
// legend, and equal-aspect scatter panels. No external plotting dependency;
// each call returns one standalone .svg document.

#include <string>
#include <utility>
#include <vector>

namespace tvopt {

struct CurveSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;  // nonpositive or non-finite entries break the line
    bool dashed = false;    // bound overlays
};

struct LogPlotSpec {
    std::string title;
    std::string x_label = "k";
    std::string y_label;
    std::vector<CurveSeries> series;
};

std::string render_log_plot(const LogPlotSpec& spec);

struct ScatterGroup {
    enum class Marker { circle, cross, square };
    std::string label;
    std::vector<std::pair<double, double>> points;
    Marker marker = Marker::circle;
};

struct ScatterPanel {
    std::string title;
    std::vector<ScatterGroup> groups;
};

// Panels share one equal-aspect coordinate range so positions are comparable
// across snapshots.
std::string render_scatter_grid(const std::string& title, const std::vector<ScatterPanel>& panels,
                                int columns);

}  // namespace tvopt
