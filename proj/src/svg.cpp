#include "tvopt/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "tvopt/errors.hpp"

namespace tvopt {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"};
constexpr int kPaletteSize = 8;
constexpr const char* kFont = "font-family=\"Helvetica,Arial,sans-serif\"";

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string px(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&')
            out += "&amp;";
        else if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else
            out += c;
    }
    return out;
}

// Affine data-to-pixel map; callers feed log10 values for log axes.
struct AxisMap {
    double d0 = 0.0, d1 = 1.0, p0 = 0.0, p1 = 1.0;
    double operator()(double v) const { return p0 + (v - d0) / (d1 - d0) * (p1 - p0); }
};

// Tick positions on a 1-2-5 progression, at most target+1 of them.
std::vector<double> nice_ticks(double lo, double hi, int target) {
    std::vector<double> ticks;
    const double span = hi - lo;
    if (!(span > 0.0) || !std::isfinite(span)) return ticks;
    double step = std::pow(10.0, std::floor(std::log10(span / target)));
    for (double mult : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0}) {
        if (span / (step * mult) <= target) {
            step *= mult;
            break;
        }
    }
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
        ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
    return ticks;
}

const char* color_of(std::size_t i) { return kPalette[i % kPaletteSize]; }

}  // namespace

std::string render_log_plot(const LogPlotSpec& spec) {
    if (spec.series.empty()) throw parameter_error("render_log_plot: no series");

    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
    for (const auto& s : spec.series) {
        if (s.x.size() != s.y.size())
            throw parameter_error("render_log_plot: series '" + s.label + "' length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xlo = std::min(xlo, s.x[i]);
            xhi = std::max(xhi, s.x[i]);
            if (s.y[i] > 0.0) {
                ylo = std::min(ylo, s.y[i]);
                yhi = std::max(yhi, s.y[i]);
            }
        }
    }
    if (!std::isfinite(xlo) || xhi <= xlo) {
        xlo = 0.0;
        xhi = 1.0;
    }
    if (!std::isfinite(ylo)) {
        ylo = 0.1;
        yhi = 10.0;
    }
    int e_lo = static_cast<int>(std::floor(std::log10(ylo)));
    int e_hi = static_cast<int>(std::ceil(std::log10(yhi)));
    if (e_hi <= e_lo) e_hi = e_lo + 1;

    const double W = 960, H = 560;
    const double L = 76, R = W - 240, T = 48, B = H - 56;
    AxisMap mx{xlo, xhi, L, R};
    AxisMap my{static_cast<double>(e_lo), static_cast<double>(e_hi), B, T};

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"#ffffff\"/>\n";
    out << "<defs><clipPath id=\"plot\"><rect x=\"" << px(L) << "\" y=\"" << px(T) << "\" width=\""
        << px(R - L) << "\" height=\"" << px(B - T) << "\"/></clipPath></defs>\n";

    // Decade grid and labels.
    for (int e = e_lo; e <= e_hi; ++e) {
        const double y = my(e);
        out << "<line x1=\"" << px(L) << "\" y1=\"" << px(y) << "\" x2=\"" << px(R) << "\" y2=\""
            << px(y) << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << px(L - 8) << "\" y=\"" << px(y + 4)
            << "\" text-anchor=\"end\" font-size=\"12\" " << kFont << " fill=\"#333333\">"
            << num(std::pow(10.0, e)) << "</text>\n";
    }
    for (double t : nice_ticks(xlo, xhi, 7)) {
        const double x = mx(t);
        out << "<line x1=\"" << px(x) << "\" y1=\"" << px(T) << "\" x2=\"" << px(x) << "\" y2=\""
            << px(B) << "\" stroke=\"#eeeeee\"/>\n";
        out << "<text x=\"" << px(x) << "\" y=\"" << px(B + 18)
            << "\" text-anchor=\"middle\" font-size=\"12\" " << kFont << " fill=\"#333333\">"
            << num(t) << "</text>\n";
    }
    out << "<rect x=\"" << px(L) << "\" y=\"" << px(T) << "\" width=\"" << px(R - L)
        << "\" height=\"" << px(B - T) << "\" fill=\"none\" stroke=\"#333333\"/>\n";

    // Curves, pen up across gaps and nonpositive values.
    out << "<g clip-path=\"url(#plot)\">\n";
    for (std::size_t si = 0; si < spec.series.size(); ++si) {
        const auto& s = spec.series[si];
        std::ostringstream d;
        bool pen_down = false;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || s.y[i] <= 0.0) {
                pen_down = false;
                continue;
            }
            d << (pen_down ? " L" : " M") << px(mx(s.x[i])) << ' '
              << px(my(std::log10(s.y[i])));
            pen_down = true;
        }
        out << "<path d=\"" << d.str() << "\" fill=\"none\" stroke=\"" << color_of(si)
            << "\" stroke-width=\"1.6\"";
        if (s.dashed) out << " stroke-dasharray=\"7 4\"";
        out << "/>\n";
    }
    out << "</g>\n";

    // Legend.
    double ly = T + 10;
    for (std::size_t si = 0; si < spec.series.size(); ++si) {
        const auto& s = spec.series[si];
        out << "<line x1=\"" << px(R + 14) << "\" y1=\"" << px(ly) << "\" x2=\"" << px(R + 40)
            << "\" y2=\"" << px(ly) << "\" stroke=\"" << color_of(si) << "\" stroke-width=\"1.6\"";
        if (s.dashed) out << " stroke-dasharray=\"7 4\"";
        out << "/>\n";
        out << "<text x=\"" << px(R + 46) << "\" y=\"" << px(ly + 4) << "\" font-size=\"12\" "
            << kFont << " fill=\"#333333\">" << escape(s.label) << "</text>\n";
        ly += 18;
    }

    out << "<text x=\"" << px((L + R) / 2) << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\" "
        << kFont << " font-weight=\"bold\" fill=\"#111111\">" << escape(spec.title) << "</text>\n";
    out << "<text x=\"" << px((L + R) / 2) << "\" y=\"" << px(H - 14)
        << "\" text-anchor=\"middle\" font-size=\"13\" " << kFont << " fill=\"#333333\">"
        << escape(spec.x_label) << "</text>\n";
    out << "<text x=\"20\" y=\"" << px((T + B) / 2) << "\" text-anchor=\"middle\" font-size=\"13\" "
        << kFont << " fill=\"#333333\" transform=\"rotate(-90 20 " << px((T + B) / 2) << ")\">"
        << escape(spec.y_label) << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

std::string render_scatter_grid(const std::string& title, const std::vector<ScatterPanel>& panels,
                                int columns) {
    if (panels.empty()) throw parameter_error("render_scatter_grid: no panels");
    if (columns < 1) throw parameter_error("render_scatter_grid: columns must be positive");
    const int rows = (static_cast<int>(panels.size()) + columns - 1) / columns;

    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const auto& panel : panels)
        for (const auto& g : panel.groups)
            for (const auto& [x, y] : g.points) {
                if (!std::isfinite(x) || !std::isfinite(y)) continue;
                xlo = std::min(xlo, x);
                xhi = std::max(xhi, x);
                ylo = std::min(ylo, y);
                yhi = std::max(yhi, y);
            }
    if (!std::isfinite(xlo)) {
        xlo = ylo = 0.0;
        xhi = yhi = 1.0;
    }
    // Equal aspect: a common square range centered on the data.
    double span = std::max(xhi - xlo, yhi - ylo);
    if (!(span > 0.0)) span = 1.0;
    span *= 1.12;
    const double cx = (xlo + xhi) / 2, cy = (ylo + yhi) / 2;
    xlo = cx - span / 2;
    xhi = cx + span / 2;
    ylo = cy - span / 2;
    yhi = cy + span / 2;

    const double side = 280, gap = 24, margin = 40, title_h = 44, legend_h = 34, panel_title_h = 22;
    const double W = 2 * margin + columns * side + (columns - 1) * gap;
    const double H = title_h + rows * (side + panel_title_h + gap) + legend_h;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"#ffffff\"/>\n";
    out << "<text x=\"" << px(W / 2) << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\" "
        << kFont << " font-weight=\"bold\" fill=\"#111111\">" << escape(title) << "</text>\n";

    for (std::size_t pi = 0; pi < panels.size(); ++pi) {
        const auto& panel = panels[pi];
        const int r = static_cast<int>(pi) / columns, c = static_cast<int>(pi) % columns;
        const double x0 = margin + c * (side + gap);
        const double y0 = title_h + r * (side + panel_title_h + gap) + panel_title_h;
        AxisMap mx{xlo, xhi, x0, x0 + side};
        AxisMap my{ylo, yhi, y0 + side, y0};

        out << "<text x=\"" << px(x0 + side / 2) << "\" y=\"" << px(y0 - 6)
            << "\" text-anchor=\"middle\" font-size=\"13\" " << kFont << " fill=\"#333333\">"
            << escape(panel.title) << "</text>\n";
        for (double t : nice_ticks(xlo, xhi, 5)) {
            out << "<line x1=\"" << px(mx(t)) << "\" y1=\"" << px(y0) << "\" x2=\"" << px(mx(t))
                << "\" y2=\"" << px(y0 + side) << "\" stroke=\"#eeeeee\"/>\n";
            out << "<line x1=\"" << px(x0) << "\" y1=\"" << px(my(t)) << "\" x2=\""
                << px(x0 + side) << "\" y2=\"" << px(my(t)) << "\" stroke=\"#eeeeee\"/>\n";
        }
        out << "<rect x=\"" << px(x0) << "\" y=\"" << px(y0) << "\" width=\"" << px(side)
            << "\" height=\"" << px(side) << "\" fill=\"none\" stroke=\"#333333\"/>\n";

        for (std::size_t gi = 0; gi < panel.groups.size(); ++gi) {
            const auto& g = panel.groups[gi];
            const char* col = color_of(gi);
            for (const auto& [x, y] : g.points) {
                if (!std::isfinite(x) || !std::isfinite(y)) continue;
                const double X = mx(x), Y = my(y);
                if (X < x0 - 1 || X > x0 + side + 1 || Y < y0 - 1 || Y > y0 + side + 1) continue;
                switch (g.marker) {
                    case ScatterGroup::Marker::circle:
                        out << "<circle cx=\"" << px(X) << "\" cy=\"" << px(Y)
                            << "\" r=\"3.5\" fill=\"" << col << "\" fill-opacity=\"0.85\"/>\n";
                        break;
                    case ScatterGroup::Marker::cross:
                        out << "<path d=\"M" << px(X - 4) << ' ' << px(Y - 4) << " L" << px(X + 4)
                            << ' ' << px(Y + 4) << " M" << px(X - 4) << ' ' << px(Y + 4) << " L"
                            << px(X + 4) << ' ' << px(Y - 4) << "\" stroke=\"" << col
                            << "\" stroke-width=\"1.8\"/>\n";
                        break;
                    case ScatterGroup::Marker::square:
                        out << "<rect x=\"" << px(X - 3.5) << "\" y=\"" << px(Y - 3.5)
                            << "\" width=\"7\" height=\"7\" fill=\"none\" stroke=\"" << col
                            << "\" stroke-width=\"1.6\"/>\n";
                        break;
                }
            }
        }
    }

    // Shared legend from the first panel's groups.
    double lx = margin;
    const double ly = H - legend_h / 2;
    for (std::size_t gi = 0; gi < panels.front().groups.size(); ++gi) {
        const auto& g = panels.front().groups[gi];
        const char* col = color_of(gi);
        out << "<circle cx=\"" << px(lx + 5) << "\" cy=\"" << px(ly - 4) << "\" r=\"4\" fill=\""
            << col << "\"/>\n";
        out << "<text x=\"" << px(lx + 14) << "\" y=\"" << px(ly) << "\" font-size=\"12\" " << kFont
            << " fill=\"#333333\">" << escape(g.label) << "</text>\n";
        lx += 24 + 7.0 * static_cast<double>(g.label.size());
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace tvopt
