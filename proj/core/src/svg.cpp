#include "wdrc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace wdrc::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace

std::string render(const Chart& chart) {
    const int W = chart.width, H = chart.height;
    const int ml = 70, mr = 150, mt = 40, mb = 50;
    const double pw = W - ml - mr, ph = H - mt - mb;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : chart.series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (!(xmin <= xmax)) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) {
        ymax += 0.5;
        ymin -= 0.5;
    }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return mt + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(W) +
           "\" height=\"" + std::to_string(H) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + std::to_string(W / 2) + "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">" + chart.title + "</text>\n";

    // Axes and ticks.
    out += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(mt + ph) + "\" x2=\"" + fmt(ml + pw) +
           "\" y2=\"" + fmt(mt + ph) + "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(mt) + "\" x2=\"" + fmt(ml) + "\" y2=\"" +
           fmt(mt + ph) + "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double xv = xmin + (xmax - xmin) * k / 5.0;
        const double yv = ymin + (ymax - ymin) * k / 5.0;
        out += "<text x=\"" + fmt(px(xv)) + "\" y=\"" + fmt(mt + ph + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               fmt_tick(xv) + "</text>\n";
        out += "<text x=\"" + fmt(ml - 8) + "\" y=\"" + fmt(py(yv) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               fmt_tick(yv) + "</text>\n";
        out += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(py(yv)) + "\" x2=\"" + fmt(ml + pw) +
               "\" y2=\"" + fmt(py(yv)) + "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    }
    out += "<text x=\"" + std::to_string(W / 2) + "\" y=\"" + std::to_string(H - 10) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
           chart.x_label + "</text>\n";
    out += "<text x=\"18\" y=\"" + std::to_string(H / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 18 " + std::to_string(H / 2) + ")\">" + chart.y_label +
           "</text>\n";

    int color = 0;
    int legend_y = mt + 10;
    for (const auto& s : chart.series) {
        const char* c = kPalette[color % 8];
        std::string pts;
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (s.step && i > 0) pts += fmt(px(s.x[i])) + "," + fmt(py(s.y[i - 1])) + " ";
            pts += fmt(px(s.x[i])) + "," + fmt(py(s.y[i])) + " ";
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(c) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        out += "<line x1=\"" + fmt(ml + pw + 10) + "\" y1=\"" + fmt(legend_y) + "\" x2=\"" +
               fmt(ml + pw + 30) + "\" y2=\"" + fmt(legend_y) + "\" stroke=\"" + c +
               "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + fmt(ml + pw + 36) + "\" y=\"" + fmt(legend_y + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + s.name + "</text>\n";
        legend_y += 18;
        ++color;
    }
    out += "</svg>\n";
    return out;
}

void write(const Chart& chart, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << render(chart);
}

}  // namespace wdrc::svg
