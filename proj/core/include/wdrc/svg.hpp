#pragma once

#include <string>
#include <vector>

namespace wdrc::svg {

/// Minimal deterministic SVG line/step chart writer used by the report
/// command. Coordinates are formatted with fixed precision so identical
/// inputs produce byte-identical files.
struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool step = false;  // zero-order-hold rendering
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    int width = 900;
    int height = 480;
};

std::string render(const Chart& chart);
void write(const Chart& chart, const std::string& path);

}  // namespace wdrc::svg
