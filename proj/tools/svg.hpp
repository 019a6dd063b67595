#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flowtox::cli {

struct SvgSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
};

/// Series in one panel share the y-scale.
struct SvgPanel {
    std::string title;
    std::vector<SvgSeries> series;
};

/// Panels stacked vertically over a common x range.
void write_svg_chart(std::ostream& out, const std::string& title, const std::vector<SvgPanel>& panels,
                     int width = 960, int panel_height = 280);

}  // namespace flowtox::cli
