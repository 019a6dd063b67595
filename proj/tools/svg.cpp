#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace flowtox::cli {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_svg_chart(std::ostream& out, const std::string& title, const std::vector<SvgPanel>& panels,
                     int width, int panel_height) {
    if (panels.empty()) throw std::invalid_argument("svg: no panels");
    double x0 = std::numeric_limits<double>::infinity();
    double x1 = -x0;
    for (const auto& p : panels) {
        for (const auto& s : p.series) {
            if (s.x.size() != s.y.size()) throw std::invalid_argument("svg: series '" + s.name + "' x/y lengths differ");
            for (double x : s.x) {
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
            }
        }
    }
    if (!(x1 > x0)) {
        x0 = std::isfinite(x0) ? x0 - 1.0 : 0.0;
        x1 = x0 + 2.0;
    }
    const double left = 80.0;
    const double right = 20.0;
    const double top = 40.0;
    const double gap = 40.0;
    const double plot_w = width - left - right;
    const double plot_h = panel_height - gap;
    const int height = static_cast<int>(top + panel_height * static_cast<double>(panels.size()));

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(width / 2.0) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << escape(title) << "</text>\n";

    for (std::size_t pi = 0; pi < panels.size(); ++pi) {
        const auto& p = panels[pi];
        const double oy = top + static_cast<double>(pi) * panel_height;
        double y0 = std::numeric_limits<double>::infinity();
        double y1 = -y0;
        for (const auto& s : p.series) {
            for (double y : s.y) {
                if (!std::isfinite(y)) continue;
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
            }
        }
        if (!std::isfinite(y0)) {
            y0 = 0.0;
            y1 = 1.0;
        }
        if (!(y1 > y0)) {
            y0 -= 0.5;
            y1 += 0.5;
        }
        const auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * plot_w; };
        const auto py = [&](double y) { return oy + plot_h - (y - y0) / (y1 - y0) * plot_h; };

        out << "<g>\n<rect x=\"" << num(left) << "\" y=\"" << num(oy) << "\" width=\"" << num(plot_w)
            << "\" height=\"" << num(plot_h) << "\" fill=\"none\" stroke=\"#888\"/>\n";
        out << "<text x=\"" << num(left) << "\" y=\"" << num(oy - 6) << "\">" << escape(p.title) << "</text>\n";
        for (int tk = 0; tk <= 4; ++tk) {
            const double v = y0 + (y1 - y0) * tk / 4.0;
            out << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(v) + 4) << "\" text-anchor=\"end\">"
                << label(v) << "</text>\n";
        }
        double legend_x = left + plot_w - 10;
        for (auto it = p.series.rbegin(); it != p.series.rend(); ++it) {
            out << "<text x=\"" << num(legend_x) << "\" y=\"" << num(oy + 14) << "\" text-anchor=\"end\" fill=\""
                << it->color << "\">" << escape(it->name) << "</text>\n";
            legend_x -= 10.0 + 7.0 * static_cast<double>(it->name.size());
        }
        for (const auto& s : p.series) {
            out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1\" points=\"";
            bool first = true;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.y[i])) continue;
                if (!first) out << ' ';
                out << num(px(s.x[i])) << ',' << num(py(s.y[i]));
                first = false;
            }
            out << "\"/>\n";
        }
        out << "</g>\n";
    }
    out << "</svg>\n";
}

}  // namespace flowtox::cli
