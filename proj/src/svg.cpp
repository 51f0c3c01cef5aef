#include "frictionlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "frictionlab/errors.hpp"

namespace frictionlab::svg {

namespace {

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c; break;
        }
    }
    return out;
}

}  // namespace

std::string render_heatmap(const HeatmapData& data) {
    const std::size_t ny = data.cells.size();
    if (ny == 0) throw ParameterError("heatmap: no rows");
    const std::size_t nx = data.cells[0].size();
    for (const auto& row : data.cells) {
        if (row.size() != nx) throw ParameterError("heatmap: ragged cell grid");
    }
    if (data.x_ticks.size() != nx || data.y_ticks.size() != ny) {
        throw ParameterError("heatmap: tick labels do not match the grid");
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& row : data.cells) {
        for (double v : row) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const bool degenerate = !(hi > lo);

    const int cell = 72;
    const int margin_left = 96;
    const int margin_top = 56;
    const int margin_bottom = 64;
    const int margin_right = 32;
    const int width = margin_left + cell * static_cast<int>(nx) + margin_right;
    const int height = margin_top + cell * static_cast<int>(ny) + margin_bottom;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" font-family=\"monospace\" font-size=\"14\""
        << " text-anchor=\"middle\">" << escape(data.title) << "</text>\n";

    for (std::size_t y = 0; y < ny; ++y) {
        for (std::size_t x = 0; x < nx; ++x) {
            const double v = data.cells[y][x];
            // light (0.93) at the minimum, dark (0.15) at the maximum
            const double t = degenerate ? 0.5 : (v - lo) / (hi - lo);
            const int shade = static_cast<int>(std::lround(255.0 * (0.93 - 0.78 * t)));
            const int px = margin_left + static_cast<int>(x) * cell;
            const int py = margin_top + static_cast<int>(y) * cell;
            out << "<rect x=\"" << px << "\" y=\"" << py << "\" width=\"" << cell
                << "\" height=\"" << cell << "\" fill=\"rgb(" << shade << "," << shade << ","
                << shade << ")\" stroke=\"black\" stroke-width=\"1\"/>\n";
            const bool dark = t > 0.55 && !degenerate;
            out << "<text x=\"" << px + cell / 2 << "\" y=\"" << py + cell / 2 + 4
                << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\" fill=\""
                << (dark ? "white" : "black") << "\">" << escape(fmt(v, "%.3g")) << "</text>\n";
        }
    }

    for (std::size_t x = 0; x < nx; ++x) {
        out << "<text x=\"" << margin_left + static_cast<int>(x) * cell + cell / 2 << "\" y=\""
            << margin_top + static_cast<int>(ny) * cell + 18
            << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">"
            << escape(data.x_ticks[x]) << "</text>\n";
    }
    for (std::size_t y = 0; y < ny; ++y) {
        out << "<text x=\"" << margin_left - 8 << "\" y=\""
            << margin_top + static_cast<int>(y) * cell + cell / 2 + 4
            << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">"
            << escape(data.y_ticks[y]) << "</text>\n";
    }

    out << "<text x=\"" << margin_left + cell * static_cast<int>(nx) / 2 << "\" y=\""
        << height - 16 << "\" font-family=\"monospace\" font-size=\"13\" text-anchor=\"middle\">"
        << escape(data.x_label) << "</text>\n";
    out << "<text x=\"20\" y=\"" << margin_top + cell * static_cast<int>(ny) / 2
        << "\" font-family=\"monospace\" font-size=\"13\" text-anchor=\"middle\""
        << " transform=\"rotate(-90 20 " << margin_top + cell * static_cast<int>(ny) / 2
        << ")\">" << escape(data.y_label) << "</text>\n";

    // legend: metric range (degenerate ranges are reported as such)
    out << "<text x=\"" << width - margin_right << "\" y=\"40\" font-family=\"monospace\""
        << " font-size=\"11\" text-anchor=\"end\">";
    if (degenerate) {
        out << "range: constant " << escape(fmt(lo));
    } else {
        out << "range: " << escape(fmt(lo)) << " (light) to " << escape(fmt(hi)) << " (dark)";
    }
    out << "</text>\n</svg>\n";
    return out.str();
}

}  // namespace frictionlab::svg
