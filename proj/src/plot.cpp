#include "adrl/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace adrl {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 55;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
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

void header(std::ostringstream& os, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
       << escape(title) << "</text>\n";
}

void axis_labels(std::ostringstream& os, const std::string& xl, const std::string& yl) {
    const double px = kLeft + (kWidth - kLeft - kRight) / 2;
    const double py = kTop + (kHeight - kTop - kBottom) / 2;
    os << "<text x=\"" << px << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
       << escape(xl) << "</text>\n"
       << "<text x=\"16\" y=\"" << py << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << py << ")\">" << escape(yl) << "</text>\n";
}

}  // namespace

std::string render_line_chart(const LineChart& chart) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const Series& s : chart.series) {
        for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
            xmin = std::min(xmin, s.x[k]);
            xmax = std::max(xmax, s.x[k]);
            ymin = std::min(ymin, s.y[k]);
            ymax = std::max(ymax, s.y[k]);
        }
    }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    const auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
    const auto sy = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * ph; };

    std::ostringstream os;
    header(os, chart.title);
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = xmin + (xmax - xmin) * t / 4.0, yv = ymin + (ymax - ymin) * t / 4.0;
        os << "<text x=\"" << sx(xv) << "\" y=\"" << kTop + ph + 16
           << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n"
           << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">"
           << num(yv) << "</text>\n"
           << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + pw << "\" y1=\"" << sy(yv)
           << "\" y2=\"" << sy(yv) << "\" stroke=\"#ddd\"/>\n";
    }
    axis_labels(os, chart.x_label, chart.y_label);

    for (std::size_t i = 0; i < chart.series.size(); ++i) {
        const Series& s = chart.series[i];
        const char* color = kPalette[i % std::size(kPalette)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
            os << num(sx(s.x[k])) << "," << num(sy(s.y[k])) << " ";
        }
        os << "\"/>\n";
        if (s.x.size() <= 12) {
            for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
                if (!std::isfinite(s.y[k])) continue;
                os << "<circle cx=\"" << num(sx(s.x[k])) << "\" cy=\"" << num(sy(s.y[k]))
                   << "\" r=\"3\" fill=\"" << color << "\"/>\n";
            }
        }
        const double ly = kTop + 10 + 18.0 * static_cast<double>(i);
        os << "<line x1=\"" << kLeft + pw + 12 << "\" x2=\"" << kLeft + pw + 32 << "\" y1=\"" << ly
           << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
           << "<text x=\"" << kLeft + pw + 36 << "\" y=\"" << ly + 4 << "\">" << escape(s.label)
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string render_heatmap(const Heatmap& map) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& row : map.cells)
        for (double v : row)
            if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi == lo) hi = lo + 1e-9;

    const std::size_t rows = map.cells.size();
    const std::size_t cols = rows ? map.cells[0].size() : 0;
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    const double cw = cols ? pw / static_cast<double>(cols) : pw;
    const double ch = rows ? ph / static_cast<double>(rows) : ph;

    std::ostringstream os;
    header(os, map.title);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols && c < map.cells[r].size(); ++c) {
            const double v = map.cells[r][c];
            const double x = kLeft + cw * static_cast<double>(c);
            const double y = kTop + ch * static_cast<double>(r);
            std::string fill = "#eeeeee";
            if (std::isfinite(v)) {
                // white -> dark blue
                const double t = (v - lo) / (hi - lo);
                char buf[16];
                std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(255 - 225 * t),
                              static_cast<int>(255 - 175 * t), static_cast<int>(255 - 75 * t));
                fill = buf;
            }
            os << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(cw)
               << "\" height=\"" << num(ch) << "\" fill=\"" << fill << "\" stroke=\"white\"/>\n";
            if (std::isfinite(v)) {
                const bool dark = (v - lo) / (hi - lo) > 0.6;
                os << "<text x=\"" << num(x + cw / 2) << "\" y=\"" << num(y + ch / 2 + 4)
                   << "\" text-anchor=\"middle\" fill=\"" << (dark ? "white" : "black") << "\">"
                   << num(v) << "</text>\n";
            }
        }
    }
    for (std::size_t c = 0; c < map.x_ticks.size() && c < cols; ++c) {
        os << "<text x=\"" << num(kLeft + cw * (static_cast<double>(c) + 0.5)) << "\" y=\""
           << kTop + ph + 16 << "\" text-anchor=\"middle\">" << escape(map.x_ticks[c])
           << "</text>\n";
    }
    for (std::size_t r = 0; r < map.y_ticks.size() && r < rows; ++r) {
        os << "<text x=\"" << kLeft - 6 << "\" y=\""
           << num(kTop + ch * (static_cast<double>(r) + 0.5) + 4) << "\" text-anchor=\"end\">"
           << escape(map.y_ticks[r]) << "</text>\n";
    }
    axis_labels(os, map.x_label, map.y_label);
    os << "<text x=\"" << kLeft + pw + 12 << "\" y=\"" << kTop + 10 << "\">min " << num(lo)
       << "</text>\n<text x=\"" << kLeft + pw + 12 << "\" y=\"" << kTop + 28 << "\">max "
       << num(hi) << "</text>\n</svg>\n";
    return os.str();
}

}  // namespace adrl
