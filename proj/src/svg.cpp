#include "wavecast/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wavecast {

namespace {

constexpr int kWidth = 800;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 30;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

/// Ticks at a 1/2/5 x 10^k step covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi) {
    if (hi <= lo) hi = lo + 1.0;
    const double span = hi - lo;
    double step = std::pow(10.0, std::floor(std::log10(span / 5.0)));
    if (span / step > 10.0) step *= 2.0;
    if (span / step > 10.0) step *= 2.5;
    if (span / step > 10.0) step *= 2.0;
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step)
        ticks.push_back(std::fabs(t) < step * 1e-9 ? 0.0 : t);
    return ticks;
}

void open_svg(std::ostringstream& os, const std::string& config_echo) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kWidth << " " << kHeight
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<metadata>" << xml_escape(config_echo) << "</metadata>\n";
    os << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
}

} // namespace

std::string render_line_svg(const std::vector<PlotSeries>& series, const std::string& title,
                            const std::string& x_label, const std::string& y_label,
                            const std::string& config_echo) {
    if (series.empty()) throw ArgumentError("plot needs at least one series");
    for (const PlotSeries& s : series) {
        if (s.x.empty() || s.x.size() != s.y.size())
            throw ArgumentError("bad series '" + s.label + "'");
    }

    double x_lo = series[0].x[0], x_hi = x_lo, y_lo = series[0].y[0], y_hi = y_lo;
    for (const PlotSeries& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, s.y[i]);
            y_hi = std::max(y_hi, s.y[i]);
        }
    if (x_hi <= x_lo) x_hi = x_lo + 1.0;
    if (y_hi <= y_lo) y_hi = y_lo + 1.0;
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    const double pw = kWidth - kMarginLeft - kMarginRight;
    const double ph = kHeight - kMarginTop - kMarginBottom;
    auto px = [&](double x) { return kMarginLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
    auto py = [&](double y) { return kMarginTop + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph; };

    std::ostringstream os;
    open_svg(os, config_echo);
    os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
       << xml_escape(title) << "</text>\n";

    // axes
    os << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
       << "\" y2=\"" << kMarginTop + ph << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + ph << "\" x2=\""
       << kMarginLeft + pw << "\" y2=\"" << kMarginTop + ph << "\" stroke=\"black\"/>\n";
    for (double t : nice_ticks(x_lo, x_hi)) {
        const double x = px(t);
        os << "<line x1=\"" << num(x) << "\" y1=\"" << num(kMarginTop + ph) << "\" x2=\"" << num(x)
           << "\" y2=\"" << num(kMarginTop + ph + 5) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << num(x) << "\" y=\"" << num(kMarginTop + ph + 18)
           << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
    }
    for (double t : nice_ticks(y_lo, y_hi)) {
        const double y = py(t);
        os << "<line x1=\"" << num(kMarginLeft - 5) << "\" y1=\"" << num(y) << "\" x2=\""
           << num(kMarginLeft) << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << num(kMarginLeft - 8) << "\" y=\"" << num(y + 4)
           << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
    }
    os << "<text x=\"" << kMarginLeft + pw / 2 << "\" y=\"" << kHeight - 10
       << "\" text-anchor=\"middle\">" << xml_escape(x_label) << "</text>\n";
    os << "<text x=\"16\" y=\"" << kMarginTop + ph / 2
       << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << kMarginTop + ph / 2 << ")\">"
       << xml_escape(y_label) << "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const PlotSeries& s = series[i];
        const std::string color =
            s.color.empty() ? kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))] : s.color;
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t j = 0; j < s.x.size(); ++j) {
            if (j) os << " ";
            os << num(px(s.x[j])) << "," << num(py(s.y[j]));
        }
        os << "\"/>\n";
        // legend entry
        const double ly = kMarginTop + 8 + 18.0 * static_cast<double>(i);
        os << "<line x1=\"" << num(kMarginLeft + pw - 120) << "\" y1=\"" << num(ly) << "\" x2=\""
           << num(kMarginLeft + pw - 100) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
           << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << num(kMarginLeft + pw - 94) << "\" y=\"" << num(ly + 4) << "\">"
           << xml_escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string render_heatmap_svg(const Tensor& values, const std::vector<std::string>& row_labels,
                               const std::string& title, const std::string& config_echo) {
    if (values.ndim() != 2) throw ArgumentError("heatmap needs a matrix");
    const int rows = values.dim(0), cols = values.dim(1);
    if (!row_labels.empty() && static_cast<int>(row_labels.size()) != rows)
        throw ArgumentError("row label count mismatch");

    double lo = values.data[0], hi = values.data[0];
    for (double v : values.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = (hi > lo) ? hi - lo : 1.0;

    const double pw = kWidth - kMarginLeft - kMarginRight;
    const double ph = kHeight - kMarginTop - kMarginBottom;
    const double cw = pw / cols, ch = ph / rows;

    std::ostringstream os;
    open_svg(os, config_echo);
    os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
       << xml_escape(title) << "</text>\n";

    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            // min -> light, max -> dark, monotone in the value
            const double u = (values.at(r, c) - lo) / span;
            const int shade = static_cast<int>(std::lround(255.0 * (1.0 - u)));
            char color[16];
            std::snprintf(color, sizeof(color), "#%02x%02x%02x", shade, shade, 255 - (255 - shade) / 3);
            os << "<rect x=\"" << num(kMarginLeft + c * cw) << "\" y=\"" << num(kMarginTop + r * ch)
               << "\" width=\"" << num(cw) << "\" height=\"" << num(ch) << "\" fill=\"" << color
               << "\"/>\n";
        }

    for (int r = 0; r < rows; ++r) {
        const std::string label = row_labels.empty() ? std::to_string(r) : row_labels[static_cast<std::size_t>(r)];
        os << "<text x=\"" << num(kMarginLeft - 6) << "\" y=\"" << num(kMarginTop + (r + 0.5) * ch + 4)
           << "\" text-anchor=\"end\">" << xml_escape(label) << "</text>\n";
    }
    const int col_step = std::max(1, cols / 12);
    for (int c = 0; c < cols; c += col_step)
        os << "<text x=\"" << num(kMarginLeft + (c + 0.5) * cw) << "\" y=\""
           << num(kMarginTop + ph + 16) << "\" text-anchor=\"middle\">" << c << "</text>\n";
    os << "<text x=\"" << kMarginLeft + pw / 2 << "\" y=\"" << kHeight - 10
       << "\" text-anchor=\"middle\">time step</text>\n";
    os << "</svg>\n";
    return os.str();
}

void write_svg(const std::string& path, const std::string& svg) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path);
    os << svg;
    if (!os) throw IoError("write failed: " + path);
}

} // namespace wavecast
