#include "lensdepth/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace lensdepth::svg {

namespace {

constexpr double kWidth = 640, kHeight = 480, kLeft = 70, kRight = 150, kTop = 40, kBottom = 60;
const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string esc(const std::string& s) {
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

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Frame {
    double x0, x1, y0, y1;

    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

Frame frame_for(double x0, double x1, double y0, double y1) {
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    const double dx = 0.03 * (x1 - x0), dy = 0.03 * (y1 - y0);
    return {x0 - dx, x1 + dx, y0 - dy, y1 + dy};
}

void axes(std::ostringstream& os, const Frame& f, const Labels& labels) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << esc(labels.title)
       << "</text>\n";
    const double l = kLeft, r = kWidth - kRight, t = kTop, b = kHeight - kBottom;
    os << "<rect x=\"" << l << "\" y=\"" << t << "\" width=\"" << r - l << "\" height=\"" << b - t
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0, yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
        os << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << num(b + 18) << "\" text-anchor=\"middle\">" << tick(xv)
           << "</text>\n";
        os << "<text x=\"" << num(l - 6) << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\">" << tick(yv)
           << "</text>\n";
    }
    os << "<text x=\"" << num((l + r) / 2) << "\" y=\"" << num(kHeight - 18) << "\" text-anchor=\"middle\">"
       << esc(labels.x) << "</text>\n";
    os << "<text transform=\"translate(18," << num((t + b) / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
       << esc(labels.y) << "</text>\n";
}

void legend_entry(std::ostringstream& os, std::size_t k, const std::string& label) {
    const double x = kWidth - kRight + 12, y = kTop + 14 + 18.0 * static_cast<double>(k);
    os << "<rect x=\"" << num(x) << "\" y=\"" << num(y - 9) << "\" width=\"10\" height=\"10\" fill=\""
       << kPalette[k % 8] << "\"/>\n";
    os << "<text x=\"" << num(x + 16) << "\" y=\"" << num(y) << "\">" << esc(label) << "</text>\n";
}

}  // namespace

std::string scatter(const std::vector<ScatterPoint>& points, const Labels& labels, bool diagonal) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& p : points) {
        x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
    }
    if (points.empty()) x0 = y0 = 0.0, x1 = y1 = 1.0;
    if (diagonal) x0 = y0 = std::min(x0, y0), x1 = y1 = std::max(x1, y1);
    const Frame f = frame_for(x0, x1, y0, y1);
    std::ostringstream os;
    axes(os, f, labels);
    if (diagonal)
        os << "<line x1=\"" << num(f.px(x0)) << "\" y1=\"" << num(f.py(y0)) << "\" x2=\"" << num(f.px(x1)) << "\" y2=\""
           << num(f.py(y1)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    int max_group = -1;
    for (const auto& p : points) {
        const int g = std::max(p.group, 0);
        max_group = std::max(max_group, g);
        os << "<circle cx=\"" << num(f.px(p.x)) << "\" cy=\"" << num(f.py(p.y)) << "\" r=\"2.5\" fill=\""
           << kPalette[g % 8] << "\" fill-opacity=\"0.7\"/>\n";
    }
    for (int g = 0; g <= max_group; ++g) legend_entry(os, static_cast<std::size_t>(g), "group " + std::to_string(g));
    os << "</svg>\n";
    return os.str();
}

std::string lines(const std::vector<LineSeries>& series, const Labels& labels) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]), y1 = std::max(y1, s.y[i]);
        }
    if (!std::isfinite(x0)) x0 = y0 = 0.0, x1 = y1 = 1.0;
    const Frame f = frame_for(x0, x1, y0, y1);
    std::ostringstream os;
    axes(os, f, labels);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        os << "<polyline fill=\"none\" stroke=\"" << kPalette[k % 8] << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) os << num(f.px(s.x[i])) << "," << num(f.py(s.y[i])) << " ";
        os << "\"/>\n";
        legend_entry(os, k, s.label);
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace lensdepth::svg
