#include "wavezoom/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace wz::svg {

namespace {

constexpr double kW = 640, kH = 400;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

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

std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

struct Range {
    double lo = 0, hi = 1;
    void widen() {
        if (!(hi > lo)) {
            const double d = std::abs(lo) > 0 ? 0.5 * std::abs(lo) : 1.0;
            lo -= d;
            hi += d;
        }
    }
};

Range range_of(const std::vector<const std::vector<double>*>& vs) {
    Range r{INFINITY, -INFINITY};
    for (const auto* v : vs)
        for (double x : *v)
            if (std::isfinite(x)) {
                r.lo = std::min(r.lo, x);
                r.hi = std::max(r.hi, x);
            }
    if (!std::isfinite(r.lo)) r = {0, 1};
    r.widen();
    return r;
}

void header(std::ostringstream& os, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
       << kW << ' ' << kH << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << num(kW / 2) << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
       << escape(title) << "</text>\n";
}

void axes(std::ostringstream& os, Range xr, Range yr, const std::string& xl, const std::string& yl) {
    const double x0 = kLeft, x1 = kW - kRight, y0 = kH - kBottom, y1 = kTop;
    os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0) << "\" height=\""
       << num(y0 - y1) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double f = k / 4.0;
        const double xv = xr.lo + f * (xr.hi - xr.lo), yv = yr.lo + f * (yr.hi - yr.lo);
        const double px = x0 + f * (x1 - x0), py = y0 - f * (y0 - y1);
        os << "<text x=\"" << num(px) << "\" y=\"" << num(y0 + 16) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
           << tick(xv) << "</text>\n";
        os << "<text x=\"" << num(x0 - 4) << "\" y=\"" << num(py + 3) << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
           << tick(yv) << "</text>\n";
    }
    os << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kH - 12) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
       << escape(xl) << "</text>\n";
    os << "<text x=\"14\" y=\"" << num((y0 + y1) / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 "
       << num((y0 + y1) / 2) << ")\">" << escape(yl) << "</text>\n";
}

void legend(std::ostringstream& os, std::size_t k, const std::string& label) {
    const double x = kW - kRight + 12, y = kTop + 10 + 18 * static_cast<double>(k);
    os << "<rect x=\"" << num(x) << "\" y=\"" << num(y - 8) << "\" width=\"12\" height=\"8\" fill=\"" << kPalette[k % 10] << "\"/>\n";
    os << "<text x=\"" << num(x + 16) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(label)
       << "</text>\n";
}

}  // namespace

std::string line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
    std::vector<const std::vector<double>*> xs, ys;
    for (const auto& s : series) {
        xs.push_back(&s.x);
        ys.push_back(&s.y);
    }
    const Range xr = range_of(xs), yr = range_of(ys);
    std::ostringstream os;
    header(os, title);
    axes(os, xr, yr, x_label, y_label);
    const double x0 = kLeft, x1 = kW - kRight, y0 = kH - kBottom, y1 = kTop;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        std::string path;
        bool pen = false;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.y[i]) || !std::isfinite(s.x[i])) {
                pen = false;
                continue;
            }
            const double px = x0 + (s.x[i] - xr.lo) / (xr.hi - xr.lo) * (x1 - x0);
            const double py = y0 - (s.y[i] - yr.lo) / (yr.hi - yr.lo) * (y0 - y1);
            path += (pen ? " L" : " M") + num(px) + ' ' + num(py);
            pen = true;
        }
        if (!path.empty())
            os << "<path d=\"" << path.substr(1) << "\" fill=\"none\" stroke=\"" << kPalette[k % 10] << "\" stroke-width=\"1.5\"/>\n";
        legend(os, k, s.label);
    }
    os << "</svg>\n";
    return os.str();
}

std::string heatmap(const std::string& title, std::size_t rows, std::size_t cols, const std::vector<double>& values) {
    Range r = range_of({&values});
    std::ostringstream os;
    header(os, title);
    const double x0 = kLeft, x1 = kW - kRight, y0 = kH - kBottom, y1 = kTop;
    const double cw = (x1 - x0) / static_cast<double>(std::max<std::size_t>(cols, 1));
    const double ch = (y0 - y1) / static_cast<double>(std::max<std::size_t>(rows, 1));
    for (std::size_t j = 0; j < rows; ++j)
        for (std::size_t i = 0; i < cols; ++i) {
            const double v = values[j * cols + i];
            const double f = std::isfinite(v) ? std::clamp((v - r.lo) / (r.hi - r.lo), 0.0, 1.0) : 0.0;
            // white -> dark blue
            const int c = static_cast<int>(std::lround(255 * (1 - f)));
            const int b = static_cast<int>(std::lround(255 - 115 * f));
            char fill[16];
            std::snprintf(fill, sizeof fill, "#%02x%02x%02x", c, c, b);
            os << "<rect x=\"" << num(x0 + static_cast<double>(i) * cw) << "\" y=\""
               << num(y0 - static_cast<double>(j + 1) * ch) << "\" width=\"" << num(cw) << "\" height=\"" << num(ch)
               << "\" fill=\"" << fill << "\"/>\n";
        }
    os << "<text x=\"" << num(x1 + 12) << "\" y=\"" << num(y1 + 10) << "\" font-family=\"sans-serif\" font-size=\"11\">max "
       << tick(r.hi) << "</text>\n";
    os << "<text x=\"" << num(x1 + 12) << "\" y=\"" << num(y0) << "\" font-family=\"sans-serif\" font-size=\"11\">min "
       << tick(r.lo) << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

std::string histogram(const std::string& title, const std::vector<double>& edges, const std::vector<Bars>& groups) {
    std::vector<const std::vector<double>*> cs;
    for (const auto& g : groups) cs.push_back(&g.counts);
    Range yr = range_of(cs);
    yr.lo = 0;
    yr.widen();
    const Range xr{edges.empty() ? 0 : edges.front(), edges.empty() ? 1 : edges.back()};
    std::ostringstream os;
    header(os, title);
    axes(os, xr, yr, "maximum amplitude", "count");
    const double x0 = kLeft, x1 = kW - kRight, y0 = kH - kBottom, y1 = kTop;
    const std::size_t bins = edges.size() < 2 ? 0 : edges.size() - 1;
    const double bw = (x1 - x0) / static_cast<double>(std::max<std::size_t>(bins, 1));
    const double gw = bw / static_cast<double>(std::max<std::size_t>(groups.size(), 1));
    for (std::size_t k = 0; k < groups.size(); ++k) {
        for (std::size_t b = 0; b < std::min(bins, groups[k].counts.size()); ++b) {
            const double h = groups[k].counts[b] / (yr.hi - yr.lo) * (y0 - y1);
            os << "<rect x=\"" << num(x0 + static_cast<double>(b) * bw + static_cast<double>(k) * gw) << "\" y=\""
               << num(y0 - h) << "\" width=\"" << num(gw) << "\" height=\"" << num(h) << "\" fill=\"" << kPalette[k % 10]
               << "\"/>\n";
        }
        legend(os, k, groups[k].label);
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace wz::svg
