#include "mgtkit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mgtkit/errors.hpp"

namespace mgtkit {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

const char* kPalette[] = {"#1b1b1b", "#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf"};

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string svg_loglog_chart(const std::vector<SvgSeries>& series, const std::string& x_label,
                             const std::string& y_label) {
    const double width = 720, height = 480;
    const double left = 70, right = 30, top = 30, bottom = 60;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
    bool first = true;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (x <= 0 || y <= 0) continue;
            const double lx = std::log10(x), ly = std::log10(y);
            if (first) {
                min_x = max_x = lx;
                min_y = max_y = ly;
                first = false;
            } else {
                min_x = std::min(min_x, lx);
                max_x = std::max(max_x, lx);
                min_y = std::min(min_y, ly);
                max_y = std::max(max_y, ly);
            }
        }
    }
    if (first) {
        min_x = min_y = 0.0;
        max_x = max_y = 1.0;
    }
    if (max_x - min_x < 1e-12) max_x = min_x + 1.0;
    if (max_y - min_y < 1e-12) max_y = min_y + 1.0;

    const auto px = [&](double lx) { return left + (lx - min_x) / (max_x - min_x) * plot_w; };
    const auto py = [&](double ly) { return top + (max_y - ly) / (max_y - min_y) * plot_h; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" +
           fmt(height) + "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(plot_w) +
           "\" height=\"" + fmt(plot_h) + "\" fill=\"none\" stroke=\"#444\"/>\n";

    // decade grid lines and tick labels
    for (int d = static_cast<int>(std::ceil(min_x)); d <= static_cast<int>(std::floor(max_x)); ++d) {
        const double x = px(d);
        svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(x) + "\" y2=\"" +
               fmt(top + plot_h) + "\" stroke=\"#ddd\"/>\n";
        svg += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(top + plot_h + 18) +
               "\" font-size=\"12\" text-anchor=\"middle\">1e" + std::to_string(d) + "</text>\n";
    }
    for (int d = static_cast<int>(std::ceil(min_y)); d <= static_cast<int>(std::floor(max_y)); ++d) {
        const double y = py(d);
        svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(left + plot_w) +
               "\" y2=\"" + fmt(y) + "\" stroke=\"#ddd\"/>\n";
        svg += "<text x=\"" + fmt(left - 8) + "\" y=\"" + fmt(y + 4) +
               "\" font-size=\"12\" text-anchor=\"end\">1e" + std::to_string(d) + "</text>\n";
    }
    svg += "<text x=\"" + fmt(left + plot_w / 2) + "\" y=\"" + fmt(height - 16) +
           "\" font-size=\"13\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
    svg += "<text x=\"18\" y=\"" + fmt(top + plot_h / 2) +
           "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
           fmt(top + plot_h / 2) + ")\">" + escape(y_label) + "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        std::string pts;
        for (const auto& [x, y] : series[s].points) {
            if (x <= 0 || y <= 0) continue;
            if (!pts.empty()) pts += ' ';
            pts += fmt(px(std::log10(x))) + "," + fmt(py(std::log10(y)));
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        const double ly = top + 16 + 16 * static_cast<double>(s);
        svg += "<line x1=\"" + fmt(left + plot_w - 130) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" +
               fmt(left + plot_w - 110) + "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fmt(left + plot_w - 104) + "\" y=\"" + fmt(ly) +
               "\" font-size=\"12\">" + escape(series[s].label) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::string svg_heatmap(const std::vector<std::string>& labels,
                        const std::vector<std::vector<long long>>& counts) {
    const std::size_t k = labels.size();
    const double cell = 64, left = 110, top = 70;
    const double width = left + cell * static_cast<double>(k) + 30;
    const double height = top + cell * static_cast<double>(k) + 30;

    long long max_count = 1;
    for (const auto& row : counts)
        for (long long v : row) max_count = std::max(max_count, v);

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" +
           fmt(height) + "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt(left + cell * static_cast<double>(k) / 2) +
           "\" y=\"20\" font-size=\"13\" text-anchor=\"middle\">predicted</text>\n";
    svg += "<text x=\"20\" y=\"" + fmt(top + cell * static_cast<double>(k) / 2) +
           "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
           fmt(top + cell * static_cast<double>(k) / 2) + ")\">gold</text>\n";

    for (std::size_t i = 0; i < k; ++i) {
        svg += "<text x=\"" + fmt(left + cell * (static_cast<double>(i) + 0.5)) + "\" y=\"" +
               fmt(top - 10) + "\" font-size=\"12\" text-anchor=\"middle\">" + escape(labels[i]) +
               "</text>\n";
        svg += "<text x=\"" + fmt(left - 8) + "\" y=\"" +
               fmt(top + cell * (static_cast<double>(i) + 0.5) + 4) +
               "\" font-size=\"12\" text-anchor=\"end\">" + escape(labels[i]) + "</text>\n";
    }

    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const long long v = counts[i][j];
            const double intensity = static_cast<double>(v) / static_cast<double>(max_count);
            const int shade = static_cast<int>(std::lround(255.0 * (1.0 - intensity * 0.85)));
            const double x = left + cell * static_cast<double>(j);
            const double y = top + cell * static_cast<double>(i);
            svg += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(cell) +
                   "\" height=\"" + fmt(cell) + "\" fill=\"rgb(" + std::to_string(shade) + "," +
                   std::to_string(shade) + ",255)\" stroke=\"#777\"/>\n";
            const char* text_color = intensity > 0.6 ? "white" : "black";
            svg += "<text x=\"" + fmt(x + cell / 2) + "\" y=\"" + fmt(y + cell / 2 + 4) +
                   "\" font-size=\"13\" text-anchor=\"middle\" fill=\"" + text_color + "\">" +
                   std::to_string(v) + "</text>\n";
        }
    }
    svg += "</svg>\n";
    return svg;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << contents;
    if (!out) throw Error("write failed: " + path);
}

}  // namespace mgtkit
