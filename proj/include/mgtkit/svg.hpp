#pragma once

#include <string>
#include <vector>

namespace mgtkit {

/// Minimal deterministic SVG emission: a log-log line chart and a labeled
/// heat map. Output bytes depend only on the inputs.

struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;  // raw (x, y), plotted on log10 axes
};

std::string svg_loglog_chart(const std::vector<SvgSeries>& series, const std::string& x_label,
                             const std::string& y_label);

std::string svg_heatmap(const std::vector<std::string>& labels,
                        const std::vector<std::vector<long long>>& counts);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace mgtkit
