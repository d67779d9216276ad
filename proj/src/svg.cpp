#include "filtop/svg.hpp"

#include "filtop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace filtop {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

void write_line_plot(const std::filesystem::path& path, const std::vector<PlotSeries>& series,
                     const PlotOptions& options) {
    const double margin_l = 70, margin_r = 20, margin_t = 36, margin_b = 48;
    const double plot_w = options.width - margin_l - margin_r;
    const double plot_h = options.height - margin_t - margin_b;

    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    double y_min_pos = x_min;
    for (const auto& s : series) {
        for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x_min = std::min(x_min, s.x[i]);
            x_max = std::max(x_max, s.x[i]);
            y_min = std::min(y_min, s.y[i]);
            y_max = std::max(y_max, s.y[i]);
            if (s.y[i] > 0.0) y_min_pos = std::min(y_min_pos, s.y[i]);
        }
    }
    if (!std::isfinite(x_min)) { x_min = 0; x_max = 1; y_min = 0; y_max = 1; }
    if (x_max == x_min) x_max = x_min + 1;

    const double y_floor = std::isfinite(y_min_pos) ? y_min_pos * 0.1 : 1e-16;
    auto y_value = [&](double y) {
        if (!options.log_y) return y;
        return std::log10(std::max(y, y_floor));
    };
    double vy_min = options.log_y ? y_value(y_min <= 0 ? y_floor : y_min) : y_min;
    double vy_max = options.log_y ? y_value(y_max <= 0 ? y_floor : y_max) : y_max;
    if (vy_max == vy_min) vy_max = vy_min + 1;

    auto px = [&](double x) { return margin_l + (x - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double y) {
        return margin_t + (1.0 - (y_value(y) - vy_min) / (vy_max - vy_min)) * plot_h;
    };

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\""
        << options.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!options.title.empty())
        out << "<text x=\"" << options.width / 2 << "\" y=\"20\" text-anchor=\"middle\">"
            << options.title << "</text>\n";

    // Frame and ticks.
    out << "<rect x=\"" << margin_l << "\" y=\"" << margin_t << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
    const int n_ticks = 5;
    for (int i = 0; i <= n_ticks; ++i) {
        const double fx = x_min + (x_max - x_min) * i / n_ticks;
        out << "<line x1=\"" << px(fx) << "\" y1=\"" << margin_t + plot_h << "\" x2=\"" << px(fx)
            << "\" y2=\"" << margin_t + plot_h + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px(fx) << "\" y=\"" << margin_t + plot_h + 18
            << "\" text-anchor=\"middle\">" << num(fx) << "</text>\n";
        const double vy = vy_min + (vy_max - vy_min) * i / n_ticks;
        const double fy = options.log_y ? std::pow(10.0, vy) : vy;
        const double ypix = margin_t + (1.0 - static_cast<double>(i) / n_ticks) * plot_h;
        out << "<line x1=\"" << margin_l - 5 << "\" y1=\"" << ypix << "\" x2=\"" << margin_l
            << "\" y2=\"" << ypix << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << margin_l - 8 << "\" y=\"" << ypix + 4
            << "\" text-anchor=\"end\">" << num(fy) << "</text>\n";
    }
    out << "<text x=\"" << margin_l + plot_w / 2 << "\" y=\"" << options.height - 10
        << "\" text-anchor=\"middle\">" << options.x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << margin_t + plot_h / 2
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << margin_t + plot_h / 2
        << ")\">" << options.y_label << "</text>\n";

    // Series polylines; break at non-finite samples.
    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
        std::string points;
        auto flush = [&]() {
            if (!points.empty())
                out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
                    << points << "\"/>\n";
            points.clear();
        };
        for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                flush();
                continue;
            }
            points += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
        }
        flush();
        const double ly = margin_t + 16 + 16 * static_cast<double>(si);
        out << "<line x1=\"" << margin_l + 8 << "\" y1=\"" << ly << "\" x2=\"" << margin_l + 28
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
        out << "<text x=\"" << margin_l + 34 << "\" y=\"" << ly + 4 << "\">" << s.label
            << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace filtop
