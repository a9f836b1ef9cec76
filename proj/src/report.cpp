#include "hypokit/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hypokit/errors.hpp"

namespace hypokit {

void CsvWriter::add_row(const std::vector<double>& row) {
    if (row.size() != columns_.size())
        throw DataError("CsvWriter: row width does not match the header");
    rows_.push_back(row);
}

void CsvWriter::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("CsvWriter: cannot open " + path);
    for (std::size_t c = 0; c < columns_.size(); ++c)
        out << columns_[c] << (c + 1 < columns_.size() ? "," : "\n");
    out.precision(17);
    for (const auto& row : rows_) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << row[c] << (c + 1 < row.size() ? "," : "\n");
    }
}

namespace {

double tick_round(double v) {
    const double mag = std::pow(10.0, std::floor(std::log10(std::abs(v) + 1e-300)));
    return std::round(v / mag) * mag;
}

} // namespace

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<PlotSeries>& series, bool log_x, bool log_y) {
    const int W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (log_x && s.x[i] <= 0) continue;
            if (log_y && s.y[i] <= 0) continue;
            xmin = std::min(xmin, tx(s.x[i]));
            xmax = std::max(xmax, tx(s.x[i]));
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    if (xmin > xmax) { xmin = 0; xmax = 1; }
    if (ymin > ymax) { ymin = 0; ymax = 1; }
    if (xmax - xmin < 1e-12) { xmax += 0.5; xmin -= 0.5; }
    if (ymax - ymin < 1e-12) { ymax += 0.5; ymin -= 0.5; }
    auto px = [&](double v) { return ml + (tx(v) - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double v) { return H - mb - (ty(v) - ymin) / (ymax - ymin) * (H - mt - mb); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b"};
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";
    svg << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='"
        << H - mb << "' stroke='black'/>\n";
    svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
        << "' stroke='black'/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = xmin + (xmax - xmin) * t / 4.0;
        const double fy = ymin + (ymax - ymin) * t / 4.0;
        const double gx = ml + (W - ml - mr) * t / 4.0;
        const double gy = H - mb - (H - mt - mb) * t / 4.0;
        svg << "<text x='" << gx << "' y='" << H - mb + 18
            << "' text-anchor='middle' font-size='11'>"
            << tick_round(log_x ? std::pow(10, fx) : fx) << "</text>\n";
        svg << "<text x='" << ml - 8 << "' y='" << gy + 4
            << "' text-anchor='end' font-size='11'>"
            << tick_round(log_y ? std::pow(10, fy) : fy) << "</text>\n";
    }
    int ci = 0;
    for (const auto& s : series) {
        svg << "<polyline fill='none' stroke='" << colors[ci % 6] << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (log_x && s.x[i] <= 0) continue;
            if (log_y && s.y[i] <= 0) continue;
            svg << px(s.x[i]) << "," << py(s.y[i]) << " ";
        }
        svg << "'/>\n";
        svg << "<text x='" << W - mr - 140 << "' y='" << mt + 16 * (ci + 1) << "' fill='"
            << colors[ci % 6] << "' font-size='12'>" << s.label << "</text>\n";
        ++ci;
    }
    svg << "</svg>\n";
    std::ofstream out(path);
    if (!out) throw DataError("write_svg_plot: cannot open " + path);
    out << svg.str();
}

RunManifest::RunManifest(std::string subcommand, nlohmann::json parameters) {
    doc_["subcommand"] = std::move(subcommand);
    doc_["parameters"] = std::move(parameters);
    doc_["artifacts"] = nlohmann::json::array();
    doc_["version"] = "hypokit 0.1.0";
    doc_["rng"] = "counter-based (splitmix64 keyed streams)";
    start_ = std::chrono::duration<double>(
                 std::chrono::steady_clock::now().time_since_epoch())
                 .count();
}

void RunManifest::add_artifact(const std::string& path) {
    doc_["artifacts"].push_back(path);
}

void RunManifest::finalize(const std::string& path) {
    const double now = std::chrono::duration<double>(
                           std::chrono::steady_clock::now().time_since_epoch())
                           .count();
    doc_["wall_time_seconds"] = now - start_;
    doc_["artifacts"].push_back(path);
    std::ofstream out(path);
    if (!out) throw DataError("RunManifest: cannot open " + path);
    out << doc_.dump(2) << "\n";
}

} // namespace hypokit
