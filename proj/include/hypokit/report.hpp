#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace hypokit {

/// Minimal column-oriented CSV writer.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}
    void add_row(const std::vector<double>& row);
    void write(const std::string& path) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

/// Static SVG line/scatter plot of (x, y) series; log axes supported.
struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<PlotSeries>& series, bool log_x = false,
                    bool log_y = false);

/// Run manifest: every emitted artifact of a CLI invocation, as JSON.
class RunManifest {
public:
    RunManifest(std::string subcommand, nlohmann::json parameters);
    void add_artifact(const std::string& path);
    void finalize(const std::string& path); // writes the manifest itself

private:
    nlohmann::json doc_;
    double start_;
};

} // namespace hypokit
