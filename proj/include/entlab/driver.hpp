#pragma once

#include "entlab/config.hpp"
#include "entlab/deficits.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace entlab {

/// A configured distribution built on its grid.
struct NamedDensity {
    std::string name;
    GridDensity density;
};

std::vector<NamedDensity> materialize(const ExperimentConfig& cfg);

/// Outcome of a driver run: asserted checks, failures with context, files written.
struct RunSummary {
    std::size_t asserted = 0;
    std::vector<std::string> failures;
    std::vector<std::string> files;
    bool pass() const { return failures.empty(); }
    void merge(const RunSummary& other);
};

struct RunOptions {
    bool plots = true;
    std::ostream* log = nullptr; // progress lines, if set
};

/// Resolved output directory: the config value, else $ENTLAB_OUTPUT_DIR,
/// else "entlab-out".
std::string output_directory(const ExperimentConfig& cfg);

// CSV writers. Headers are fixed; floats use 12 significant digits.
RunSummary write_functionals(const std::vector<NamedDensity>& ds, const std::string& dir);
RunSummary write_poincare(const std::vector<NamedDensity>& ds, const std::string& dir);
RunSummary write_deficits(const ExperimentConfig& cfg, const std::vector<NamedDensity>& ds,
                          const std::string& dir, const RunOptions& opts);
RunSummary write_lemmas(const ExperimentConfig& cfg, const std::vector<NamedDensity>& ds,
                        const std::string& dir, const RunOptions& opts);

/// Renders deficits.csv and flow.csv in `dir` as SVG line plots.
RunSummary render_plots(const std::string& dir);

/// Everything selected by cfg.checks, then plots.
RunSummary run(const ExperimentConfig& cfg, const RunOptions& opts);

std::string csv_number(double v);

/// Minimal SVG line plot.
struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};
void write_svg_plot(const std::string& path, const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, const std::vector<Series>& series, bool log_y = false);

} // namespace entlab
