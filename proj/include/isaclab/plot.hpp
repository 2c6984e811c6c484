#pragma once

#include <string>
#include <vector>

namespace isac::plot {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Figure {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::vector<Series> series;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a column or -1.
    int column(const std::string& name) const;
};

// Comma-separated, no quoting. Throws ConfigError on ragged rows.
CsvTable parse_csv(const std::string& text);

// Recognises convergence traces, sweep results and latency tables and averages
// over draws where needed. Throws ConfigError for empty or unknown tables.
Figure figure_from_csv(const CsvTable& table, const std::string& title);

// Line plot with markers and a legend. Identical figures give identical bytes.
std::string render_svg(const Figure& fig);

}  // namespace isac::plot
