#pragma once

// CSV ingestion and deterministic SVG plots for the experiment runner.  The
// SVG output is a pure function of the input table: same bytes in, same bytes
// out, so plots can be diffed in tests.

#include <cstddef>
#include <string>
#include <vector>

namespace gramlab {

struct CsvTable {
    std::vector<std::string> comments;              // leading '#' lines, marker stripped
    std::vector<std::string> columns;               // header fields
    std::vector<std::vector<std::string>> raw;      // data rows as text
    std::vector<std::vector<double>> cells;         // numeric parse, NaN when not a number
    std::size_t n_rows() const { return raw.size(); }
};

// RFC-4180 field splitting (quotes, "" escapes); every data row must have the
// header's field count.  ConfigError on malformed input.
CsvTable read_csv(const std::string& path);

enum class PlotKind { line, loglog, scatter };
PlotKind parse_plot_kind(const std::string& name);  // ConfigError on unknown

struct PlotResult {
    std::string svg_path;
    std::size_t points = 0;
    std::size_t dropped = 0;  // nonpositive points removed on log axes
};

// Plot the first fully numeric column against every other numeric column.
// Titles come from the first comment line, falling back to the file stem.
// On loglog axes nonpositive points are dropped and counted, with a warning
// line on stderr.
PlotResult emit_plot(const std::string& csv_path, const std::string& svg_path,
                     PlotKind kind);

}  // namespace gramlab
