#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace replab {

/// Shortest decimal form that parses back to the exact same double.
std::string format_double(double v);

/// Strict numeric parsing; throws std::invalid_argument with `context`
/// in the message on any trailing garbage or empty input.
double parse_double(const std::string& s, const std::string& context);
long long parse_int(const std::string& s, const std::string& context);

/// RFC-4180 quoting: fields containing comma, quote or newline are wrapped
/// in double quotes with embedded quotes doubled.
std::string csv_escape(const std::string& field);

std::vector<std::string> split_fields(const std::string& line, char sep);

/// Write via temp file + rename so readers never observe partial contents.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Standalone SVG line plot, no plotting dependency. Axes are scaled to the
/// data range; y defaults to [0, 1] when all values fit there.
std::string render_line_plot_svg(const std::string& title, const std::string& x_label,
                                 const std::string& y_label,
                                 const std::vector<PlotSeries>& series);

}  // namespace replab
