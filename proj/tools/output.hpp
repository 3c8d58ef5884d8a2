#pragma once

// Deterministic number formatting, CSV/JSON writers that stamp the run
// configuration into every file, and a small self-contained SVG line plot.

#include "config.hpp"

#include "isolab/scalar.hpp"

#include <string>
#include <vector>

namespace isolab::cli {

/// Shortest text that round-trips the double.
std::string fmt(double x);
/// 32 significant digits.
std::string fmt(const ExtendedReal& x);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// Writes `<dir>/<stem>.csv` with '#' header lines carrying the subcommand,
/// schema version, config hash and config.
void write_csv(const RunConfig& c, const std::string& stem, const std::string& subcommand, const CsvTable& table);

/// Writes `<dir>/<stem>.json`, pretty-printed with a trailing newline.
void write_json(const RunConfig& c, const std::string& stem, const nlohmann::json& body);

/// Header fields shared by every JSON document.
nlohmann::json json_header(const RunConfig& c, const std::string& subcommand);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
  bool markers = false;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::vector<std::string> notes;  // embedded as XML comments
};

std::string render_svg(const Plot& plot);

void write_svg(const RunConfig& c, const std::string& stem, Plot plot);

/// Rows of a CSV written by this tool, keyed by column name. The
/// config_hash header value goes to `hash` when given.
std::vector<std::vector<std::pair<std::string, std::string>>> read_csv(const std::string& path,
                                                                       std::string* hash = nullptr);

}  // namespace isolab::cli
