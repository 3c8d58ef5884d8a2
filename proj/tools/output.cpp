#include "output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace isolab::cli {

namespace fs = std::filesystem;

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string fmt(const ExtendedReal& x) { return to_string(x, 32); }

namespace {

std::ofstream open_output(const RunConfig& c, const std::string& stem, const std::string& ext) {
  fs::create_directories(c.output_dir);
  fs::path path = fs::path(c.output_dir) / (stem + "." + ext);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Short fixed formatting for coordinates and tick labels.
std::string coord(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// Roughly five ticks on a 1-2-5 ladder.
std::vector<double> nice_ticks(double lo, double hi) {
  double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  double raw = span / 5.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= 6.0) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

}  // namespace

nlohmann::json json_header(const RunConfig& c, const std::string& subcommand) {
  return {{"schema_version", kSchemaVersion},
          {"subcommand", subcommand},
          {"config_hash", config_hash(c)},
          {"config", reproducible_json(c)}};
}

void write_csv(const RunConfig& c, const std::string& stem, const std::string& subcommand, const CsvTable& table) {
  auto out = open_output(c, stem, "csv");
  out << "# isolab " << subcommand << "\n";
  out << "# schema_version=" << kSchemaVersion << "\n";
  out << "# config_hash=" << config_hash(c) << "\n";
  out << "# config=" << reproducible_json(c).dump() << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << csv_field(table.columns[i]);
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
    out << "\n";
  }
}

void write_json(const RunConfig& c, const std::string& stem, const nlohmann::json& body) {
  auto out = open_output(c, stem, "json");
  out << body.dump(2) << "\n";
}

std::string render_svg(const Plot& plot) {
  constexpr double W = 720, H = 480, left = 80, right = 180, top = 40, bottom = 60;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x0 == x1) x0 -= 0.5, x1 += 0.5;
  if (y0 == y1) y0 -= 0.5, y1 += 0.5;
  double pad = 0.04 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << " " << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (const auto& note : plot.notes) {
    std::string safe = note;
    for (std::size_t p; (p = safe.find("--")) != std::string::npos;) safe.replace(p, 2, "- -");
    o << "<!-- " << safe << " -->\n";
  }
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << coord(W / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(plot.title)
    << "</text>\n";
  o << "<rect x=\"" << coord(left) << "\" y=\"" << coord(top) << "\" width=\"" << coord(pw) << "\" height=\""
    << coord(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : nice_ticks(x0, x1)) {
    o << "<line x1=\"" << coord(px(t)) << "\" y1=\"" << coord(top + ph) << "\" x2=\"" << coord(px(t)) << "\" y2=\""
      << coord(top + ph + 5) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << coord(px(t)) << "\" y=\"" << coord(top + ph + 18) << "\" text-anchor=\"middle\">" << tick(t)
      << "</text>\n";
  }
  for (double t : nice_ticks(y0, y1)) {
    o << "<line x1=\"" << coord(left - 5) << "\" y1=\"" << coord(py(t)) << "\" x2=\"" << coord(left) << "\" y2=\""
      << coord(py(t)) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << coord(left - 8) << "\" y=\"" << coord(py(t) + 4) << "\" text-anchor=\"end\">" << tick(t)
      << "</text>\n";
  }
  o << "<text x=\"" << coord(left + pw / 2) << "\" y=\"" << coord(H - 16) << "\" text-anchor=\"middle\">"
    << xml_escape(plot.x_label) << "</text>\n";
  o << "<text x=\"18\" y=\"" << coord(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << coord(top + ph / 2) << ")\">" << xml_escape(plot.y_label) << "</text>\n";

  o << "<clipPath id=\"plot\"><rect x=\"" << coord(left) << "\" y=\"" << coord(top) << "\" width=\"" << coord(pw)
    << "\" height=\"" << coord(ph) << "\"/></clipPath>\n";
  double legend_y = top + 10;
  for (const auto& s : plot.series) {
    std::string points;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!points.empty()) points += ' ';
      points += coord(px(s.x[i])) + "," + coord(py(s.y[i]));
    }
    o << "<polyline clip-path=\"url(#plot)\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
      << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"" << points << "\"/>\n";
    if (s.markers)
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          o << "<circle cx=\"" << coord(px(s.x[i])) << "\" cy=\"" << coord(py(s.y[i])) << "\" r=\"3\" fill=\""
            << s.color << "\"/>\n";
    o << "<line x1=\"" << coord(W - right + 12) << "\" y1=\"" << coord(legend_y) << "\" x2=\"" << coord(W - right + 36)
      << "\" y2=\"" << coord(legend_y) << "\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
      << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>";
    o << "<text x=\"" << coord(W - right + 42) << "\" y=\"" << coord(legend_y + 4) << "\">" << xml_escape(s.label)
      << "</text>\n";
    legend_y += 18;
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const RunConfig& c, const std::string& stem, Plot plot) {
  plot.notes.insert(plot.notes.begin(), {"isolab config_hash=" + config_hash(c),
                                         "schema_version=" + std::to_string(kSchemaVersion),
                                         "config=" + reproducible_json(c).dump()});
  auto out = open_output(c, stem, "svg");
  out << render_svg(plot);
}

std::vector<std::vector<std::pair<std::string, std::string>>> read_csv(const std::string& path,
                                                                       std::string* hash) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> header;
  std::vector<std::vector<std::pair<std::string, std::string>>> rows;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      char ch = s[i];
      if (quoted) {
        if (ch == '"' && i + 1 < s.size() && s[i + 1] == '"') out.back() += '"', ++i;
        else if (ch == '"') quoted = false;
        else out.back() += ch;
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        out.emplace_back();
      } else if (ch != '\r') {
        out.back() += ch;
      }
    }
    return out;
  };
  while (std::getline(in, line)) {
    const std::string key = "# config_hash=";
    if (hash && line.rfind(key, 0) == 0) *hash = line.substr(key.size());
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line);
    if (header.empty()) {
      header = fields;
      continue;
    }
    if (fields.size() != header.size())
      throw std::runtime_error(path + ": row has " + std::to_string(fields.size()) + " fields, header has " +
                               std::to_string(header.size()));
    std::vector<std::pair<std::string, std::string>> row;
    for (std::size_t i = 0; i < fields.size(); ++i) row.emplace_back(header[i], fields[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace isolab::cli
