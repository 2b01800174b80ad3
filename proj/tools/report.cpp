#include "report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <unistd.h>

namespace mcf::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf.data(), end);
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw std::invalid_argument("csv row has the wrong number of fields");
  rows.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

int CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ls(s);
    while (std::getline(ls, field, ',')) out.push_back(field);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                               " fields");
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw std::runtime_error("csv input is empty");
  return t;
}

CsvTable field_table(const SpaceTimeField& u) {
  CsvTable t;
  t.header = {"t", "grid_index", "theta_or_coords", "u"};
  const BaseGeometry& g = u.geometry();
  std::vector<std::string> coords(u.point_count());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const Point p = g.point(i);
    coords[i] = g.dimension() == 1 ? format_number(p[0]) : format_number(p[0]) + ";" + format_number(p[1]);
  }
  for (std::size_t j = 0; j < u.time_count(); ++j) {
    const std::string tj = format_number(u.times()[j]);
    const auto s = u.slice(j);
    for (std::size_t i = 0; i < s.size(); ++i) t.rows.push_back({tj, std::to_string(i), coords[i], format_number(s[i])});
  }
  return t;
}

std::string colormap(double s) {
  // viridis at s = 0, 1/8, ..., 1.
  static const std::array<std::array<int, 3>, 9> anchors{{{68, 1, 84},
                                                          {71, 44, 122},
                                                          {59, 81, 139},
                                                          {44, 113, 142},
                                                          {33, 144, 141},
                                                          {39, 173, 129},
                                                          {92, 200, 99},
                                                          {170, 220, 50},
                                                          {253, 231, 37}}};
  if (!std::isfinite(s)) s = 0.0;
  s = std::clamp(s, 0.0, 1.0) * 8.0;
  const int k = std::min(7, static_cast<int>(s));
  const double f = s - k;
  char buf[8];
  int rgb[3];
  for (int c = 0; c < 3; ++c) rgb[c] = static_cast<int>(std::lround(anchors[k][c] + f * (anchors[k + 1][c] - anchors[k][c])));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

namespace {

constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 90, kTop = 40, kBottom = 50;

double parse_number(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::numeric_limits<double>::quiet_NaN();
  return v;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(const std::string& title) {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">"
    << escape(title) << "</text>\n";
  return o.str();
}

std::string label(double x, double y, const std::string& text, const char* anchor = "middle") {
  std::ostringstream o;
  o << "<text x=\"" << x << "\" y=\"" << y << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"" << anchor
    << "\">" << escape(text) << "</text>\n";
  return o.str();
}

std::string short_number(double v) {
  std::ostringstream o;
  o.precision(4);
  o << v;
  return o.str();
}

}  // namespace

std::string svg_heatmap(const CsvTable& table, const std::string& value_column, const std::string& title) {
  const int ct = table.column("t"), ci = table.column("grid_index"), cv = table.column(value_column);
  if (ct < 0 || ci < 0 || cv < 0)
    throw std::runtime_error("heatmap needs columns t, grid_index and " + value_column);
  std::map<double, std::map<long, double>> grid;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : table.rows) {
    const double t = parse_number(r[ct]), v = parse_number(r[cv]);
    const long i = std::lround(parse_number(r[ci]));
    grid[t][i] = v;
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (grid.empty()) throw std::runtime_error("heatmap input has no rows");
  if (!(hi > lo)) hi = lo + 1.0;
  long columns = 0;
  for (const auto& [t, row] : grid) columns = std::max(columns, static_cast<long>(row.size()));
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const double cw = pw / static_cast<double>(columns), rh = ph / static_cast<double>(grid.size());

  std::ostringstream o;
  o << header(title);
  std::size_t row = 0;
  for (const auto& [t, cells] : grid) {
    // Time increases upwards.
    const double y = kTop + ph - (row + 1) * rh;
    for (const auto& [i, v] : cells)
      o << "<rect x=\"" << kLeft + i * cw << "\" y=\"" << y << "\" width=\"" << cw + 0.05 << "\" height=\"" << rh + 0.05
        << "\" fill=\"" << colormap((v - lo) / (hi - lo)) << "\"/>\n";
    ++row;
  }
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << label(kLeft + pw / 2, kHeight - 15, "grid_index");
  o << label(kLeft - 10, kTop + ph, short_number(grid.begin()->first), "end");
  o << label(kLeft - 10, kTop + 10, short_number(grid.rbegin()->first), "end");
  o << label(20, kTop + ph / 2, "t");
  // Colour bar.
  const double bx = kWidth - kRight + 20;
  for (int k = 0; k < 64; ++k)
    o << "<rect x=\"" << bx << "\" y=\"" << kTop + ph * (1 - (k + 1) / 64.0) << "\" width=\"16\" height=\"" << ph / 64.0 + 0.05
      << "\" fill=\"" << colormap((k + 0.5) / 64.0) << "\"/>\n";
  o << label(bx + 8, kTop - 6, short_number(hi));
  o << label(bx + 8, kTop + ph + 14, short_number(lo));
  o << "</svg>\n";
  return o.str();
}

std::string svg_lines(const CsvTable& table, const std::string& x_column, const std::vector<std::string>& y_columns,
                      const std::string& title) {
  const int cx = table.column(x_column);
  if (cx < 0) throw std::runtime_error("line plot: no column '" + x_column + "'");
  std::vector<int> cy;
  for (const auto& y : y_columns) {
    const int c = table.column(y);
    if (c < 0) throw std::runtime_error("line plot: no column '" + y + "'");
    cy.push_back(c);
  }
  if (cy.empty()) throw std::runtime_error("line plot: no y columns");
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  std::vector<std::vector<std::pair<double, double>>> series(cy.size());
  for (const auto& r : table.rows) {
    const double x = parse_number(r[cx]);
    if (!std::isfinite(x)) continue;
    for (std::size_t k = 0; k < cy.size(); ++k) {
      const double y = parse_number(r[cy[k]]);
      if (!std::isfinite(y)) continue;
      series[k].emplace_back(x, y);
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!(x1 >= x0)) throw std::runtime_error("line plot: no numeric data");
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - y0) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << header(title);
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    auto pts = series[k];
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::string colour = colormap(series.size() == 1 ? 0.0 : static_cast<double>(k) / (series.size() - 1) * 0.85);
    o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) o << px(x) << ',' << py(y) << ' ';
    o << "\"/>\n";
    o << label(kWidth - kRight + 8, kTop + 14 * (k + 1), y_columns[k], "start");
  }
  o << label(kLeft + pw / 2, kHeight - 15, x_column);
  o << label(kLeft, kTop + ph + 14, short_number(x0));
  o << label(kLeft + pw, kTop + ph + 14, short_number(x1));
  o << label(kLeft - 6, kTop + ph, short_number(y0), "end");
  o << label(kLeft - 6, kTop + 8, short_number(y1), "end");
  o << "</svg>\n";
  return o.str();
}

}  // namespace mcf::cli
