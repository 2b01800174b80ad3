#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mcf/fields.hpp"

namespace mcf::cli {

/// 17 significant digits, '.' as decimal point regardless of locale.
std::string format_number(double v);

/// Writes via a temporary file in the same directory and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string str() const;
  /// Column index by name; -1 if absent.
  int column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);

/// Snapshot schema shared by every solver: t, grid_index, theta_or_coords, u.
/// 2-D coordinates are written as "a;b".
CsvTable field_table(const SpaceTimeField& u);

/// Heatmap of `value` over (time row, grid column) for a snapshot table.
std::string svg_heatmap(const CsvTable& table, const std::string& value_column, const std::string& title);
/// One polyline per y column against x.
std::string svg_lines(const CsvTable& table, const std::string& x_column, const std::vector<std::string>& y_columns,
                      const std::string& title);

/// Fixed colormap: piecewise-linear through nine viridis anchors, s in [0, 1].
std::string colormap(double s);

}  // namespace mcf::cli
