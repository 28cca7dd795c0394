#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dpdate/ate.hpp"

namespace dpdate {

enum class Transform { None, Log };

struct PanelCsvSchema {
  std::string time_column;
  std::string treated_column;
  std::vector<std::string> control_columns;
  /// Time value of the first post-treatment row.
  double treatment_start = 0.0;
  Transform transform = Transform::None;

  /// Reads {"time", "treated", "controls", "treatment_start", "transform"}.
  static PanelCsvSchema from_json_file(const std::filesystem::path& path);
  static PanelCsvSchema from_json_text(const std::string& text);
};

/// Rows are sorted by time; t1 is the number of rows before treatment_start.
PanelDataset load_panel_csv(const std::filesystem::path& path, const PanelCsvSchema& schema);
PanelDataset parse_panel_csv(const std::string& text, const PanelCsvSchema& schema);

/// Writes time, treated and control columns at round-trip precision. Returns
/// a schema that reloads the same dataset (transform none).
PanelCsvSchema write_panel_csv(const std::filesystem::path& path, const PanelDataset& panel);
std::string format_panel_csv(const PanelDataset& panel);
PanelCsvSchema schema_for(const PanelDataset& panel);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace dpdate
