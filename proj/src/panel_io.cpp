#include "dpdate/panel_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <numeric>
#include <sstream>

#include "dpdate/errors.hpp"

namespace dpdate {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ParseError, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == ".";
}

double parse_number(const std::string& cell, std::size_t row, const std::string& column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    fail(ErrorCode::ParseError, "row " + std::to_string(row) + ", column '" + column +
                                    "': cannot parse '" + cell + "' as a number");
  }
  return value;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(trim(field));
  return out;
}

PanelCsvSchema PanelCsvSchema::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("schema is not valid JSON: ") + e.what());
  }
  PanelCsvSchema s;
  try {
    s.time_column = j.at("time").get<std::string>();
    s.treated_column = j.at("treated").get<std::string>();
    s.control_columns = j.at("controls").get<std::vector<std::string>>();
    s.treatment_start = j.at("treatment_start").get<double>();
    const std::string transform = j.value("transform", std::string("none"));
    if (transform == "none") {
      s.transform = Transform::None;
    } else if (transform == "log") {
      s.transform = Transform::Log;
    } else {
      fail(ErrorCode::ConfigError, "schema transform must be none or log");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("bad schema: ") + e.what());
  }
  if (s.control_columns.empty()) fail(ErrorCode::ConfigError, "schema lists no controls");
  return s;
}

PanelCsvSchema PanelCsvSchema::from_json_file(const std::filesystem::path& path) {
  return from_json_text(read_file(path));
}

PanelDataset parse_panel_csv(const std::string& text, const PanelCsvSchema& schema) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) fail(ErrorCode::ParseError, "file has no header row");
  if (header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index.emplace(header[i], i);
  const auto column = [&](const std::string& name) {
    const auto it = index.find(name);
    if (it == index.end()) fail(ErrorCode::MissingColumn, "column '" + name + "' not found");
    return it->second;
  };
  const std::size_t time_col = column(schema.time_column);
  const std::size_t treated_col = column(schema.treated_column);
  std::vector<std::size_t> control_cols;
  for (const auto& name : schema.control_columns) control_cols.push_back(column(name));

  struct Row {
    double time;
    std::vector<double> values;  // treated first
  };
  std::vector<Row> rows;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      fail(ErrorCode::ParseError, "row " + std::to_string(row_number) + ": expected " +
                                      std::to_string(header.size()) + " fields, found " +
                                      std::to_string(cells.size()));
    }
    const auto value = [&](std::size_t col) {
      if (is_missing(cells[col])) {
        fail(ErrorCode::MissingValue, "row " + std::to_string(row_number) + ", column '" +
                                          header[col] + "' is empty");
      }
      return parse_number(cells[col], row_number, header[col]);
    };
    Row row{value(time_col), {}};
    row.values.push_back(value(treated_col));
    for (const std::size_t c : control_cols) row.values.push_back(value(c));
    if (schema.transform == Transform::Log) {
      for (std::size_t k = 0; k < row.values.size(); ++k) {
        if (!(row.values[k] > 0.0)) {
          const std::size_t col = k == 0 ? treated_col : control_cols[k - 1];
          fail(ErrorCode::ParseError, "row " + std::to_string(row_number) + ", column '" +
                                          header[col] + "': log of nonpositive value");
        }
        row.values[k] = std::log(row.values[k]);
      }
    }
    rows.push_back(std::move(row));
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.time < b.time; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].time == rows[i - 1].time) {
      fail(ErrorCode::NonMonotoneTime, "duplicate time value " + format_double(rows[i].time));
    }
  }
  if (rows.empty()) fail(ErrorCode::ParseError, "file has no data rows");
  if (!(schema.treatment_start > rows.front().time && schema.treatment_start <= rows.back().time)) {
    fail(ErrorCode::ConfigError, "treatment_start must lie strictly inside the time range");
  }

  const auto T = static_cast<Eigen::Index>(rows.size());
  const auto n = static_cast<Eigen::Index>(control_cols.size());
  Eigen::VectorXd treated(T);
  Eigen::MatrixXd controls(T, n);
  std::vector<double> times;
  Eigen::Index t1 = 0;
  for (Eigen::Index t = 0; t < T; ++t) {
    const Row& row = rows[static_cast<std::size_t>(t)];
    treated(t) = row.values[0];
    for (Eigen::Index j = 0; j < n; ++j) controls(t, j) = row.values[static_cast<std::size_t>(j + 1)];
    times.push_back(row.time);
    if (row.time < schema.treatment_start) ++t1;
  }
  PanelDataset panel = PanelDataset::make(std::move(treated), std::move(controls), t1);
  panel.times = std::move(times);
  panel.treated_label = schema.treated_column;
  panel.control_labels = schema.control_columns;
  return panel;
}

PanelDataset load_panel_csv(const std::filesystem::path& path, const PanelCsvSchema& schema) {
  return parse_panel_csv(read_file(path), schema);
}

PanelCsvSchema schema_for(const PanelDataset& panel) {
  PanelCsvSchema s;
  s.time_column = "time";
  s.treated_column = panel.treated_label.empty() ? "treated" : panel.treated_label;
  for (Eigen::Index j = 0; j < panel.n_controls(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    s.control_columns.push_back(k < panel.control_labels.size()
                                    ? panel.control_labels[k]
                                    : "control" + std::to_string(j + 1));
  }
  s.treatment_start = panel.times.empty() ? static_cast<double>(panel.t1)
                                          : panel.times[static_cast<std::size_t>(panel.t1)];
  return s;
}

std::string format_panel_csv(const PanelDataset& panel) {
  const PanelCsvSchema s = schema_for(panel);
  std::ostringstream os;
  os << s.time_column << ',' << s.treated_column;
  for (const auto& c : s.control_columns) os << ',' << c;
  os << '\n';
  for (Eigen::Index t = 0; t < panel.periods(); ++t) {
    const double time = panel.times.empty() ? static_cast<double>(t)
                                             : panel.times[static_cast<std::size_t>(t)];
    os << format_double(time) << ',' << format_double(panel.treated(t));
    for (Eigen::Index j = 0; j < panel.n_controls(); ++j) {
      os << ',' << format_double(panel.controls(t, j));
    }
    os << '\n';
  }
  return os.str();
}

PanelCsvSchema write_panel_csv(const std::filesystem::path& path, const PanelDataset& panel) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << format_panel_csv(panel);
  return schema_for(panel);
}

}  // namespace dpdate
