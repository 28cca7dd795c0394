#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dpdate/influence.hpp"
#include "dpdate/sim.hpp"
#include "dpdate/wald.hpp"

namespace dpdate {

std::string_view library_version();

std::uint64_t fnv1a64(std::string_view bytes);

/// Resolved settings that identify a run; hashed in sorted key order.
using Settings = std::vector<std::pair<std::string, std::string>>;

std::string canonical_settings(Settings settings);

struct Provenance {
  std::string command;
  std::uint64_t config_hash = 0;
  std::optional<std::uint64_t> seed;
  std::vector<double> alphas;
  std::string version;

  static Provenance make(std::string command, const Settings& settings,
                         std::optional<std::uint64_t> seed, std::vector<double> alphas);
  std::string hash_hex() const;
};

using Cell = std::variant<double, std::int64_t, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

/// Six significant digits; provenance as leading '#' lines.
std::string format_csv(const Provenance& prov, const Table& table);

/// Full precision. `extra` is merged into the top-level object.
nlohmann::json to_json(const Provenance& prov, const Table& table,
                       const nlohmann::json& extra = nlohmann::json::object());

enum class OutputFormat { Csv, Json, Both };
OutputFormat parse_format(std::string_view text);

/// Writes <stem>.csv and/or <stem>.json under out_dir and returns the paths.
std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& out_dir,
                                                 const std::string& stem, OutputFormat format,
                                                 const Provenance& prov, const Table& table,
                                                 const nlohmann::json& extra = nlohmann::json::object());

Table estimates_table(const std::vector<AteEstimate>& estimates);
Table tests_table(const std::vector<std::pair<AteEstimate, TestResult>>& results, double delta0);
Table two_sample_table(const std::vector<std::tuple<AteEstimate, AteEstimate, TestResult>>& results);
Table sim_table(const SimReport& report);
Table influence_table(const std::vector<InfluenceCurve>& curves);

}  // namespace dpdate
