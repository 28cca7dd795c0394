#include "dpdate/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dpdate/errors.hpp"

namespace dpdate {

namespace {

std::string format_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(double v) const {
      if (std::isnan(v)) return "nan";
      if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", v == 0.0 ? 0.0 : v);
      return buf;
    }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(const std::string& v) const {
      if (v.find_first_of(",\"\n") == std::string::npos) return v;
      std::string out = "\"";
      for (const char c : v) {
        if (c == '"') out += '"';
        out += c;
      }
      return out + '"';
    }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
  };
  return std::visit(Visitor{}, cell);
}

nlohmann::json cell_json(const Cell& cell) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, cell);
}

std::string alpha_list(const std::vector<double>& alphas) {
  std::string out;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (i) out += ';';
    out += format_cell(alphas[i]);
  }
  return out;
}

}  // namespace

std::string_view library_version() { return DPDATE_VERSION; }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string canonical_settings(Settings settings) {
  std::stable_sort(settings.begin(), settings.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string out;
  for (const auto& [k, v] : settings) out += k + '=' + v + '\n';
  return out;
}

Provenance Provenance::make(std::string command, const Settings& settings,
                            std::optional<std::uint64_t> seed, std::vector<double> alphas) {
  Provenance p;
  p.command = std::move(command);
  Settings all = settings;
  all.emplace_back("command", p.command);
  p.config_hash = fnv1a64(canonical_settings(std::move(all)));
  p.seed = seed;
  p.alphas = std::move(alphas);
  p.version = std::string(library_version());
  return p;
}

std::string Provenance::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash));
  return buf;
}

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    fail(ErrorCode::DimensionMismatch, "table row has the wrong number of cells");
  }
  rows.push_back(std::move(row));
}

std::string format_csv(const Provenance& prov, const Table& table) {
  std::ostringstream os;
  os << "# command: " << prov.command << '\n';
  os << "# config_hash: " << prov.hash_hex() << '\n';
  os << "# seed: " << (prov.seed ? std::to_string(*prov.seed) : std::string("none")) << '\n';
  os << "# alphas: " << alpha_list(prov.alphas) << '\n';
  os << "# version: " << prov.version << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    os << (i ? "," : "") << table.columns[i];
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
    os << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const Provenance& prov, const Table& table, const nlohmann::json& extra) {
  nlohmann::json j;
  j["provenance"] = {{"command", prov.command},
                     {"config_hash", prov.hash_hex()},
                     {"seed", prov.seed ? nlohmann::json(*prov.seed) : nlohmann::json(nullptr)},
                     {"alphas", prov.alphas},
                     {"version", prov.version}};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[table.columns[i]] = cell_json(row[i]);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

OutputFormat parse_format(std::string_view text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::Json;
  if (text == "both") return OutputFormat::Both;
  fail(ErrorCode::UsageError, "format must be csv, json or both");
}

std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& out_dir,
                                                 const std::string& stem, OutputFormat format,
                                                 const Provenance& prov, const Table& table,
                                                 const nlohmann::json& extra) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::InvalidArgument, "cannot create " + out_dir.string());
  std::vector<std::filesystem::path> written;
  const auto write = [&](const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + path.string());
    out << body;
    written.push_back(path);
  };
  if (format != OutputFormat::Json) write(out_dir / (stem + ".csv"), format_csv(prov, table));
  if (format != OutputFormat::Csv) {
    write(out_dir / (stem + ".json"), to_json(prov, table, extra).dump(2) + "\n");
  }
  return written;
}

Table estimates_table(const std::vector<AteEstimate>& estimates) {
  Table t;
  t.columns = {"alpha", "aggregate", "estimate", "se", "sigma_hat", "sigma2_mode",
               "sigma2_hat", "sigma2_clamped", "se_approximate", "omega", "t1", "t2",
               "fit_sigma", "converged", "iterations", "starts"};
  for (const auto& e : estimates) {
    t.add({e.alpha, std::string(to_string(e.aggregate_kind)), e.value, e.se, e.sigma_hat,
           e.sigma2_mode.label(), e.sigma2_hat, e.sigma2_clamped, e.se_approximate, e.omega,
           static_cast<std::int64_t>(e.t1), static_cast<std::int64_t>(e.t2),
           std::sqrt(e.fit.params.sigma2), e.fit.converged,
           static_cast<std::int64_t>(e.fit.iterations), static_cast<std::int64_t>(e.fit.starts)});
  }
  return t;
}

Table tests_table(const std::vector<std::pair<AteEstimate, TestResult>>& results, double delta0) {
  Table t;
  t.columns = {"alpha", "aggregate", "estimate", "se", "delta0", "alternative", "level",
               "statistic", "p_value", "critical_value", "reject", "sigma2_mode", "converged"};
  for (const auto& [e, r] : results) {
    t.add({e.alpha, std::string(to_string(e.aggregate_kind)), e.value, e.se, delta0,
           std::string(to_string(r.alternative)), r.level, r.statistic, r.p_value,
           r.critical_value, r.reject, e.sigma2_mode.label(), e.fit.converged});
  }
  return t;
}

Table two_sample_table(
    const std::vector<std::tuple<AteEstimate, AteEstimate, TestResult>>& results) {
  Table t;
  t.columns = {"alpha", "aggregate", "estimate1", "se1", "estimate2", "se2", "alternative",
               "level", "statistic", "p_value", "critical_value", "reject"};
  for (const auto& [e1, e2, r] : results) {
    t.add({e1.alpha, std::string(to_string(e1.aggregate_kind)), e1.value, e1.se, e2.value,
           e2.se, std::string(to_string(r.alternative)), r.level, r.statistic, r.p_value,
           r.critical_value, r.reject});
  }
  return t;
}

Table sim_table(const SimReport& report) {
  const SimConfig& c = report.config;
  Table t;
  if (!report.is_power) {
    t.columns = {"estimator", "alpha", "t1", "t2", "contamination", "bias", "mse",
                 "error_variance", "reps_used", "failures"};
    for (const auto& cell : report.cells) {
      t.add({std::string(to_string(cell.estimator)), cell.alpha,
             static_cast<std::int64_t>(c.t1), static_cast<std::int64_t>(c.t2),
             c.contamination.label(), cell.bias, cell.mse, cell.error_variance,
             static_cast<std::int64_t>(cell.reps_used), static_cast<std::int64_t>(cell.failures)});
    }
    return t;
  }
  t.columns = {"estimator", "alpha", "t1", "t2", "contamination", "delta", "rejection_rate",
               "reps_used", "failures"};
  for (const auto& cell : report.cells) {
    for (std::size_t g = 0; g < report.delta_grid.size(); ++g) {
      t.add({std::string(to_string(cell.estimator)), cell.alpha,
             static_cast<std::int64_t>(c.t1), static_cast<std::int64_t>(c.t2),
             c.contamination.label(), report.delta_grid[g], cell.rejection_rates[g],
             static_cast<std::int64_t>(cell.reps_used), static_cast<std::int64_t>(cell.failures)});
    }
  }
  return t;
}

Table influence_table(const std::vector<InfluenceCurve>& curves) {
  Table t;
  t.columns = {"alpha", "kind", "point", "influence"};
  for (const auto& curve : curves) {
    const std::string kind = curve.kind == InfluenceKind::Pre ? "pre" : "post";
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
      t.add({curve.alpha, kind, curve.grid[i], curve.values[i]});
    }
  }
  return t;
}

}  // namespace dpdate
