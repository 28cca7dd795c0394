#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "dpdate/errors.hpp"
#include "dpdate/influence.hpp"
#include "dpdate/panel_io.hpp"
#include "dpdate/report_io.hpp"
#include "dpdate/sim.hpp"
#include "dpdate/wald.hpp"

using namespace dpdate;

namespace {

struct Options {
  std::string data;
  std::string schema;
  std::string data2;
  std::string schema2;
  std::vector<double> alphas;
  std::vector<std::string> aggregates{"mean"};
  std::string sigma2 = "iid";
  double delta0 = 0.0;
  std::string alt = "two-sided";
  double level = 0.05;
  int reps = 100;
  std::uint64_t seed = 20240101;
  std::string out_dir = ".";
  std::string format = "both";
  bool allow_any_alpha = false;

  // influence
  std::string if_kind = "pre";
  std::string if_path;
  double grid_min = -10.0;
  double grid_max = 10.0;
  int points = 201;
  std::optional<double> point_t;

  // simulate
  int t1 = 100;
  int t2 = 20;
  int n_controls = 2;
  std::string contamination = "none";
  std::vector<std::string> estimators{"hcw", "mean_mdpde", "median_mdpde"};
  bool power = false;
  std::vector<double> deltas;
  int threads = 0;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + fmt(v[i]);
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + v[i];
  return out;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(os.str())));
  return buf;
}

Sigma2Mode parse_sigma2(const std::string& text) {
  if (text == "iid") return Sigma2Mode::iid();
  if (text == "hac") return Sigma2Mode::hac();
  if (text.rfind("hac:", 0) == 0) {
    const std::string lag = text.substr(4);
    char* end = nullptr;
    const long l = std::strtol(lag.c_str(), &end, 10);
    if (lag.empty() || *end != '\0' || l < 0) fail(ErrorCode::UsageError, "bad HAC lag '" + lag + "'");
    return Sigma2Mode::hac(static_cast<int>(l));
  }
  fail(ErrorCode::UsageError, "--sigma2 must be iid, hac or hac:LAG");
}

AggregateKind parse_aggregate(const std::string& text) {
  if (text == "mean") return AggregateKind::Mean;
  if (text == "median") return AggregateKind::Median;
  fail(ErrorCode::UsageError, "--aggregate must be mean or median");
}

void check_alphas(const Options& o) {
  if (o.alphas.empty()) fail(ErrorCode::UsageError, "at least one --alpha is required");
  for (const double a : o.alphas) {
    if (!(a >= 0.0)) fail(ErrorCode::AlphaOutOfRange, "alpha must be nonnegative");
    if (a > 1.0 && !o.allow_any_alpha) {
      fail(ErrorCode::AlphaOutOfRange, "alpha above 1 needs --allow-any-alpha");
    }
  }
  if (!(o.level > 0.0 && o.level < 1.0)) fail(ErrorCode::UsageError, "--level must lie in (0, 1)");
}

PanelDataset load(const std::string& data, const std::string& schema) {
  if (data.empty() || schema.empty()) {
    fail(ErrorCode::UsageError, "--data and --schema are both required");
  }
  return load_panel_csv(data, PanelCsvSchema::from_json_file(schema));
}

Settings base_settings(const Options& o) {
  return {{"alphas", join(o.alphas)}, {"aggregate", join(o.aggregates)},
          {"sigma2", o.sigma2},       {"seed", std::to_string(o.seed)},
          {"allow_any_alpha", o.allow_any_alpha ? "1" : "0"}};
}


std::vector<AteEstimate> estimate_all(const PanelDataset& panel, const Options& o) {
  const Sigma2Mode mode = parse_sigma2(o.sigma2);
  std::vector<AggregateKind> kinds;
  for (const auto& a : o.aggregates) kinds.push_back(parse_aggregate(a));
  FitOptions fit_options;
  fit_options.multistart_seed = o.seed;
  const ErrorDensity f = ErrorDensity::standard_normal();
  std::vector<AteEstimate> out;
  for (const double alpha : o.alphas) {
    const RegressionFit fit = fit_mdpde(panel.pre_design(), alpha, f, fit_options);
    for (const AggregateKind kind : kinds) out.push_back(aggregate_ate(panel, fit, kind, mode, f));
  }
  return out;
}

nlohmann::json effects_json(const PanelDataset& panel, const std::vector<AteEstimate>& est) {
  nlohmann::json arr = nlohmann::json::array();
  std::vector<double> post_times(panel.times.begin() + panel.t1, panel.times.end());
  for (const auto& e : est) {
    arr.push_back({{"alpha", e.alpha},
                   {"aggregate", std::string(to_string(e.aggregate_kind))},
                   {"times", post_times},
                   {"effects", std::vector<double>(e.per_period.begin(), e.per_period.end())},
                   {"beta", std::vector<double>(e.fit.params.beta.begin(), e.fit.params.beta.end())},
                   {"sigma2", e.fit.params.sigma2}});
  }
  return {{"per_period", arr}};
}

void report(const std::vector<std::filesystem::path>& written) {
  for (const auto& p : written) std::cout << p.string() << '\n';
}

int cmd_estimate(const Options& o) {
  check_alphas(o);
  const PanelDataset panel = load(o.data, o.schema);
  const auto est = estimate_all(panel, o);
  Settings s = base_settings(o);
  s.emplace_back("data", file_digest(o.data));
  s.emplace_back("schema", file_digest(o.schema));
  const auto prov = Provenance::make("estimate", s, o.seed, o.alphas);
  report(write_outputs(o.out_dir, "estimate", parse_format(o.format), prov,
                       estimates_table(est), effects_json(panel, est)));
  return 0;
}

int cmd_test(const Options& o) {
  check_alphas(o);
  const Alternative alt = parse_alternative(o.alt);
  const PanelDataset panel = load(o.data, o.schema);
  std::vector<std::pair<AteEstimate, TestResult>> rows;
  for (const auto& e : estimate_all(panel, o)) {
    rows.emplace_back(e, one_sample_test(e, o.delta0, alt, o.level));
  }
  Settings s = base_settings(o);
  s.emplace_back("data", file_digest(o.data));
  s.emplace_back("schema", file_digest(o.schema));
  s.emplace_back("delta0", fmt(o.delta0));
  s.emplace_back("alt", o.alt);
  s.emplace_back("level", fmt(o.level));
  const auto prov = Provenance::make("test", s, o.seed, o.alphas);
  report(write_outputs(o.out_dir, "test", parse_format(o.format), prov,
                       tests_table(rows, o.delta0)));
  return 0;
}

int cmd_two_sample(const Options& o) {
  check_alphas(o);
  const Alternative alt = parse_alternative(o.alt);
  const PanelDataset p1 = load(o.data, o.schema);
  const PanelDataset p2 = load(o.data2, o.schema2.empty() ? o.schema : o.schema2);
  const auto e1 = estimate_all(p1, o);
  const auto e2 = estimate_all(p2, o);
  std::vector<std::tuple<AteEstimate, AteEstimate, TestResult>> rows;
  for (std::size_t i = 0; i < e1.size(); ++i) {
    rows.emplace_back(e1[i], e2[i], two_sample_test(e1[i], e2[i], alt, o.level));
  }
  Settings s = base_settings(o);
  s.emplace_back("data", file_digest(o.data));
  s.emplace_back("data2", file_digest(o.data2));
  s.emplace_back("schema", file_digest(o.schema));
  s.emplace_back("schema2", file_digest(o.schema2.empty() ? o.schema : o.schema2));
  s.emplace_back("alt", o.alt);
  s.emplace_back("level", fmt(o.level));
  const auto prov = Provenance::make("two-sample-test", s, o.seed, o.alphas);
  report(write_outputs(o.out_dir, "two_sample_test", parse_format(o.format), prov,
                       two_sample_table(rows)));
  return 0;
}

int cmd_influence(const Options& o) {
  check_alphas(o);
  if (o.points < 2) fail(ErrorCode::UsageError, "--points must be >= 2");
  if (!(o.grid_min < o.grid_max)) fail(ErrorCode::UsageError, "--grid-min must be below --grid-max");
  InfluenceKind kind;
  if (o.if_kind == "pre") {
    kind = InfluenceKind::Pre;
  } else if (o.if_kind == "post") {
    kind = InfluenceKind::Post;
  } else {
    fail(ErrorCode::UsageError, "--kind must be pre or post");
  }
  const auto grid = linspace(o.grid_min, o.grid_max, static_cast<std::size_t>(o.points));
  std::optional<PanelDataset> panel;
  if (!o.data.empty()) panel = load(o.data, o.schema);

  std::vector<InfluenceCurve> curves;
  FitOptions fit_options;
  fit_options.multistart_seed = o.seed;
  for (const double alpha : o.alphas) {
    InfluenceConfig cfg;
    if (panel) {
      const RegressionFit fit =
          fit_mdpde(panel->pre_design(), alpha, ErrorDensity::standard_normal(), fit_options);
      const Eigen::VectorXd x = panel->post_covariates().colwise().mean().transpose();
      cfg = influence_config_from_fit(*panel, fit, kind, x);
    } else {
      cfg = stylized_influence_config(alpha, o.point_t);
      cfg.kind = kind;
    }
    if (o.if_path == "diagonal") {
      cfg.path = InfluencePath::Diagonal;
    } else if (o.if_path == "response") {
      if (!panel && !o.point_t) fail(ErrorCode::UsageError, "the response path needs --data or --point-t");
      cfg.path = InfluencePath::Response;
    } else if (!o.if_path.empty()) {
      fail(ErrorCode::UsageError, "--path must be response or diagonal");
    }
    curves.push_back(if_curve(cfg, grid));
  }
  Settings s = base_settings(o);
  s.emplace_back("kind", o.if_kind);
  s.emplace_back("path", o.if_path);
  s.emplace_back("point_t", o.point_t ? fmt(*o.point_t) : "none");
  s.emplace_back("grid", fmt(o.grid_min) + ":" + fmt(o.grid_max) + ":" + std::to_string(o.points));
  if (panel) {
    s.emplace_back("data", file_digest(o.data));
    s.emplace_back("schema", file_digest(o.schema));
  }
  const auto prov = Provenance::make("influence", s, o.seed, o.alphas);
  report(write_outputs(o.out_dir, "influence", parse_format(o.format), prov,
                       influence_table(curves)));
  return 0;
}

int cmd_simulate(const Options& o) {
  SimConfig c;
  c.t1 = o.t1;
  c.t2 = o.t2;
  c.n_controls = o.n_controls;
  c.reps = o.reps;
  c.seed = o.seed;
  c.contamination = parse_contamination(o.contamination);
  c.alphas = o.alphas.empty() ? std::vector<double>{0.1, 0.3, 0.5, 0.7, 1.0} : o.alphas;
  c.estimators.clear();
  for (const auto& e : o.estimators) c.estimators.push_back(parse_estimator(e));
  c.sigma2_mode = parse_sigma2(o.sigma2);
  c.threads = o.threads;

  Settings s = {{"t1", std::to_string(c.t1)},
                {"t2", std::to_string(c.t2)},
                {"n_controls", std::to_string(c.n_controls)},
                {"reps", std::to_string(c.reps)},
                {"seed", std::to_string(c.seed)},
                {"contamination", c.contamination.label()},
                {"alphas", join(c.alphas)},
                {"estimators", join(o.estimators)},
                {"sigma2", c.sigma2_mode.label()},
                {"power", o.power ? "1" : "0"}};
  SimReport r;
  if (o.power) {
    const std::vector<double> grid =
        o.deltas.empty() ? std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0} : o.deltas;
    const Alternative alt = parse_alternative(o.alt);
    s.emplace_back("deltas", join(grid));
    s.emplace_back("delta0", fmt(o.delta0));
    s.emplace_back("alt", o.alt);
    s.emplace_back("level", fmt(o.level));
    r = run_power(c, o.delta0, grid, alt, o.level);
  } else {
    r = run_bias_mse(c);
  }
  const auto prov = Provenance::make("simulate", s, c.seed, c.alphas);
  report(write_outputs(o.out_dir, o.power ? "power" : "bias_mse", parse_format(o.format), prov,
                       sim_table(r)));
  return 0;
}

void error_record(std::string_view code, const std::string& message) {
  nlohmann::json j = {{"error", {{"code", code}, {"message", message}}}};
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust treatment-effect estimation with minimum DPD regression"};
  app.set_version_flag("--version", std::string(library_version()));
  app.set_config("--config", "", "TOML/INI file with the same keys as the flags");
  app.require_subcommand(1);
  Options o;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->configurable();
    cmd->add_option("--alpha", o.alphas, "DPD tuning parameter (repeatable)");
    cmd->add_option("--sigma2", o.sigma2, "Post-period variance: iid, hac or hac:LAG");
    cmd->add_option("--seed", o.seed, "Seed for randomized starts and simulations");
    cmd->add_option("--out-dir", o.out_dir, "Output directory");
    cmd->add_option("--format", o.format, "csv, json or both")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    cmd->add_flag("--allow-any-alpha", o.allow_any_alpha, "Accept alpha above 1");
  };
  const auto add_data = [&](CLI::App* cmd) {
    cmd->add_option("--data", o.data, "Panel CSV file");
    cmd->add_option("--schema", o.schema, "JSON schema for the panel CSV");
    cmd->add_option("--aggregate", o.aggregates, "mean or median (repeatable)")
        ->check(CLI::IsMember({"mean", "median"}));
  };
  const auto add_test = [&](CLI::App* cmd) {
    cmd->add_option("--delta0", o.delta0, "Null value of the ATE");
    cmd->add_option("--alt", o.alt, "greater, less or two-sided")
        ->check(CLI::IsMember({"greater", "less", "two-sided"}));
    cmd->add_option("--level", o.level, "Significance level");
  };

  auto* estimate = app.add_subcommand("estimate", "ATE estimates over an alpha grid");
  add_common(estimate);
  add_data(estimate);

  auto* test = app.add_subcommand("test", "One-sample Wald test per alpha");
  add_common(test);
  add_data(test);
  add_test(test);

  auto* two = app.add_subcommand("two-sample-test", "Compare the ATEs of two panels");
  add_common(two);
  add_data(two);
  add_test(two);
  two->add_option("--data2", o.data2, "Second panel CSV")->required();
  two->add_option("--schema2", o.schema2, "Schema for the second panel (defaults to --schema)");

  auto* infl = app.add_subcommand("influence", "Influence-function curves");
  add_common(infl);
  infl->add_option("--data", o.data, "Panel CSV (omit for the stylized preset)");
  infl->add_option("--schema", o.schema, "JSON schema for the panel CSV");
  infl->add_option("--kind", o.if_kind, "pre or post");
  infl->add_option("--path", o.if_path, "response or diagonal");
  infl->add_option("--grid-min", o.grid_min, "Lower end of the swept grid");
  infl->add_option("--grid-max", o.grid_max, "Upper end of the swept grid");
  infl->add_option("--points", o.points, "Grid points");
  infl->add_option("--point-t", o.point_t, "Hold the stylized covariate at (t, t) and sweep the response");

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo bias/MSE or power study");
  add_common(sim);
  add_test(sim);
  sim->add_option("--reps", o.reps, "Replications");
  sim->add_option("--t1", o.t1, "Pre-treatment periods");
  sim->add_option("--t2", o.t2, "Post-treatment periods");
  sim->add_option("--n-controls", o.n_controls, "Control units");
  sim->add_option("--contamination", o.contamination, "none, pre:RATE or post:RATE");
  sim->add_option("--estimator", o.estimators, "hcw, mean_mdpde, median_mdpde (repeatable)");
  sim->add_flag("--power", o.power, "Empirical power instead of bias/MSE");
  sim->add_option("--delta", o.deltas, "Power-curve grid point (repeatable)");
  sim->add_option("--threads", o.threads, "Worker threads (default: DPDATE_THREADS)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_record(e.get_name() == "ConfigError" ? "ConfigError" : "UsageError", e.what());
    return 2;
  }

  try {
    if (*estimate) return cmd_estimate(o);
    if (*test) return cmd_test(o);
    if (*two) return cmd_two_sample(o);
    if (*infl) return cmd_influence(o);
    return cmd_simulate(o);
  } catch (const Error& e) {
    error_record(to_string(e.code()), e.what());
    const bool usage = e.code() == ErrorCode::UsageError || e.code() == ErrorCode::ConfigError;
    return usage ? 2 : 1;
  } catch (const std::exception& e) {
    error_record("InternalError", e.what());
    return 1;
  }
}
