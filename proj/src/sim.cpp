#include "dpdate/sim.hpp"

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "dpdate/errors.hpp"
#include "dpdate/rng.hpp"

namespace dpdate {

namespace {

constexpr std::uint64_t kStreamFactor = 0;
constexpr std::uint64_t kStreamEffect = 1;
constexpr std::uint64_t kStreamContamination = 2;

struct CellSpec {
  EstimatorKind estimator;
  double alpha;
  std::size_t fit_index;
};

struct Plan {
  std::vector<double> fit_alphas;  // distinct alphas that need a regression fit
  std::vector<CellSpec> cells;
};

std::size_t fit_slot(std::vector<double>& alphas, double alpha) {
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (alphas[i] == alpha) return i;
  }
  alphas.push_back(alpha);
  return alphas.size() - 1;
}

Plan make_plan(const SimConfig& config) {
  Plan plan;
  for (const EstimatorKind kind : config.estimators) {
    if (kind == EstimatorKind::Hcw) {
      plan.cells.push_back({kind, 0.0, fit_slot(plan.fit_alphas, 0.0)});
      continue;
    }
    for (const double a : config.alphas) {
      plan.cells.push_back({kind, a, fit_slot(plan.fit_alphas, a)});
    }
  }
  return plan;
}

AggregateKind aggregate_of(EstimatorKind kind) {
  return kind == EstimatorKind::MedianMdpde ? AggregateKind::Median : AggregateKind::Mean;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Fits every alpha once and aggregates each cell around the shared fit.
// Failed fits leave NaN in the cell's slot.
std::vector<AteEstimate> replicate_estimates(const SimConfig& config, const Plan& plan,
                                             const PanelDataset& panel,
                                             std::vector<bool>& ok) {
  const ErrorDensity f = ErrorDensity::standard_normal();
  const DesignResponse data = panel.pre_design();
  std::vector<std::optional<RegressionFit>> fits(plan.fit_alphas.size());
  for (std::size_t i = 0; i < fits.size(); ++i) {
    try {
      RegressionFit fit = fit_mdpde(data, plan.fit_alphas[i], f);
      if (fit.converged) fits[i] = std::move(fit);
    } catch (const Error&) {
    }
  }
  std::vector<AteEstimate> out(plan.cells.size());
  ok.assign(plan.cells.size(), false);
  for (std::size_t c = 0; c < plan.cells.size(); ++c) {
    const auto& fit = fits[plan.cells[c].fit_index];
    if (!fit) continue;
    try {
      out[c] = aggregate_ate(panel, *fit, aggregate_of(plan.cells[c].estimator),
                             config.sigma2_mode, f);
      ok[c] = true;
    } catch (const Error&) {
    }
  }
  return out;
}

template <typename Body>
void for_each_rep(int reps, int threads, bool parallel, Body&& body) {
  if (!parallel) {
    for (int r = 0; r < reps; ++r) body(r);
    return;
  }
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (int r = 0; r < reps; ++r) body(r);
}

SimReport bias_mse_impl(const SimConfig& config, bool parallel) {
  config.validate();
  const Plan plan = make_plan(config);
  const std::size_t n_cells = plan.cells.size();
  const auto reps = static_cast<std::size_t>(config.reps);
  // slots[r * n_cells + c] = estimate - true_ate, NaN on failure
  std::vector<double> slots(reps * n_cells, kNaN);

  for_each_rep(config.reps, resolve_threads(config.threads), parallel, [&](int r) {
    const GeneratedPanel gen = gen_panel(config, r);
    std::vector<bool> ok;
    const auto est = replicate_estimates(config, plan, gen.panel, ok);
    for (std::size_t c = 0; c < n_cells; ++c) {
      if (ok[c]) slots[static_cast<std::size_t>(r) * n_cells + c] = est[c].value - gen.true_ate;
    }
  });

  SimReport report;
  report.config = config;
  for (std::size_t c = 0; c < n_cells; ++c) {
    SimCell cell;
    cell.estimator = plan.cells[c].estimator;
    cell.alpha = plan.cells[c].alpha;
    double sum = 0.0;
    double sumsq = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const double e = slots[r * n_cells + c];
      if (std::isnan(e)) {
        ++cell.failures;
        continue;
      }
      ++cell.reps_used;
      sum += e;
      sumsq += e * e;
    }
    if (cell.reps_used > 0) {
      cell.bias = sum / cell.reps_used;
      cell.mse = sumsq / cell.reps_used;
      double centered = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const double e = slots[r * n_cells + c];
        if (!std::isnan(e)) centered += (e - cell.bias) * (e - cell.bias);
      }
      cell.error_variance = cell.reps_used > 1 ? centered / (cell.reps_used - 1) : 0.0;
    }
    report.cells.push_back(std::move(cell));
  }
  return report;
}

SimReport power_impl(const SimConfig& config, double delta0,
                     const std::vector<double>& delta_grid, Alternative alt, double level,
                     bool parallel) {
  config.validate();
  if (delta_grid.empty()) fail(ErrorCode::ConfigError, "power run needs a delta grid");
  if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::ConfigError, "level must lie in (0, 1)");
  const Plan plan = make_plan(config);
  const std::size_t n_cells = plan.cells.size();
  const std::size_t n_grid = delta_grid.size();
  const auto reps = static_cast<std::size_t>(config.reps);
  // -1 failure, 0 accept, 1 reject
  std::vector<signed char> slots(reps * n_grid * n_cells, -1);

  for_each_rep(config.reps, resolve_threads(config.threads), parallel, [&](int r) {
    for (std::size_t g = 0; g < n_grid; ++g) {
      const GeneratedPanel gen = gen_panel(config, r, delta_grid[g] - kBaselineEffect);
      std::vector<bool> ok;
      const auto est = replicate_estimates(config, plan, gen.panel, ok);
      for (std::size_t c = 0; c < n_cells; ++c) {
        if (!ok[c]) continue;
        try {
          const TestResult t = one_sample_test(est[c], delta0, alt, level);
          slots[(static_cast<std::size_t>(r) * n_grid + g) * n_cells + c] = t.reject ? 1 : 0;
        } catch (const Error&) {
        }
      }
    }
  });

  SimReport report;
  report.config = config;
  report.is_power = true;
  report.delta_grid = delta_grid;
  report.delta0 = delta0;
  report.alternative = alt;
  report.level = level;
  for (std::size_t c = 0; c < n_cells; ++c) {
    SimCell cell;
    cell.estimator = plan.cells[c].estimator;
    cell.alpha = plan.cells[c].alpha;
    int min_used = config.reps;
    int failures = 0;
    for (std::size_t g = 0; g < n_grid; ++g) {
      int used = 0;
      int rejected = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        const signed char s = slots[(r * n_grid + g) * n_cells + c];
        if (s < 0) continue;
        ++used;
        rejected += s;
      }
      failures += config.reps - used;
      min_used = std::min(min_used, used);
      cell.rejection_rates.push_back(used > 0 ? static_cast<double>(rejected) / used : kNaN);
    }
    cell.reps_used = min_used;
    cell.failures = failures;
    report.cells.push_back(std::move(cell));
  }
  return report;
}

}  // namespace

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Hcw: return "hcw";
    case EstimatorKind::MeanMdpde: return "mean_mdpde";
    case EstimatorKind::MedianMdpde: return "median_mdpde";
  }
  return "unknown";
}

EstimatorKind parse_estimator(std::string_view text) {
  if (text == "hcw") return EstimatorKind::Hcw;
  if (text == "mean_mdpde" || text == "mean") return EstimatorKind::MeanMdpde;
  if (text == "median_mdpde" || text == "median") return EstimatorKind::MedianMdpde;
  fail(ErrorCode::ConfigError, "unknown estimator '" + std::string(text) + "'");
}

std::string Contamination::label() const {
  if (where == Where::None) return "none";
  std::ostringstream os;
  os << (where == Where::Pre ? "pre:" : "post:") << rate;
  return os.str();
}

Contamination parse_contamination(std::string_view text) {
  if (text == "none") return Contamination::none();
  const auto colon = text.find(':');
  const std::string_view where = text.substr(0, colon);
  if (where != "pre" && where != "post") {
    fail(ErrorCode::ConfigError, "contamination must be none, pre:RATE or post:RATE");
  }
  double rate = 0.2;
  if (colon != std::string_view::npos) {
    const std::string r(text.substr(colon + 1));
    char* end = nullptr;
    rate = std::strtod(r.c_str(), &end);
    if (r.empty() || *end != '\0') fail(ErrorCode::ConfigError, "bad contamination rate '" + r + "'");
  }
  Contamination c = where == "pre" ? Contamination::pre(rate) : Contamination::post(rate);
  if (!(rate > 0.0 && rate < 1.0)) fail(ErrorCode::ConfigError, "contamination rate must lie in (0, 1)");
  return c;
}

void SimConfig::validate() const {
  if (reps < 1) fail(ErrorCode::ConfigError, "reps must be >= 1");
  if (n_controls < 1) fail(ErrorCode::ConfigError, "n_controls must be >= 1");
  if (t1 < n_controls + 3) fail(ErrorCode::ConfigError, "t1 too small for the design");
  if (t2 < 2) fail(ErrorCode::ConfigError, "t2 must be >= 2");
  if (contamination.where != Contamination::Where::None &&
      !(contamination.rate > 0.0 && contamination.rate < 1.0)) {
    fail(ErrorCode::ConfigError, "contamination rate must lie in (0, 1)");
  }
  if (estimators.empty()) fail(ErrorCode::ConfigError, "no estimators selected");
  for (const EstimatorKind k : estimators) {
    if (k != EstimatorKind::Hcw && alphas.empty()) {
      fail(ErrorCode::ConfigError, "MDPDE estimators need at least one alpha");
    }
  }
  for (const double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) fail(ErrorCode::ConfigError, "alpha outside [0, 1]");
  }
}

GeneratedPanel gen_panel(const SimConfig& config, int rep, double effect_shift) {
  const int T = config.t1 + config.t2;
  const int N = config.n_controls + 1;
  const auto r = static_cast<std::uint64_t>(rep);

  RandomStream base(config.seed, r, kStreamFactor);
  Eigen::MatrixXd y(T, N);
  Eigen::VectorXd u_treated(T);
  double f = std::sqrt(4.0 / 3.0) * base.normal();
  for (int t = 0; t < T; ++t) {
    f = 0.5 * f + base.normal();
    for (int i = 0; i < N; ++i) {
      const double u = base.normal();
      if (i == 0) u_treated(t) = u;
      y(t, i) = 1.0 + f + u;
    }
  }

  RandomStream effect(config.seed, r, kStreamEffect);
  double z = std::sqrt(1.0 / 3.0) * effect.normal();
  double effect_sum = 0.0;
  for (int t = config.t1; t < T; ++t) {
    z = 0.5 * z + 0.5 * effect.normal();
    const double delta = 1.0 / (1.0 + std::exp(-z)) + 1.0 + effect_shift;
    y(t, 0) += delta;
    effect_sum += delta;
  }

  GeneratedPanel out;
  if (config.contamination.where != Contamination::Where::None) {
    RandomStream cont(config.seed, r, kStreamContamination);
    const bool pre = config.contamination.where == Contamination::Where::Pre;
    const int period = pre ? config.t1 : config.t2;
    const int offset = pre ? 0 : config.t1;
    const auto k = static_cast<std::size_t>(std::lround(config.contamination.rate * period));
    for (const std::size_t idx : cont.sample_without_replacement(period, k)) {
      const auto row = static_cast<Eigen::Index>(offset + idx);
      // Swap the clean idiosyncratic draw for an outlying one: u ~ N(5, 1).
      y(row, 0) += cont.normal(5.0, 1.0) - u_treated(row);
      out.contaminated.push_back(static_cast<std::size_t>(row));
    }
  }
  out.true_ate = effect_sum / config.t2;
  out.panel = PanelDataset::make(y.col(0), y.rightCols(N - 1), config.t1);
  return out;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DPDATE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return omp_get_max_threads();
}

SimReport run_bias_mse(const SimConfig& config) { return bias_mse_impl(config, true); }
SimReport run_bias_mse_serial(const SimConfig& config) { return bias_mse_impl(config, false); }

SimReport run_power(const SimConfig& config, double delta0,
                    const std::vector<double>& delta_grid, Alternative alt, double level) {
  return power_impl(config, delta0, delta_grid, alt, level, true);
}

SimReport run_power_serial(const SimConfig& config, double delta0,
                           const std::vector<double>& delta_grid, Alternative alt,
                           double level) {
  return power_impl(config, delta0, delta_grid, alt, level, false);
}

}  // namespace dpdate
