#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpdate/ate.hpp"
#include "dpdate/wald.hpp"

namespace dpdate {

enum class EstimatorKind { Hcw, MeanMdpde, MedianMdpde };

std::string_view to_string(EstimatorKind kind);
EstimatorKind parse_estimator(std::string_view text);

struct Contamination {
  enum class Where { None, Pre, Post };
  Where where = Where::None;
  double rate = 0.0;

  static Contamination none() { return {}; }
  static Contamination pre(double rate) { return {Where::Pre, rate}; }
  static Contamination post(double rate) { return {Where::Post, rate}; }

  std::string label() const;
};

Contamination parse_contamination(std::string_view text);

struct SimConfig {
  int t1 = 100;
  int t2 = 20;
  int n_controls = 2;
  int reps = 100;
  std::uint64_t seed = 20240101;
  Contamination contamination;
  std::vector<double> alphas{0.1, 0.3, 0.5, 0.7, 1.0};
  std::vector<EstimatorKind> estimators{EstimatorKind::Hcw, EstimatorKind::MeanMdpde,
                                        EstimatorKind::MedianMdpde};
  Sigma2Mode sigma2_mode = Sigma2Mode::iid();
  /// Worker threads; 0 reads DPDATE_THREADS and falls back to the OpenMP default.
  int threads = 0;

  /// Throws ConfigError on an invalid configuration.
  void validate() const;
};

struct GeneratedPanel {
  PanelDataset panel;
  double true_ate = 0.0;
  std::vector<std::size_t> contaminated;  // row indices
};

/// One replication of the factor DGP. `effect_shift` is added to every
/// per-period treatment effect.
GeneratedPanel gen_panel(const SimConfig& config, int rep, double effect_shift = 0.0);

struct SimCell {
  EstimatorKind estimator = EstimatorKind::Hcw;
  double alpha = 0.0;
  double bias = 0.0;
  double mse = 0.0;
  /// Sample variance (n - 1 denominator) of estimate - true_ate.
  double error_variance = 0.0;
  int reps_used = 0;
  int failures = 0;
  std::vector<double> rejection_rates;  // power runs only
};

struct SimReport {
  SimConfig config;
  std::vector<SimCell> cells;
  // Power runs only.
  std::vector<double> delta_grid;
  double delta0 = 0.0;
  Alternative alternative = Alternative::TwoSided;
  double level = 0.05;
  bool is_power = false;
};

/// Thread count used when SimConfig::threads == 0.
int resolve_threads(int requested);

SimReport run_bias_mse(const SimConfig& config);
SimReport run_power(const SimConfig& config, double delta0,
                    const std::vector<double>& delta_grid,
                    Alternative alt = Alternative::TwoSided, double level = 0.05);

/// Single-threaded references with identical results.
SimReport run_bias_mse_serial(const SimConfig& config);
SimReport run_power_serial(const SimConfig& config, double delta0,
                           const std::vector<double>& delta_grid,
                           Alternative alt = Alternative::TwoSided, double level = 0.05);

/// Mean of logistic(z) + 1 under the stationary z distribution.
inline constexpr double kBaselineEffect = 1.5;

}  // namespace dpdate
