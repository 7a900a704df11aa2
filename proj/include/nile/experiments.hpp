#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nile/estimator.hpp"
#include "nile/scm.hpp"

namespace nile {

struct ExperimentConfig {
  std::array<double, 3> alphas = {0.0, 0.0, 1.0};  // (alpha_A, alpha_H, alpha_eps)
  int n = 200;
  int n_models = 100;
  std::vector<double> intervention_strengths;  // empty -> 0, 0.1, ..., 2
  int eval_grid_points = 1001;
  bool run_nile = true;
  bool run_ols_spline = true;
  double kappa = 0.0;  // curvature violation of the linear-tail assumption
  std::uint64_t master_seed = 1;
  NileOptions nile_options;
};

struct RiskRow {
  std::string config_id;
  std::string method;
  int model_idx = 0;
  double strength = 0.0;
  double risk = 0.0;
  double lambda_star = 0.0;
};

struct RiskSummaryRow {
  std::string config_id;
  std::string method;
  double strength = 0.0;
  double mean_risk = 0.0;
  int n_models = 0;
  double mean_lambda_star = 0.0;
};

/// noise_var + max over an odd symmetric grid on [-x_max, x_max] of
/// (f_true - f_hat)^2; nondecreasing in x_max for nested grids.
double worst_case_risk(const std::function<double(double)>& f_hat,
                       const std::function<double(double)>& f_true, double x_max,
                       int grid_points, double noise_var);

struct ExperimentResult {
  std::vector<RiskRow> rows;
  int failed_fits = 0;
};

/// One dataset per model, per-model RNG substream (master_seed, model index);
/// fit errors are recorded as missing rows unless more than 10% of fits fail.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::vector<RiskSummaryRow> summarize(const std::vector<RiskRow>& rows);

std::string risk_rows_to_csv(const std::vector<RiskRow>& rows);
std::string summary_to_csv(const std::vector<RiskSummaryRow>& rows);

std::vector<double> default_strengths();
std::string config_id(const ExperimentConfig& config);

}  // namespace nile
