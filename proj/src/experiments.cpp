#include "nile/experiments.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nile/dataset.hpp"

namespace nile {

std::vector<double> default_strengths() {
  std::vector<double> strengths;
  for (int i = 0; i <= 20; ++i) strengths.push_back(0.1 * i);
  return strengths;
}

std::string config_id(const ExperimentConfig& config) {
  std::ostringstream id;
  id << "aA" << config.alphas[0] << "_aH" << config.alphas[1] << "_aE"
     << config.alphas[2];
  if (config.kappa > 0.0) id << "_kappa" << config.kappa;
  return id.str();
}

double worst_case_risk(const std::function<double(double)>& f_hat,
                       const std::function<double(double)>& f_true, double x_max,
                       int grid_points, double noise_var) {
  if (x_max < 0.0) throw std::invalid_argument("worst_case_risk: x_max must be >= 0");
  if (grid_points < 2) throw std::invalid_argument("worst_case_risk: needs >= 2 points");
  double sup = 0.0;
  for (int g = 0; g < grid_points; ++g) {
    const double x = -x_max + 2.0 * x_max * g / (grid_points - 1);
    const double d = f_true(x) - f_hat(x);
    sup = std::max(sup, d * d);
  }
  return noise_var + sup;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const auto& [alpha_A, alpha_H, alpha_eps] = config.alphas;
  if (config.n_models < 1)
    throw std::invalid_argument("run_experiment: n_models must be >= 1");
  const std::vector<double> strengths =
      config.intervention_strengths.empty() ? default_strengths()
                                            : config.intervention_strengths;
  const std::string id = config_id(config);

  ExperimentResult result;
  int attempted = 0;
  for (int j = 0; j < config.n_models; ++j) {
    Rng rng = substream(config.master_seed, static_cast<std::uint64_t>(j));
    ScmModel model;
    model.alpha_A = alpha_A;
    model.alpha_H = alpha_H;
    model.alpha_eps = alpha_eps;
    model.causal_fn = sample_causal_fn(rng, alpha_A, alpha_H, alpha_eps);
    if (config.kappa > 0.0)
      model.causal_fn = curvature_violation(model.causal_fn, config.kappa, rng);
    const Dataset data = sample_data(model, config.n, rng);
    const auto f_true = [&model](double x) { return model.causal_fn(x); };

    struct Method {
      std::string name;
      bool force_lambda_zero;
    };
    std::vector<Method> methods;
    if (config.run_nile) methods.push_back({"nile", false});
    if (config.run_ols_spline) methods.push_back({"ols_spline", true});

    for (const Method& method : methods) {
      ++attempted;
      NileOptions options = config.nile_options;
      options.seed = config.master_seed + static_cast<std::uint64_t>(j);
      options.force_lambda_zero = method.force_lambda_zero;
      NileFit fit;
      try {
        fit = nile_fit(data, options);
      } catch (const std::exception&) {
        ++result.failed_fits;
        continue;
      }
      const auto f_hat = [&fit](double x) { return predict(fit, x); };
      for (const double strength : strengths) {
        RiskRow row;
        row.config_id = id;
        row.method = method.name;
        row.model_idx = j;
        row.strength = strength;
        row.risk = worst_case_risk(f_hat, f_true, strength, config.eval_grid_points,
                                   kXiYVariance);
        row.lambda_star = fit.lambda_star;
        result.rows.push_back(row);
      }
    }
  }
  if (result.failed_fits * 10 > attempted)
    throw std::runtime_error("run_experiment: more than 10% of fits failed");
  return result;
}

std::vector<RiskSummaryRow> summarize(const std::vector<RiskRow>& rows) {
  // deterministic reduction in row order (rows are already ordered by model)
  std::vector<RiskSummaryRow> summary;
  const auto find = [&summary](const RiskRow& row) -> RiskSummaryRow& {
    for (auto& s : summary) {
      if (s.config_id == row.config_id && s.method == row.method &&
          s.strength == row.strength)
        return s;
    }
    summary.push_back({row.config_id, row.method, row.strength, 0.0, 0, 0.0});
    return summary.back();
  };
  for (const RiskRow& row : rows) {
    RiskSummaryRow& s = find(row);
    s.mean_risk += row.risk;
    s.mean_lambda_star += std::isinf(row.lambda_star) ? 0.0 : row.lambda_star;
    s.n_models += 1;
  }
  for (auto& s : summary) {
    if (s.n_models > 0) {
      s.mean_risk /= s.n_models;
      s.mean_lambda_star /= s.n_models;
    }
  }
  return summary;
}

std::string risk_rows_to_csv(const std::vector<RiskRow>& rows) {
  std::ostringstream out;
  out << "config_id,method,model_idx,strength,risk,lambda_star\n";
  for (const auto& r : rows) {
    out << r.config_id << ',' << r.method << ',' << r.model_idx << ','
        << format_double(r.strength) << ',' << format_double(r.risk) << ','
        << format_double(r.lambda_star) << '\n';
  }
  return out.str();
}

std::string summary_to_csv(const std::vector<RiskSummaryRow>& rows) {
  std::ostringstream out;
  out << "config_id,method,strength,mean_risk,n_models,mean_lambda_star\n";
  for (const auto& r : rows) {
    out << r.config_id << ',' << r.method << ',' << format_double(r.strength) << ','
        << format_double(r.mean_risk) << ',' << r.n_models << ','
        << format_double(r.mean_lambda_star) << '\n';
  }
  return out.str();
}

}  // namespace nile
