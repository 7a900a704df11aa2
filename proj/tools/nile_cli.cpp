#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nile/dataset.hpp"
#include "nile/estimator.hpp"
#include "nile/experiments.hpp"
#include "nile/minimax.hpp"
#include "nile/scm.hpp"

namespace {

using KeyValues = std::map<std::string, std::string>;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Flat `key = value` lines; `#` starts a comment. Keys outside `valid_keys`
// are rejected with the full list of accepted keys.
KeyValues read_config(const std::string& path, const std::vector<std::string>& valid_keys) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  KeyValues kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(valid_keys.begin(), valid_keys.end(), key) == valid_keys.end()) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": unknown key `" << key << "`; valid keys:";
      for (const auto& k : valid_keys) msg << ' ' << k;
      throw std::runtime_error(msg.str());
    }
    kv[key] = value;
  }
  return kv;
}

double to_double(const KeyValues& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  size_t pos = 0;
  const double v = std::stod(it->second, &pos);
  if (pos != it->second.size())
    throw std::runtime_error("config key `" + key + "`: not a number: " + it->second);
  return v;
}

long long to_int(const KeyValues& kv, const std::string& key, long long fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  size_t pos = 0;
  const long long v = std::stoll(it->second, &pos);
  if (pos != it->second.size())
    throw std::runtime_error("config key `" + key + "`: not an integer: " + it->second);
  return v;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
}

void emit(const std::optional<std::string>& out_path, const std::string& text) {
  if (out_path)
    write_text(*out_path, text);
  else
    std::cout << text;
}

nile::TestKind parse_test_kind(const std::string& name) {
  if (name == "t1") return nile::TestKind::T1;
  if (name == "t2") return nile::TestKind::T2;
  throw std::runtime_error("unknown test kind `" + name + "`; expected t1 or t2");
}

struct CommonOptions {
  std::optional<int> k;
  std::optional<double> alpha;
  std::optional<std::string> test;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda_cap;
  std::optional<std::string> out;

  void attach(CLI::App* cmd) {
    cmd->add_option("--k", k, "number of spline basis functions");
    cmd->add_option("--alpha", alpha, "test level");
    cmd->add_option("--test", test, "orthogonality test statistic")
        ->check(CLI::IsMember({"t1", "t2"}));
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--lambda-cap", lambda_cap, "upper bracket for the lambda search");
    cmd->add_option("--out", out, "output file (default: standard output)");
  }

  void apply(nile::NileOptions& options) const {
    if (k) options.k = *k;
    if (alpha) options.alpha = *alpha;
    if (test) options.test_kind = parse_test_kind(*test);
    if (seed) options.seed = *seed;
    if (lambda_cap) options.lambda_cap = *lambda_cap;
  }
};

int cmd_fit(const std::string& data_path, const CommonOptions& common) {
  const nile::Dataset data = nile::read_dataset_csv(data_path);
  nile::NileOptions options;
  common.apply(options);
  const nile::NileFit fit = nile::nile_fit(data, options);

  if (common.out) nile::write_fit(fit, *common.out);
  std::cout << "k = " << fit.basis_B.k << '\n'
            << "gamma = " << nile::format_double(fit.gamma) << '\n'
            << "delta = " << nile::format_double(fit.delta) << '\n'
            << "lambda_star = "
            << (fit.fallback_used ? "infinity" : nile::format_double(fit.lambda_star))
            << '\n'
            << "fallback_used = " << (fit.fallback_used ? "true" : "false") << '\n'
            << "test_statistic = " << nile::format_double(fit.test_at_solution.statistic)
            << '\n';
  if (!common.out) std::cout << nile::serialize_fit(fit) << '\n';
  return 0;
}

int cmd_predict(const std::string& fit_path, const std::string& grid_spec,
                const std::vector<double>& xs, const CommonOptions& common) {
  const nile::NileFit fit = nile::read_fit(fit_path);
  std::vector<double> points = xs;
  if (!grid_spec.empty()) {
    double lo, hi, step;
    char c1, c2;
    std::istringstream spec(grid_spec);
    if (!(spec >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' ||
        step <= 0.0 || hi < lo)
      throw std::runtime_error("bad grid spec `" + grid_spec + "`; expected lo:hi:step");
    // inclusive endpoints up to rounding in the step count
    const int count = static_cast<int>(std::llround((hi - lo) / step)) + 1;
    for (int i = 0; i < count; ++i) points.push_back(lo + i * step);
  }
  if (points.empty())
    throw std::runtime_error("predict: give --grid lo:hi:step and/or --x values");

  std::ostringstream csv;
  csv << "x,f_hat\n";
  for (const double x : points)
    csv << nile::format_double(x) << ',' << nile::format_double(nile::predict(fit, x))
        << '\n';
  emit(common.out, csv.str());
  return 0;
}

const std::vector<std::string> kSimulateKeys = {
    "alpha_A", "alpha_H", "alpha_eps", "n",    "seed",
    "kappa",   "intervention", "intervention_value"};

int cmd_simulate(const std::string& config_path, const CommonOptions& common) {
  const KeyValues kv =
      config_path.empty() ? KeyValues{} : read_config(config_path, kSimulateKeys);
  const double alpha_A = to_double(kv, "alpha_A", std::sqrt(1.0 / 3.0));
  const double alpha_H = to_double(kv, "alpha_H", std::sqrt(2.0 / 3.0));
  const double alpha_eps = to_double(kv, "alpha_eps", 0.0);
  const int n = static_cast<int>(to_int(kv, "n", 200));
  std::uint64_t seed = static_cast<std::uint64_t>(to_int(kv, "seed", 1));
  if (common.seed) seed = *common.seed;
  const double kappa = to_double(kv, "kappa", 0.0);

  nile::Rng rng = nile::substream(seed, 0);
  nile::ScmModel model;
  model.alpha_A = alpha_A;
  model.alpha_H = alpha_H;
  model.alpha_eps = alpha_eps;
  model.causal_fn = nile::sample_causal_fn(rng, alpha_A, alpha_H, alpha_eps);
  if (kappa > 0.0) model.causal_fn = nile::curvature_violation(model.causal_fn, kappa, rng);

  nile::Dataset data;
  const auto it = kv.find("intervention");
  if (it == kv.end() || it->second == "none") {
    data = nile::sample_data(model, n, rng);
  } else {
    nile::InterventionSpec spec;
    if (it->second == "hard_on_X")
      spec.kind = nile::InterventionSpec::Kind::hard_on_X;
    else if (it->second == "shift_on_X")
      spec.kind = nile::InterventionSpec::Kind::shift_on_X;
    else if (it->second == "hard_on_A")
      spec.kind = nile::InterventionSpec::Kind::hard_on_A;
    else if (it->second == "confounding_scale")
      spec.kind = nile::InterventionSpec::Kind::confounding_scale;
    else
      throw std::runtime_error("unknown intervention `" + it->second +
                               "`; expected none, hard_on_X, shift_on_X, hard_on_A "
                               "or confounding_scale");
    spec.value = to_double(kv, "intervention_value", 0.0);
    data = nile::apply_intervention(model, spec, n, rng);
  }
  emit(common.out, nile::dataset_to_csv(data));
  return 0;
}

const std::vector<std::string> kExperimentKeys = {
    "alpha_A", "alpha_H",  "alpha_eps",        "n",          "n_models",
    "kappa",   "master_seed", "eval_grid_points", "k",       "alpha",
    "test",    "lambda_cap",  "strength_max",     "strength_step"};

nile::ExperimentConfig experiment_config_from(const KeyValues& kv,
                                              const CommonOptions& common) {
  nile::ExperimentConfig config;
  config.alphas = {to_double(kv, "alpha_A", config.alphas[0]),
                   to_double(kv, "alpha_H", config.alphas[1]),
                   to_double(kv, "alpha_eps", config.alphas[2])};
  config.n = static_cast<int>(to_int(kv, "n", config.n));
  config.n_models = static_cast<int>(to_int(kv, "n_models", config.n_models));
  config.kappa = to_double(kv, "kappa", config.kappa);
  config.master_seed =
      static_cast<std::uint64_t>(to_int(kv, "master_seed", static_cast<long long>(
                                                               config.master_seed)));
  config.eval_grid_points =
      static_cast<int>(to_int(kv, "eval_grid_points", config.eval_grid_points));
  config.nile_options.k = static_cast<int>(to_int(kv, "k", config.nile_options.k));
  config.nile_options.alpha = to_double(kv, "alpha", config.nile_options.alpha);
  if (kv.count("test")) config.nile_options.test_kind = parse_test_kind(kv.at("test"));
  config.nile_options.lambda_cap =
      to_double(kv, "lambda_cap", config.nile_options.lambda_cap);
  const double s_max = to_double(kv, "strength_max", 2.0);
  const double s_step = to_double(kv, "strength_step", 0.1);
  if (s_step <= 0.0 || s_max < 0.0)
    throw std::runtime_error("strength_max/strength_step must be positive");
  config.intervention_strengths.clear();
  for (double s = 0.0; s <= s_max + 1e-12; s += s_step)
    config.intervention_strengths.push_back(s);
  common.apply(config.nile_options);
  if (common.seed) config.master_seed = *common.seed;
  return config;
}

int cmd_experiment(const std::string& config_path, const std::string& rows_path,
                   const CommonOptions& common) {
  std::vector<nile::ExperimentConfig> configs;
  if (config_path.empty()) {
    // the three confounding regimes: none, balanced, strong
    const double r13 = std::sqrt(1.0 / 3.0);
    const double r23 = std::sqrt(2.0 / 3.0);
    for (const std::array<double, 3> alphas :
         {std::array<double, 3>{r23, 0.0, r13}, std::array<double, 3>{r13, r13, r13},
          std::array<double, 3>{r13, r23, 0.0}}) {
      nile::ExperimentConfig config = experiment_config_from({}, common);
      config.alphas = alphas;
      configs.push_back(config);
    }
  } else {
    configs.push_back(
        experiment_config_from(read_config(config_path, kExperimentKeys), common));
  }

  std::vector<nile::RiskRow> all_rows;
  int failed = 0;
  for (const auto& config : configs) {
    const nile::ExperimentResult result = nile::run_experiment(config);
    failed += result.failed_fits;
    all_rows.insert(all_rows.end(), result.rows.begin(), result.rows.end());
  }
  if (!rows_path.empty()) write_text(rows_path, nile::risk_rows_to_csv(all_rows));
  emit(common.out, nile::summary_to_csv(nile::summarize(all_rows)));
  if (failed > 0) std::cerr << "warning: " << failed << " fit(s) failed\n";
  return 0;
}

int cmd_check_theory(const CommonOptions& common) {
  const std::uint64_t seed = common.seed ? *common.seed : 7;
  const std::vector<nile::ScenarioResult> results = nile::run_theory_suite(seed);
  emit(common.out, nile::scenario_results_to_csv(results));
  int failures = 0;
  for (const auto& r : results) {
    if (!r.pass) {
      ++failures;
      std::cerr << "scenario failed: " << r.scenario << '\n';
    }
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NILE: nonlinear IV regression with linear extrapolation"};
  app.require_subcommand(1);

  CommonOptions fit_opts, predict_opts, sim_opts, exp_opts, theory_opts;

  std::string fit_data;
  CLI::App* fit = app.add_subcommand("fit", "fit the estimator to a CSV of (x, y, a)");
  fit->add_option("data", fit_data, "input CSV with header x,y,a")->required();
  fit_opts.attach(fit);

  std::string predict_fit, predict_grid;
  std::vector<double> predict_xs;
  CLI::App* predict =
      app.add_subcommand("predict", "evaluate a fit artifact on a grid or points");
  predict->add_option("fit", predict_fit, "fit artifact path")->required();
  predict->add_option("--grid", predict_grid, "evaluation grid lo:hi:step");
  predict->add_option("--x", predict_xs, "explicit evaluation points");
  predict_opts.attach(predict);

  std::string sim_config;
  CLI::App* simulate =
      app.add_subcommand("simulate", "draw a dataset from the simulation model");
  simulate->add_option("--config", sim_config, "key = value config file");
  sim_opts.attach(simulate);

  std::string exp_config, exp_rows;
  CLI::App* experiment =
      app.add_subcommand("experiment", "risk curves for NILE and the spline baseline");
  experiment->add_option("--config", exp_config, "key = value config file");
  experiment->add_option("--rows", exp_rows, "also write the per-model row CSV here");
  exp_opts.attach(experiment);

  CLI::App* theory =
      app.add_subcommand("check-theory", "closed-form and bound verification suite");
  theory_opts.attach(theory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return cmd_fit(fit_data, fit_opts);
    if (predict->parsed())
      return cmd_predict(predict_fit, predict_grid, predict_xs, predict_opts);
    if (simulate->parsed()) return cmd_simulate(sim_config, sim_opts);
    if (experiment->parsed()) return cmd_experiment(exp_config, exp_rows, exp_opts);
    if (theory->parsed()) return cmd_check_theory(theory_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
