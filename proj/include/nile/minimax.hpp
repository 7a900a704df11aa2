#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nile/scm.hpp"

namespace nile {

/// Linear SCM  A := eA,  H := sigma eH,  X := gamma A + eX + (1/sigma) H,
/// Y := beta X + eY + (1/sigma) H. The observational law of (X, Y, A) does
/// not depend on sigma.
struct LinearScm {
  double beta = 0.0;
  double gamma = 1.0;   // instrument strength
  double sigma = 1.0;   // confounding scale
  double var_A = 1.0;
  double var_X = 1.0;
  double var_Y = 1.0;
  double var_H = 1.0;

  double xi_y_variance() const { return var_Y + var_H; }
};

/// Finite grid of interventions of one kind, optionally closed under an
/// interval [lo, hi] of values. The risk is an upward-opening quadratic in
/// the intervention value, so the supremum over an interval sits at an
/// endpoint and the interval case stays exact.
struct LinearInterventionSet {
  InterventionSpec::Kind kind = InterventionSpec::Kind::shift_on_X;
  std::vector<double> values;
  bool is_interval = false;
  double lo = 0.0;
  double hi = 0.0;
};

/// Closed-form E_{M(i)}[(Y - bX)^2] for a single intervention value.
double linear_risk(const LinearScm& scm, double b, InterventionSpec::Kind kind,
                   double value);

double linear_worst_case_risk(const LinearScm& scm, double b,
                              const LinearInterventionSet& interventions);

/// Worst-case squared distance sup_i E_{M(i)}[(f(X) - bX)^2] between the
/// candidate and the causal function.
double linear_worst_case_distance(const LinearScm& scm, double b,
                                  const LinearInterventionSet& interventions);

struct MinimaxResult {
  double b_star = 0.0;
  double risk = 0.0;
};

/// Grid oracle: argmin over b_grid of the worst-case risk.
MinimaxResult brute_force_minimax(const LinearScm& scm, const std::vector<double>& b_grid,
                                  const LinearInterventionSet& interventions);

struct BoundReport {
  bool applicable = false;
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// sup_i E[(f - f*)^2] <= 4 var(xi_Y), checked for candidates whose
/// worst-case risk does not exceed the causal function's.
BoundReport check_bound_prop3(const LinearScm& scm, double f_star_coeff,
                              const LinearInterventionSet& interventions);

enum class GapKind { confounding_removing, confounding_preserving };

/// Bounded-derivative generalization bounds:
///   removing:    4 d^2 K^2 + 4 d K sqrt(var)
///   preserving:  eps + 12 d^2 K^2 + 32 d K sqrt(var) + 4 sqrt(2) d K sqrt(eps)
double bounded_derivative_bound(double delta, double K, double var_xi, GapKind kind,
                                double epsilon = 0.0);

/// Monte Carlo generalization gap of a slope-clipped estimate under hard
/// interventions reaching distance `delta` beyond the observed support.
double clipped_slope_observed_gap(double delta, double K, std::uint64_t seed,
                                  int n_draws = 200000);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct ExtrapolationDemo {
  double gamma_offset = 0.0;            // offset of the alternative model on the region
  double gap = 0.0;                     // Monte Carlo risk gap, >= c by construction
  std::function<double(double)> f_tilde;
};

/// Alternative causal function agreeing with f_bar's truth on the support and
/// offset on a disjoint region hit with mass `epsilon_mass`; the candidate's
/// worst-case risk then exceeds the optimum by at least c.
ExtrapolationDemo impossibility_demo_extrapolation(
    const std::function<double(double)>& f_bar, double c, Interval support,
    Interval intervention_region, double epsilon_mass = 0.5,
    double xi_variance = kXiYVariance, std::uint64_t seed = 17,
    int n_draws = 400000);

struct InterventionOnADemo {
  long long n_spike = 0;        // height of the alternative g at the unseen point
  double gap = 0.0;             // closed-form risk gap, >= c
  double directional_derivative = 0.0;  // finite difference of the worst-case
                                        // risk at the causal coefficient
  double derivative_bound = 0.0;        // -2 |E[xi_X xi_Y]|
};

/// Linear-in-X model with nonlinear first stage: spikes g at an unobserved
/// instrument value until the candidate b_bar incurs a risk gap >= c, and
/// checks that the causal coefficient itself is not minimax (the worst-case
/// risk strictly decreases along the confounding direction).
InterventionOnADemo impossibility_demo_int_a(const LinearScm& scm, double b_bar,
                                             double c);

struct ScenarioResult {
  std::string scenario;
  double candidate = 0.0;
  double worst_case_risk = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// The full closed-form / bound / construction check suite behind the
/// check-theory CLI command.
std::vector<ScenarioResult> run_theory_suite(std::uint64_t seed);

std::string scenario_results_to_csv(const std::vector<ScenarioResult>& results);

}  // namespace nile
