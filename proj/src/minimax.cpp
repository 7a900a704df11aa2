#include "nile/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nile {

namespace {

using Kind = InterventionSpec::Kind;

// Second moment of X and the cross moment E[xi_Y X] under one intervention.
// With H = sigma * eH the composite noises are xi_X = eX + eH and
// xi_Y = eY + eH, so the confounding covariance is var_H.
struct RiskMoments {
  double x_second_moment = 0.0;
  double cross = 0.0;  // E[xi_Y X]
};

RiskMoments moments(const LinearScm& scm, Kind kind, double value) {
  RiskMoments m;
  switch (kind) {
    case Kind::shift_on_X:
      m.x_second_moment = scm.gamma * scm.gamma * scm.var_A + scm.var_X + scm.var_H +
                          value * value;
      m.cross = scm.var_H;
      break;
    case Kind::hard_on_X:
      m.x_second_moment = value * value;
      m.cross = 0.0;
      break;
    case Kind::hard_on_A:
      m.x_second_moment =
          scm.gamma * scm.gamma * value * value + scm.var_X + scm.var_H;
      m.cross = scm.var_H;
      break;
    case Kind::confounding_scale:
      // psi = i H = i sigma eH
      m.x_second_moment = value * value * scm.sigma * scm.sigma * scm.var_H;
      m.cross = value * scm.sigma * scm.var_H;
      break;
  }
  return m;
}

double risk_from_moments(const LinearScm& scm, double b, const RiskMoments& m) {
  const double d = scm.beta - b;
  return d * d * m.x_second_moment + scm.xi_y_variance() + 2.0 * d * m.cross;
}

std::vector<double> candidate_values(const LinearInterventionSet& set) {
  std::vector<double> values = set.values;
  if (set.is_interval) {
    // the risk is quadratic in the value with nonnegative leading coefficient,
    // so the supremum over [lo, hi] is attained at an endpoint
    values.push_back(set.lo);
    values.push_back(set.hi);
  }
  if (values.empty())
    throw std::invalid_argument("linear_worst_case_risk: empty intervention set");
  return values;
}

double uniform_pm1(Rng& rng) {
  return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
}

double xi_y_draw(Rng& rng) { return 0.3 * uniform_pm1(rng) + 0.2 * uniform_pm1(rng); }

}  // namespace

double linear_risk(const LinearScm& scm, double b, Kind kind, double value) {
  if (scm.sigma <= 0.0) throw std::invalid_argument("linear_risk: sigma must be > 0");
  return risk_from_moments(scm, b, moments(scm, kind, value));
}

double linear_worst_case_risk(const LinearScm& scm, double b,
                              const LinearInterventionSet& interventions) {
  double sup = -std::numeric_limits<double>::infinity();
  for (const double v : candidate_values(interventions))
    sup = std::max(sup, linear_risk(scm, b, interventions.kind, v));
  return sup;
}

double linear_worst_case_distance(const LinearScm& scm, double b,
                                  const LinearInterventionSet& interventions) {
  const double d = scm.beta - b;
  double sup = -std::numeric_limits<double>::infinity();
  for (const double v : candidate_values(interventions))
    sup = std::max(sup, d * d * moments(scm, interventions.kind, v).x_second_moment);
  return sup;
}

MinimaxResult brute_force_minimax(const LinearScm& scm,
                                  const std::vector<double>& b_grid,
                                  const LinearInterventionSet& interventions) {
  if (b_grid.empty()) throw std::invalid_argument("brute_force_minimax: empty b grid");
  MinimaxResult best;
  best.risk = std::numeric_limits<double>::infinity();
  for (const double b : b_grid) {
    const double risk = linear_worst_case_risk(scm, b, interventions);
    if (risk < best.risk) {
      best.risk = risk;
      best.b_star = b;
    }
  }
  return best;
}

BoundReport check_bound_prop3(const LinearScm& scm, double f_star_coeff,
                              const LinearInterventionSet& interventions) {
  BoundReport report;
  const double candidate_risk = linear_worst_case_risk(scm, f_star_coeff, interventions);
  const double causal_risk = linear_worst_case_risk(scm, scm.beta, interventions);
  report.applicable = candidate_risk <= causal_risk + 1e-12;
  report.lhs = linear_worst_case_distance(scm, f_star_coeff, interventions);
  report.rhs = 4.0 * scm.xi_y_variance();
  report.holds = report.applicable && report.lhs <= report.rhs + 1e-12;
  return report;
}

double bounded_derivative_bound(double delta, double K, double var_xi, GapKind kind,
                                double epsilon) {
  if (delta < 0.0 || K < 0.0 || var_xi < 0.0 || epsilon < 0.0)
    throw std::invalid_argument("bounded_derivative_bound: arguments must be >= 0");
  const double dk = delta * K;
  if (kind == GapKind::confounding_removing)
    return 4.0 * dk * dk + 4.0 * dk * std::sqrt(var_xi);
  return epsilon + 12.0 * dk * dk + 32.0 * dk * std::sqrt(var_xi) +
         4.0 * std::sqrt(2.0) * dk * std::sqrt(epsilon);
}

double clipped_slope_observed_gap(double delta, double K, std::uint64_t seed,
                                  int n_draws) {
  // True f(x) = K x; the estimate agrees on the observed support [-1, 1] and
  // continues with slope 0, the worst admissible mismatch within the
  // K-Lipschitz class. Hard interventions probe up to distance delta outside.
  const auto f_true = [K](double x) { return K * x; };
  const auto f_star = [K](double x) { return K * std::clamp(x, -1.0, 1.0); };
  Rng rng(seed);
  double sup_risk = 0.0;
  constexpr int kGrid = 41;
  for (int g = 0; g < kGrid; ++g) {
    const double x0 = -1.0 - delta + (2.0 + 2.0 * delta) * g / (kGrid - 1);
    double acc = 0.0;
    for (int i = 0; i < n_draws / kGrid; ++i) {
      const double e = f_true(x0) + xi_y_draw(rng) - f_star(x0);
      acc += e * e;
    }
    sup_risk = std::max(sup_risk, acc / (n_draws / kGrid));
  }
  // the causal function attains the optimum E[xi_Y^2] under these
  // confounding-removing interventions
  return sup_risk - kXiYVariance;
}

ExtrapolationDemo impossibility_demo_extrapolation(
    const std::function<double(double)>& f_bar, double c, Interval support,
    Interval intervention_region, double epsilon_mass, double xi_variance,
    std::uint64_t seed, int n_draws) {
  if (!(support.lo < support.hi) || !(intervention_region.lo < intervention_region.hi))
    throw std::invalid_argument("impossibility_demo_extrapolation: empty interval");
  const bool disjoint =
      intervention_region.lo >= support.hi || intervention_region.hi <= support.lo;
  if (!disjoint)
    throw std::invalid_argument(
        "impossibility_demo_extrapolation: intervention region overlaps the support");
  if (c < 0.0 || epsilon_mass <= 0.0 || epsilon_mass > 1.0)
    throw std::invalid_argument("impossibility_demo_extrapolation: bad c or mass");

  ExtrapolationDemo demo;
  demo.gamma_offset = (std::sqrt(2.0 * xi_variance + c) + std::sqrt(xi_variance)) /
                      std::sqrt(epsilon_mass);

  // alternative causal function: equals the candidate's truth on the support,
  // candidate + gamma on the region, linearly interpolated in between
  const double gamma = demo.gamma_offset;
  demo.f_tilde = [f_bar, support, intervention_region, gamma](double x) {
    if (x >= support.lo && x <= support.hi) return f_bar(x);
    if (x >= intervention_region.lo && x <= intervention_region.hi)
      return f_bar(x) + gamma;
    // ramp between the support edge and the region edge
    double x0, x1;
    if (intervention_region.lo >= support.hi) {
      x0 = support.hi;
      x1 = intervention_region.lo;
    } else {
      x0 = support.lo;
      x1 = intervention_region.hi;
    }
    if ((x - x0) * (x - x1) <= 0.0) {
      const double t = (x - x0) / (x1 - x0);
      return f_bar(x) + t * gamma;
    }
    return f_bar(x) + gamma;  // beyond the region: keep the offset
  };

  // Monte Carlo risks under the support-extending intervention that places
  // mass epsilon on the region and the rest on the support.
  Rng rng(seed);
  double risk_bar = 0.0, risk_tilde = 0.0;
  for (int i = 0; i < n_draws; ++i) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double x;
    if (u < epsilon_mass)
      x = std::uniform_real_distribution<double>(intervention_region.lo,
                                                 intervention_region.hi)(rng);
    else
      x = std::uniform_real_distribution<double>(support.lo, support.hi)(rng);
    const double y = demo.f_tilde(x) + std::sqrt(xi_variance / kXiYVariance) * xi_y_draw(rng);
    const double eb = y - f_bar(x);
    const double et = y - demo.f_tilde(x);
    risk_bar += eb * eb;
    risk_tilde += et * et;
  }
  risk_bar /= n_draws;
  risk_tilde /= n_draws;
  demo.gap = risk_bar - risk_tilde;
  return demo;
}

InterventionOnADemo impossibility_demo_int_a(const LinearScm& scm, double b_bar,
                                             double c) {
  const double rho = scm.var_H;  // E[xi_X xi_Y] with xi_X = eX + eH, xi_Y = eY + eH
  if (rho == 0.0)
    throw std::invalid_argument("impossibility_demo_int_a: requires hidden confounding "
                                "(E[xi_X xi_Y] != 0)");
  const double diff = scm.beta - b_bar;
  if (diff == 0.0)
    throw std::invalid_argument("impossibility_demo_int_a: candidate equals the causal "
                                "coefficient");
  const double var_xi_x = scm.var_X + scm.var_H;

  InterventionOnADemo demo;
  // gap(n) = diff^2 (n^2 + var_xi_x) + 2 diff rho; smallest integer spike
  // reaching c (the risk grows without bound in n)
  const double need = (c - 2.0 * diff * rho) / (diff * diff) - var_xi_x;
  demo.n_spike = need <= 0.0 ? 1 : static_cast<long long>(std::ceil(std::sqrt(need)));
  const double n2 = static_cast<double>(demo.n_spike) * static_cast<double>(demo.n_spike);
  demo.gap = diff * diff * (n2 + var_xi_x) + 2.0 * diff * rho;

  // first claim: the causal coefficient is not minimax; the worst-case risk
  // over hard interventions on A strictly decreases along the confounding
  // direction u = sign(rho)
  const double u = rho > 0.0 ? 1.0 : -1.0;
  const auto worst_risk_along = [&](double s) {
    // sup over a in a bounded grid of ell_a(s); the linear term is
    // a-independent so any bounded grid exhibits the derivative
    double sup = -std::numeric_limits<double>::infinity();
    for (int g = 0; g <= 20; ++g) {
      const double a = -2.0 + 4.0 * g / 20.0;
      const double xxm = scm.gamma * scm.gamma * a * a + var_xi_x;
      sup = std::max(sup, s * s * u * u * xxm - 2.0 * s * u * rho +
                              scm.xi_y_variance());
    }
    return sup;
  };
  const double h = 1e-6;
  demo.directional_derivative = (worst_risk_along(h) - worst_risk_along(0.0)) / h;
  demo.derivative_bound = -2.0 * std::abs(rho);
  return demo;
}

std::vector<ScenarioResult> run_theory_suite(std::uint64_t seed) {
  std::vector<ScenarioResult> results;
  const auto push = [&results](std::string name, double candidate, double risk,
                               double bound, bool pass) {
    results.push_back({std::move(name), candidate, risk, bound, pass});
  };

  // (a) the causal coefficient's worst-case risk equals E[xi_Y^2] exactly,
  // for random linear scenarios and interventions on X or A
  Rng rng(seed);
  for (int s = 0; s < 10; ++s) {
    LinearScm scm;
    scm.beta = uniform_pm1(rng) * 2.0;
    scm.gamma = 0.5 + std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    scm.sigma = 0.5 + std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    scm.var_A = 0.5 + std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    scm.var_X = 0.5 + std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    scm.var_Y = 0.5 + std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    scm.var_H = 0.5 + std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    LinearInterventionSet set;
    set.kind = s % 2 == 0 ? Kind::shift_on_X : Kind::hard_on_A;
    set.is_interval = true;
    set.lo = -2.0;
    set.hi = 3.0;
    const double risk = linear_worst_case_risk(scm, scm.beta, set);
    const double expected = scm.xi_y_variance();
    push("causal_risk_equals_noise_" + std::to_string(s), scm.beta, risk, expected,
         std::abs(risk - expected) <= 1e-12 * std::max(1.0, expected));
  }

  // (b) the mismatched-confounding construction: causal risk 2, the shifted
  // candidate beats it, and the sigma-tilde model realizes any target gap
  {
    LinearScm scm;  // unit-variance noises as in the construction
    scm.beta = 1.0;
    scm.gamma = 1.0;
    scm.sigma = 1.0;
    const double u = 1.0;  // interventions i in (0, u]
    LinearInterventionSet set;
    set.kind = Kind::confounding_scale;
    set.is_interval = true;
    set.lo = 0.01;  // compact subset of the positive reals
    set.hi = u;
    const double causal = linear_worst_case_risk(scm, scm.beta, set);
    push("conf_scale_causal_risk_two", scm.beta, causal, 2.0,
         std::abs(causal - 2.0) <= 1e-9);
    const double b = scm.beta + 1.0 / (scm.sigma * u);
    const double alt = linear_worst_case_risk(scm, b, set);
    push("conf_scale_alternative_below_two", b, alt, 2.0, alt < 2.0);

    for (const double c : {1.0, 10.0}) {
      const double i0 = u;
      const double sign = (scm.beta - b) * i0 > 0.0 ? 1.0 : -1.0;
      const double sigma_tilde =
          (sign * std::sqrt(1.0 + c) - 1.0) / ((scm.beta - b) * i0);
      LinearScm twin = scm;
      twin.sigma = sigma_tilde;
      const double risk_b = linear_risk(twin, b, Kind::confounding_scale, i0);
      const double optimum = linear_worst_case_risk(twin, twin.beta, set);
      const double gap = risk_b - optimum;
      push("conf_scale_sigma_tilde_gap_c" + std::to_string(static_cast<int>(c)), b,
           risk_b, c, sigma_tilde > 0.0 && gap >= c - 1e-9);
    }
  }

  // (c) the 4 var(xi_Y) distance bound holds at brute-force minimax solutions
  // in shift scenarios
  for (int s = 0; s < 10; ++s) {
    LinearScm scm;
    scm.beta = uniform_pm1(rng);
    scm.gamma = 1.0;
    scm.sigma = 1.0;
    scm.var_H = 0.4 + std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    LinearInterventionSet set;
    set.kind = Kind::shift_on_X;
    set.is_interval = true;
    set.lo = 0.0;
    set.hi = 1.0 + std::uniform_real_distribution<double>(0.0, 4.0)(rng);
    std::vector<double> b_grid;
    for (int g = 0; g <= 4000; ++g) b_grid.push_back(scm.beta - 2.0 + 4.0 * g / 4000.0);
    const MinimaxResult mm = brute_force_minimax(scm, b_grid, set);
    const BoundReport bound = check_bound_prop3(scm, mm.b_star, set);
    push("distance_bound_shift_" + std::to_string(s), mm.b_star, bound.lhs, bound.rhs,
         bound.applicable && bound.holds);
  }

  // (d) bounded-derivative bound values against independent arithmetic, and
  // dominance over observed Monte Carlo gaps
  {
    const double delta = 0.5, K = 1.0, var = kXiYVariance;
    const double removing =
        bounded_derivative_bound(delta, K, var, GapKind::confounding_removing);
    const double by_hand = 4.0 * 0.25 * 1.0 + 4.0 * 0.5 * std::sqrt(var);
    push("bounded_deriv_removing_value", delta, removing, by_hand,
         std::abs(removing - by_hand) <= 1e-12);
    const double preserving = bounded_derivative_bound(delta, K, var,
                                                       GapKind::confounding_preserving,
                                                       0.1);
    const double by_hand_p = 0.1 + 12.0 * 0.25 + 32.0 * 0.5 * std::sqrt(var) +
                             4.0 * std::sqrt(2.0) * 0.5 * std::sqrt(0.1);
    push("bounded_deriv_preserving_value", delta, preserving, by_hand_p,
         std::abs(preserving - by_hand_p) <= 1e-12);
    const double observed = clipped_slope_observed_gap(delta, K, seed + 1);
    push("bounded_deriv_dominates_mc_gap", delta, observed, removing,
         observed <= removing);
  }

  // (e) the constructive impossibility demonstrations reach their target gaps
  {
    const auto f_bar = [](double x) { return 0.5 * x; };
    const double c = 1.0;
    const ExtrapolationDemo demo = impossibility_demo_extrapolation(
        f_bar, c, {-1.0, 1.0}, {1.5, 2.5}, 0.5, kXiYVariance, seed + 2);
    push("extrapolation_gap", demo.gamma_offset, demo.gap, c, demo.gap >= 0.95 * c);

    LinearScm scm;
    scm.beta = 1.0;
    scm.gamma = 1.0;
    scm.sigma = 1.0;
    const InterventionOnADemo demo_a = impossibility_demo_int_a(scm, scm.beta + 1.0, 10.0);
    push("int_a_gap", static_cast<double>(demo_a.n_spike), demo_a.gap, 10.0,
         demo_a.gap >= 10.0);
    push("int_a_directional_derivative", scm.beta, demo_a.directional_derivative,
         demo_a.derivative_bound,
         demo_a.directional_derivative <= demo_a.derivative_bound + 1e-3);
  }

  return results;
}

std::string scenario_results_to_csv(const std::vector<ScenarioResult>& results) {
  std::ostringstream out;
  out << "scenario,candidate,worst_case_risk,bound,pass\n";
  for (const auto& r : results) {
    out << r.scenario << ',' << r.candidate << ',' << r.worst_case_risk << ','
        << r.bound << ',' << (r.pass ? "pass" : "fail") << '\n';
  }
  return out.str();
}

}  // namespace nile
