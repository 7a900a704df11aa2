#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nile/minimax.hpp"

using nile::InterventionSpec;
using nile::LinearInterventionSet;
using nile::LinearScm;

namespace {

LinearScm unit_scm(double beta) {
  LinearScm scm;
  scm.beta = beta;
  scm.gamma = 1.0;
  scm.sigma = 1.0;
  return scm;
}

// Monte Carlo oracle for E_{M(i)}[(Y - bX)^2] under the linear model with
// Gaussian noises of the configured variances.
double mc_risk(const LinearScm& scm, double b, InterventionSpec::Kind kind,
               double value, unsigned seed, int n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double eA = std::sqrt(scm.var_A) * gauss(rng);
    const double eX = std::sqrt(scm.var_X) * gauss(rng);
    const double eY = std::sqrt(scm.var_Y) * gauss(rng);
    const double eH = std::sqrt(scm.var_H) * gauss(rng);
    const double h = scm.sigma * eH;
    double a = eA;
    double x;
    switch (kind) {
      case InterventionSpec::Kind::hard_on_X:
        x = value;
        break;
      case InterventionSpec::Kind::shift_on_X:
        x = scm.gamma * a + eX + h / scm.sigma + value;
        break;
      case InterventionSpec::Kind::hard_on_A:
        a = value;
        x = scm.gamma * a + eX + h / scm.sigma;
        break;
      case InterventionSpec::Kind::confounding_scale:
        x = value * h;
        break;
    }
    const double y = scm.beta * x + eY + h / scm.sigma;
    acc += (y - b * x) * (y - b * x);
  }
  return acc / n;
}

}  // namespace

TEST_CASE("causal coefficient attains exactly the noise risk") {
  const LinearScm scm = unit_scm(0.7);
  for (const auto kind :
       {InterventionSpec::Kind::hard_on_X, InterventionSpec::Kind::shift_on_X,
        InterventionSpec::Kind::hard_on_A, InterventionSpec::Kind::confounding_scale}) {
    for (const double v : {0.5, 2.0, 17.0})
      CHECK(nile::linear_risk(scm, scm.beta, kind, v) == scm.xi_y_variance());
  }
}

TEST_CASE("closed-form risk matches a Monte Carlo oracle") {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  const int n = 400000;
  for (int s = 0; s < 10; ++s) {
    LinearScm scm;
    scm.beta = unif(rng) - 1.0;
    scm.gamma = unif(rng);
    scm.sigma = unif(rng);
    scm.var_A = unif(rng);
    scm.var_X = unif(rng);
    scm.var_Y = unif(rng);
    scm.var_H = unif(rng);
    const double b = scm.beta + unif(rng) - 1.0;
    const auto kind = static_cast<InterventionSpec::Kind>(s % 4);
    const double value = unif(rng);
    const double closed = nile::linear_risk(scm, b, kind, value);
    const double mc = mc_risk(scm, b, kind, value, 1000 + s, n);
    // fourth moments of the squared error bound the MC standard error
    const double se = 3.0 * closed / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(closed - mc) <= 3.0 * se + 0.01);
  }
}

TEST_CASE("mismatched-confounding construction reproduces its exact numbers") {
  const LinearScm scm = unit_scm(1.0);
  const double u = 1.0;
  const double b = scm.beta + 1.0 / (scm.sigma * u);

  // risk at intervention i is 1 + (1 - i/u)^2
  for (const double i : {0.1, 0.5, 1.0})
    CHECK(nile::linear_risk(scm, b, InterventionSpec::Kind::confounding_scale, i) ==
          doctest::Approx(1.0 + (1.0 - i / u) * (1.0 - i / u)).epsilon(1e-12));

  LinearInterventionSet set;
  set.kind = InterventionSpec::Kind::confounding_scale;
  set.is_interval = true;
  set.lo = 0.01;
  set.hi = u;
  CHECK(nile::linear_worst_case_risk(scm, scm.beta, set) == doctest::Approx(2.0));
  CHECK(nile::linear_worst_case_risk(scm, b, set) < 2.0);
}

TEST_CASE("brute-force minimax approaches the causal coefficient for wide shifts") {
  const LinearScm scm = unit_scm(0.4);
  std::vector<double> b_grid;
  for (int g = 0; g <= 8000; ++g) b_grid.push_back(-2.0 + 4.0 * g / 8000.0);

  double prev_distance = std::numeric_limits<double>::infinity();
  for (const double hi : {1.0, 5.0, 25.0, 125.0}) {
    LinearInterventionSet set;
    set.kind = InterventionSpec::Kind::shift_on_X;
    set.is_interval = true;
    set.lo = 0.0;
    set.hi = hi;
    const nile::MinimaxResult mm = nile::brute_force_minimax(scm, b_grid, set);
    const double distance = std::abs(mm.b_star - scm.beta);
    CHECK(distance <= prev_distance + 1e-3);
    prev_distance = distance;
  }
  CHECK(prev_distance <= 0.02);
}

TEST_CASE("trivial intervention set recovers the population regression slope") {
  LinearScm scm = unit_scm(0.4);
  LinearInterventionSet set;
  set.kind = InterventionSpec::Kind::shift_on_X;
  set.values = {0.0};  // observational distribution only

  // argmin_b E[(Y - bX)^2] = beta + E[xi_Y X] / E[X^2]
  const double ex2 = scm.gamma * scm.gamma * scm.var_A + scm.var_X + scm.var_H;
  const double expected = scm.beta + scm.var_H / ex2;

  std::vector<double> b_grid;
  for (int g = 0; g <= 40000; ++g) b_grid.push_back(-1.0 + 3.0 * g / 40000.0);
  const nile::MinimaxResult mm = nile::brute_force_minimax(scm, b_grid, set);
  CHECK(mm.b_star == doctest::Approx(expected).epsilon(1e-3));
  CHECK(mm.b_star != scm.beta);
}

TEST_CASE("distance bound holds at the minimax solution and flags bad candidates") {
  const LinearScm scm = unit_scm(0.3);
  LinearInterventionSet set;
  set.kind = InterventionSpec::Kind::shift_on_X;
  set.is_interval = true;
  set.lo = 0.0;
  set.hi = 3.0;

  std::vector<double> b_grid;
  for (int g = 0; g <= 8000; ++g) b_grid.push_back(-2.0 + 4.0 * g / 8000.0);
  const nile::MinimaxResult mm = nile::brute_force_minimax(scm, b_grid, set);
  const nile::BoundReport ok = nile::check_bound_prop3(scm, mm.b_star, set);
  CHECK(ok.applicable);
  CHECK(ok.holds);
  CHECK(ok.lhs <= ok.rhs);

  // a wildly wrong candidate has higher worst-case risk than beta: not applicable
  const nile::BoundReport bad = nile::check_bound_prop3(scm, scm.beta + 50.0, set);
  CHECK_FALSE(bad.applicable);
  CHECK_FALSE(bad.holds);
}

TEST_CASE("bounded-derivative bounds: arithmetic and Monte Carlo dominance") {
  const double var = nile::kXiYVariance;
  const double removing =
      nile::bounded_derivative_bound(0.5, 1.0, var, nile::GapKind::confounding_removing);
  CHECK(removing == doctest::Approx(1.0 + 2.0 * std::sqrt(var)).epsilon(1e-14));

  const double preserving = nile::bounded_derivative_bound(
      0.5, 1.0, var, nile::GapKind::confounding_preserving, 0.1);
  CHECK(preserving == doctest::Approx(0.1 + 3.0 + 16.0 * std::sqrt(var) +
                                      4.0 * std::sqrt(2.0) * 0.5 * std::sqrt(0.1))
                          .epsilon(1e-14));

  CHECK_THROWS(nile::bounded_derivative_bound(-0.1, 1.0, var,
                                              nile::GapKind::confounding_removing));

  for (const double delta : {0.1, 0.5, 1.0}) {
    const double observed = nile::clipped_slope_observed_gap(delta, 1.0, 99);
    const double bound =
        nile::bounded_derivative_bound(delta, 1.0, var, nile::GapKind::confounding_removing);
    CHECK(observed >= -0.01);
    CHECK(observed <= bound);
  }
}

TEST_CASE("extrapolation impossibility construction reaches its target gap") {
  const auto f_bar = [](double x) { return 0.5 * x; };
  const double c = 1.0;
  const nile::ExtrapolationDemo demo = nile::impossibility_demo_extrapolation(
      f_bar, c, {-1.0, 1.0}, {1.5, 2.5}, 0.5, nile::kXiYVariance, 17);

  const double expected_gamma =
      (std::sqrt(2.0 * nile::kXiYVariance + c) + std::sqrt(nile::kXiYVariance)) /
      std::sqrt(0.5);
  CHECK(demo.gamma_offset == doctest::Approx(expected_gamma).epsilon(1e-12));
  CHECK(demo.gap >= 0.95 * c);

  // the alternative equals the candidate truth on the support
  for (double x = -1.0; x <= 1.0; x += 0.05) CHECK(demo.f_tilde(x) == f_bar(x));
  // and is offset by gamma on the intervention region
  for (double x = 1.5; x <= 2.5; x += 0.05)
    CHECK(demo.f_tilde(x) - f_bar(x) == doctest::Approx(demo.gamma_offset));

  CHECK_THROWS(nile::impossibility_demo_extrapolation(f_bar, c, {-1.0, 1.0}, {0.5, 2.0}));
  CHECK_THROWS(nile::impossibility_demo_extrapolation(f_bar, c, {1.0, -1.0}, {1.5, 2.5}));
}

TEST_CASE("instrument-intervention impossibility: spike gap and derivative") {
  const LinearScm scm = unit_scm(1.0);
  const double c = 10.0;
  const nile::InterventionOnADemo demo = nile::impossibility_demo_int_a(scm, 2.0, c);
  CHECK(demo.n_spike >= 1);
  CHECK(demo.gap >= c);
  // diff = -1, rho = 1: gap(n) = n^2 + var_xi_x - 2
  const double var_xi_x = scm.var_X + scm.var_H;
  const double n2 = static_cast<double>(demo.n_spike) * demo.n_spike;
  CHECK(demo.gap == doctest::Approx(n2 + var_xi_x - 2.0).epsilon(1e-12));
  // spike is minimal
  const double smaller = (n2 - 2.0 * demo.n_spike + 1.0) + var_xi_x - 2.0;
  if (demo.n_spike > 1) CHECK(smaller < c);

  CHECK(demo.derivative_bound == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(demo.directional_derivative <= demo.derivative_bound + 1e-3);

  CHECK_THROWS(nile::impossibility_demo_int_a(scm, scm.beta, c));
  LinearScm no_conf = scm;
  no_conf.var_H = 0.0;
  CHECK_THROWS(nile::impossibility_demo_int_a(no_conf, 2.0, c));
}

TEST_CASE("theory suite passes in full and serializes") {
  const std::vector<nile::ScenarioResult> results = nile::run_theory_suite(7);
  CHECK(results.size() >= 20);
  for (const auto& r : results) {
    INFO(r.scenario);
    CHECK(r.pass);
  }
  const std::string csv = nile::scenario_results_to_csv(results);
  CHECK(csv.rfind("scenario,candidate,worst_case_risk,bound,pass\n", 0) == 0);
  CHECK(csv.find("fail") == std::string::npos);
}
