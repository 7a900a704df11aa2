#include "nile/scm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace nile {

namespace {

double uniform_pm1(Rng& rng) {
  return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
}

// Truncated-power difference d_j(x) = ((x - t_j)_+^3 - (x - t_K)_+^3) / (t_K - t_j);
// pairwise differences of these give the natural-spline basis.
double truncated_cubic_ratio(double x, double knot, double last_knot) {
  const double p1 = std::max(x - knot, 0.0);
  const double p2 = std::max(x - last_knot, 0.0);
  return (p1 * p1 * p1 - p2 * p2 * p2) / (last_knot - knot);
}

void check_unit_alphas(double alpha_A, double alpha_H, double alpha_eps) {
  const double norm2 = alpha_A * alpha_A + alpha_H * alpha_H + alpha_eps * alpha_eps;
  if (std::abs(norm2 - 1.0) > 1e-10)
    throw std::invalid_argument("scm: alpha_A^2 + alpha_H^2 + alpha_eps^2 must equal 1");
}

}  // namespace

double CausalFn::operator()(double x) const {
  // basis: x, and d_j - d_{K-1} for the first three knots (4 functions, no
  // intercept); linear outside [q_min, q_max] by construction
  double value = coefficients[0] * x;
  if (knots.size() == 5) {
    const double t_last = knots[4];
    const double d4 = truncated_cubic_ratio(x, knots[3], t_last);
    for (int j = 0; j < 3; ++j)
      value += coefficients[j + 1] * (truncated_cubic_ratio(x, knots[j], t_last) - d4);
  } else if (coefficients.tail<3>().cwiseAbs().maxCoeff() != 0.0) {
    throw std::logic_error("CausalFn: spline coefficients set without 5 knots");
  }
  if (kind == Kind::spline_with_curved_tails) {
    const double lo = std::min(x - q_min, 0.0);
    const double hi = std::max(x - q_max, 0.0);
    value += 0.5 * k1 * lo * lo + 0.5 * k2 * hi * hi;
  }
  return value;
}

Rng substream(std::uint64_t master_seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

std::pair<double, double> x_inner_quantiles(double alpha_A, double alpha_H,
                                            double alpha_eps) {
  check_unit_alphas(alpha_A, alpha_H, alpha_eps);
  using Key = std::tuple<double, double, double>;
  static std::map<Key, std::pair<double, double>> cache;
  const Key key{alpha_A, alpha_H, alpha_eps};
  if (const auto it = cache.find(key); it != cache.end()) return it->second;

  constexpr int kDraws = 1000000;
  Rng rng(0x5eedf00dULL);  // fixed internal seed, parameter-level quantiles
  std::vector<double> draws(kDraws);
  for (double& v : draws)
    v = alpha_A * uniform_pm1(rng) + alpha_H * uniform_pm1(rng) +
        alpha_eps * uniform_pm1(rng);
  const auto q05 = draws.begin() + static_cast<long>(0.05 * kDraws);
  std::nth_element(draws.begin(), q05, draws.end());
  const double lo = *q05;
  const auto q95 = draws.begin() + static_cast<long>(0.95 * kDraws);
  std::nth_element(draws.begin(), q95, draws.end());
  const double hi = *q95;
  return cache[key] = {lo, hi};
}

CausalFn sample_causal_fn(Rng& rng, double alpha_A, double alpha_H, double alpha_eps) {
  const auto [q_min, q_max] = x_inner_quantiles(alpha_A, alpha_H, alpha_eps);
  CausalFn fn;
  fn.kind = CausalFn::Kind::natural_spline;
  fn.q_min = q_min;
  fn.q_max = q_max;
  fn.knots.resize(5);
  for (int j = 0; j < 5; ++j) fn.knots[j] = q_min + (q_max - q_min) * j / 4.0;
  for (int j = 0; j < 4; ++j) fn.coefficients[j] = uniform_pm1(rng);
  return fn;
}

CausalFn curvature_violation(const CausalFn& base, double kappa, Rng& rng) {
  if (kappa < 0.0) throw std::invalid_argument("curvature_violation: kappa must be >= 0");
  CausalFn fn = base;
  fn.kind = CausalFn::Kind::spline_with_curved_tails;
  fn.k1 = kappa == 0.0 ? 0.0 : std::uniform_real_distribution<double>(-kappa, kappa)(rng);
  fn.k2 = kappa == 0.0 ? 0.0 : std::uniform_real_distribution<double>(-kappa, kappa)(rng);
  return fn;
}

Dataset sample_data(const ScmModel& model, int n, Rng& rng, bool keep_latent) {
  if (n < 1) throw std::invalid_argument("sample_data: n must be >= 1");
  check_unit_alphas(model.alpha_A, model.alpha_H, model.alpha_eps);
  Dataset data;
  data.x.resize(n);
  data.y.resize(n);
  data.a.resize(n);
  if (keep_latent) data.h.resize(n);
  for (int i = 0; i < n; ++i) {
    const double eA = uniform_pm1(rng);
    const double eH = uniform_pm1(rng);
    const double eX = uniform_pm1(rng);
    const double eY = uniform_pm1(rng);
    data.a[i] = eA;
    data.x[i] = model.alpha_A * eA + model.alpha_H * eH + model.alpha_eps * eX;
    data.y[i] = model.causal_fn(data.x[i]) + model.noise_scale_H_in_Y * eH +
                model.noise_scale_eps_Y * eY;
    if (keep_latent) data.h[i] = eH;
  }
  return data;
}

Dataset apply_intervention(const ScmModel& model, const InterventionSpec& spec, int n,
                           Rng& rng, bool keep_latent) {
  if (n < 1) throw std::invalid_argument("apply_intervention: n must be >= 1");
  check_unit_alphas(model.alpha_A, model.alpha_H, model.alpha_eps);
  if (spec.kind == InterventionSpec::Kind::confounding_scale && !(spec.value > 0.0))
    throw std::invalid_argument("apply_intervention: confounding_scale value must be > 0");
  Dataset data;
  data.x.resize(n);
  data.y.resize(n);
  data.a.resize(n);
  if (keep_latent) data.h.resize(n);
  for (int i = 0; i < n; ++i) {
    const double eA = uniform_pm1(rng);
    const double eH = uniform_pm1(rng);
    const double eX = uniform_pm1(rng);
    const double eY = uniform_pm1(rng);
    double a = eA;
    double x = 0.0;
    switch (spec.kind) {
      case InterventionSpec::Kind::hard_on_X:
        x = spec.value;
        break;
      case InterventionSpec::Kind::shift_on_X:
        x = model.alpha_A * a + model.alpha_H * eH + model.alpha_eps * eX + spec.value;
        break;
      case InterventionSpec::Kind::hard_on_A:
        a = spec.value;
        x = model.alpha_A * a + model.alpha_H * eH + model.alpha_eps * eX;
        break;
      case InterventionSpec::Kind::confounding_scale:
        x = spec.value * eH;
        break;
    }
    data.a[i] = a;
    data.x[i] = x;
    data.y[i] = model.causal_fn(x) + model.noise_scale_H_in_Y * eH +
                model.noise_scale_eps_Y * eY;
    if (keep_latent) data.h[i] = eH;
  }
  return data;
}

}  // namespace nile
