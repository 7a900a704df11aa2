#pragma once

#include <cstdint>
#include <random>

#include "nile/dataset.hpp"

namespace nile {

/// Natural cubic spline on 5 knots (4 basis functions), optionally with
/// quadratic tails of fixed curvature outside [q_min, q_max].
struct CausalFn {
  enum class Kind { natural_spline, spline_with_curved_tails };
  Kind kind = Kind::natural_spline;
  Eigen::VectorXd knots;        // 5, equidistant in [q_min, q_max]
  Eigen::Vector4d coefficients = Eigen::Vector4d::Zero();
  double k1 = 0.0;  // tail curvature left of q_min
  double k2 = 0.0;  // tail curvature right of q_max
  double q_min = -1.0;
  double q_max = 1.0;

  double operator()(double x) const;
};

/// Simulation model  A := eA, H := eH, X := aA A + aH H + ae eX,
/// Y := f(X) + 0.3 H + 0.2 eY,  all noises Uniform(-1, 1).
struct ScmModel {
  double alpha_A = 0.0;
  double alpha_H = 0.0;
  double alpha_eps = 0.0;
  CausalFn causal_fn;
  double noise_scale_H_in_Y = 0.3;
  double noise_scale_eps_Y = 0.2;
};

struct InterventionSpec {
  enum class Kind { hard_on_X, shift_on_X, hard_on_A, confounding_scale };
  Kind kind = Kind::hard_on_X;
  double value = 0.0;
};

using Rng = std::mt19937_64;

/// Independent substream for replication `index` under a master seed.
Rng substream(std::uint64_t master_seed, std::uint64_t index);

/// 5%- and 95% population quantiles of X under the alpha configuration,
/// computed once by a 1e6-sample Monte Carlo with a fixed internal seed and
/// cached per configuration.
std::pair<double, double> x_inner_quantiles(double alpha_A, double alpha_H,
                                            double alpha_eps);

/// Natural cubic spline with Uniform(-1,1) coefficients on 5 equidistant
/// knots spanning the inner 90% quantile range of X.
CausalFn sample_causal_fn(Rng& rng, double alpha_A, double alpha_H, double alpha_eps);

/// Adds Uniform(-kappa, kappa) tail curvatures; unchanged on [q_min, q_max].
CausalFn curvature_violation(const CausalFn& base, double kappa, Rng& rng);

Dataset sample_data(const ScmModel& model, int n, Rng& rng, bool keep_latent = false);

Dataset apply_intervention(const ScmModel& model, const InterventionSpec& spec, int n,
                           Rng& rng, bool keep_latent = false);

/// Var(0.3 H + 0.2 eY) with Uniform(-1,1) noises: 0.13 / 3.
constexpr double kXiYVariance = 0.13 / 3.0;

}  // namespace nile
