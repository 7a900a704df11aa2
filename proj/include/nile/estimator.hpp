#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nile/dataset.hpp"
#include "nile/ivtests.hpp"
#include "nile/splines.hpp"

namespace nile {

struct NileOptions {
  int k = 50;
  double alpha = 0.05;
  TestKind test_kind = TestKind::T2;
  double lambda_cap = 1e6;
  double binary_search_tol = 1e-3;  // relative
  std::vector<double> cv_grid;      // empty -> default_cv_grid()
  std::uint64_t seed = 0;
  int cv_folds = 10;
  bool force_lambda_zero = false;  // OLS-spline baseline
};

struct NileFit {
  Eigen::VectorXd theta;
  SplineBasis basis_B;
  SplineBasis basis_C;
  double gamma = 0.0;
  double delta = 0.0;
  double lambda_star = 0.0;  // +infinity when the fallback was used
  bool fallback_used = false;
  TestReport test_at_solution;
  double alpha = 0.05;
  TestKind test_kind = TestKind::T2;
  std::uint64_t seed = 0;
};

/// Closed-form solve of the K-class objective
///   ||y - B t||^2 + lambda ||P_d (y - B t)||^2 + gamma t'K t.
/// P_d is symmetric but not idempotent for d > 0, so the normal equations
/// carry P_d applied twice:
///   (B'B + lambda B'P_d^2 B + gamma K) t = B'y + lambda B'P_d^2 y.
Eigen::VectorXd fit_theta(const Eigen::MatrixXd& Bmat, const Eigen::MatrixXd& Cmat,
                          const Eigen::VectorXd& y, double lambda, double gamma,
                          double delta, const Eigen::MatrixXd& K,
                          const Eigen::MatrixXd& M);

/// Normal-equation blocks shared by all lambda solves in one fit.
struct NileProblem {
  Eigen::MatrixXd BtB;   // B'B
  Eigen::MatrixXd BPPB;  // B'P_d^2 B
  Eigen::MatrixXd K;
  Eigen::VectorXd Bty;
  Eigen::VectorXd BPPy;  // B'P_d^2 y

  static NileProblem assemble(const Eigen::MatrixXd& Bmat, const Eigen::MatrixXd& Cmat,
                              const Eigen::VectorXd& y, double delta,
                              const Eigen::MatrixXd& M);
  Eigen::VectorXd solve(double lambda, double gamma) const;
  /// TSLS-limit fallback: argmin ||P_d (y - B t)||^2 + gamma_small t'K t.
  Eigen::VectorXd solve_tsls_limit(double gamma_small) const;
};

using TestFactory = std::function<TestReport(const Eigen::VectorXd& theta)>;

struct LambdaSearchResult {
  double lambda_star = 0.0;  // +infinity on fallback
  Eigen::VectorXd theta;
  bool fallback_used = false;
  TestReport report;
};

/// Smallest lambda whose estimate passes the test: exponential bracketing
/// from 1 up to lambda_cap, then bisection to the relative tolerance. When
/// nothing accepts at the cap, returns the TSLS-limit estimate with
/// lambda_star = +infinity.
LambdaSearchResult lambda_search(const NileProblem& problem, double gamma,
                                 const TestFactory& test, const NileOptions& options);

/// Algorithm: bases on the data ranges, delta and gamma by shared-shuffle
/// 10-fold CV, lambda by the search above, gamma scaled by (1 + lambda), one
/// final solve.
NileFit nile_fit(const Dataset& data, const NileOptions& options);

double predict(const NileFit& fit, double x);

/// JSON fit artifact; round-trips bit-exactly.
std::string serialize_fit(const NileFit& fit);
NileFit parse_fit(const std::string& text);
void write_fit(const NileFit& fit, const std::string& path);
NileFit read_fit(const std::string& path);

}  // namespace nile
