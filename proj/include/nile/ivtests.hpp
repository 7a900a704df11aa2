#pragma once

#include <Eigen/Dense>

#include "nile/penreg.hpp"

namespace nile {

enum class TestKind { T1, T2 };

struct TestReport {
  double statistic = 0.0;
  double threshold = 0.0;
  bool reject = false;
  double alpha = 0.05;
  TestKind kind = TestKind::T2;
};

/// Anderson-Rubin style statistic n ||P r||^2 / ||r||^2 where P is the
/// unpenalized orthogonal projection onto the instrument columns.
/// Rejects above the (1 - alpha) chi-square quantile with k dof.
TestReport t1_statistic(const Eigen::VectorXd& residuals,
                        const Eigen::MatrixXd& instrument_design, double alpha);

/// Penalized-regression statistic
///   (||P_d r||^2 - sigma2 * c_n) / (sigma2 * d_n),
/// with c_n = trace(P_d^2), d_n = sqrt(2 trace(P_d^4)) and
/// sigma2 = ||(I - P_d) r||^2 / (n - 1). Rejects above the (1 - alpha)
/// standard normal quantile. Traces are taken on the k x k smoother
/// equivalent S = (C'C + d M)^-1 C'C.
TestReport t2_statistic(const Eigen::VectorXd& y, const Eigen::VectorXd& fitted,
                        const HatSpec& hat, double alpha);

double chi_squared_quantile(double p, int dof);
double normal_quantile(double p);

}  // namespace nile
