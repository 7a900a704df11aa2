#pragma once

#include <Eigen/Dense>

namespace nile {

/// Clamped cubic B-spline basis on [a, b] with k basis functions.
/// The knot vector has length k + 4: multiplicity 4 at both boundaries
/// and k - 4 equidistant interior knots.
struct SplineBasis {
  double a = 0.0;
  double b = 1.0;
  int k = 4;
  Eigen::VectorXd knots;
};

SplineBasis make_cubic_basis(double a, double b, int k);

/// Values (or derivatives) of all k basis functions at x in [a, b].
/// deriv_order must be 0, 1 or 2. Throws if x lies outside [a, b].
Eigen::VectorXd eval_basis(const SplineBasis& basis, double x, int deriv_order = 0);

/// Row-wise eval_basis over a vector of abscissae; returns an n x k design matrix.
Eigen::MatrixXd design_matrix(const SplineBasis& basis, const Eigen::VectorXd& x,
                              int deriv_order = 0);

/// K_ij = integral of B_i'' B_j'' over [a, b]. Second derivatives of cubic
/// splines are piecewise linear, so 2-point Gauss-Legendre per knot interval
/// integrates the products exactly.
Eigen::MatrixXd curvature_penalty(const SplineBasis& basis);

/// Spline value B(x)' theta on [a, b], continued linearly outside with
/// boundary slopes B'(a)' theta and B'(b)' theta. Defined on all reals.
double eval_f_eta(const SplineBasis& basis, const Eigen::VectorXd& theta, double x);

}  // namespace nile
