#include "nile/splines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nile {

namespace {

constexpr int kDegree = 3;  // cubic
constexpr int kOrder = kDegree + 1;

// Index of the knot interval [knots[i], knots[i+1]) containing x, restricted
// to the valid range [degree, k - 1]; x == b maps to the last interval.
int find_span(const SplineBasis& basis, double x) {
  const int last = basis.k - 1;
  if (x >= basis.b) return last;
  int i = kDegree;
  const auto& t = basis.knots;
  // interior knots are equidistant; a scan is fine at these sizes
  while (i < last && x >= t[i + 1]) ++i;
  return i;
}

// Cox-de Boor with derivatives (the banded NURBS-book recursion): values of
// the kOrder basis functions that are nonzero on span i, for derivative
// orders 0..deriv.
void basis_funs_derivs(const Eigen::VectorXd& knots, int span, double x, int deriv,
                       Eigen::Matrix<double, 3, kOrder>& ders) {
  double ndu[kOrder][kOrder];
  double left[kOrder], right[kOrder];
  ndu[0][0] = 1.0;
  for (int j = 1; j < kOrder; ++j) {
    left[j] = x - knots[span + 1 - j];
    right[j] = knots[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  ders.setZero();
  for (int j = 0; j < kOrder; ++j) ders(0, j) = ndu[j][kOrder - 1];
  if (deriv == 0) return;

  double a[2][kOrder];
  for (int r = 0; r < kOrder; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int d = 1; d <= deriv; ++d) {
      double dv = 0.0;
      const int rk = r - d, pk = kOrder - 1 - d;
      if (r >= d) {
        const double den = ndu[pk + 1][rk];
        a[s2][0] = (den == 0.0) ? 0.0 : a[s1][0] / den;
        dv = a[s2][0] * ndu[rk][pk];
      }
      const int j_lo = std::max(0, -rk);
      const int j_hi = std::min(d - 1, kOrder - 1 - r);
      for (int j = j_lo; j <= j_hi; ++j) {
        if (j == 0 && r >= d) continue;
        const double den = ndu[pk + 1][rk + j];
        a[s2][j] = (den == 0.0) ? 0.0 : (a[s1][j] - (j > 0 ? a[s1][j - 1] : 0.0)) / den;
        dv += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        const double den = ndu[pk + 1][r];
        a[s2][d] = (den == 0.0) ? 0.0 : -a[s1][d - 1] / den;
        dv += a[s2][d] * ndu[r][pk];
      }
      ders(d, r) = dv;
      std::swap(s1, s2);
    }
  }
  double factor = kDegree;
  for (int d = 1; d <= deriv; ++d) {
    for (int j = 0; j < kOrder; ++j) ders(d, j) *= factor;
    factor *= kDegree - d;
  }
}

}  // namespace

SplineBasis make_cubic_basis(double a, double b, int k) {
  if (!(a < b)) throw std::invalid_argument("make_cubic_basis: requires a < b");
  if (k < 4) throw std::invalid_argument("make_cubic_basis: requires k >= 4");
  SplineBasis basis;
  basis.a = a;
  basis.b = b;
  basis.k = k;
  basis.knots.resize(k + 4);
  const int interior = k - 4;
  for (int i = 0; i < 4; ++i) {
    basis.knots[i] = a;
    basis.knots[k + i] = b;
  }
  const double h = (b - a) / (interior + 1);
  for (int j = 1; j <= interior; ++j) basis.knots[3 + j] = a + j * h;
  return basis;
}

Eigen::VectorXd eval_basis(const SplineBasis& basis, double x, int deriv_order) {
  if (deriv_order < 0 || deriv_order > 2)
    throw std::invalid_argument("eval_basis: deriv_order must be 0, 1 or 2");
  if (x < basis.a || x > basis.b)
    throw std::invalid_argument("eval_basis: x outside [a, b]");
  const int span = find_span(basis, x);
  Eigen::Matrix<double, 3, kOrder> ders;
  basis_funs_derivs(basis.knots, span, x, deriv_order, ders);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.k);
  for (int j = 0; j < kOrder; ++j) out[span - kDegree + j] = ders(deriv_order, j);
  return out;
}

Eigen::MatrixXd design_matrix(const SplineBasis& basis, const Eigen::VectorXd& x,
                              int deriv_order) {
  Eigen::MatrixXd design(x.size(), basis.k);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    design.row(i) = eval_basis(basis, x[i], deriv_order).transpose();
  return design;
}

Eigen::MatrixXd curvature_penalty(const SplineBasis& basis) {
  const int k = basis.k;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(k, k);
  // 2-point Gauss-Legendre is exact for the piecewise-quadratic products of
  // second derivatives.
  const double g = 1.0 / std::sqrt(3.0);
  Eigen::Matrix<double, 3, kOrder> ders;
  for (int span = kDegree; span <= k - 1; ++span) {
    const double lo = basis.knots[span], hi = basis.knots[span + 1];
    const double half = 0.5 * (hi - lo);
    if (half <= 0.0) continue;
    const double mid = 0.5 * (lo + hi);
    for (const double node : {mid - half * g, mid + half * g}) {
      basis_funs_derivs(basis.knots, span, node, 2, ders);
      for (int r = 0; r < kOrder; ++r) {
        const int ir = span - kDegree + r;
        for (int c = 0; c < kOrder; ++c) {
          const int ic = span - kDegree + c;
          K(ir, ic) += half * ders(2, r) * ders(2, c);
        }
      }
    }
  }
  return K;
}

double eval_f_eta(const SplineBasis& basis, const Eigen::VectorXd& theta, double x) {
  if (theta.size() != basis.k)
    throw std::invalid_argument("eval_f_eta: theta length must equal k");
  if (x < basis.a) {
    const double fa = eval_basis(basis, basis.a, 0).dot(theta);
    const double sa = eval_basis(basis, basis.a, 1).dot(theta);
    return fa + sa * (x - basis.a);
  }
  if (x > basis.b) {
    const double fb = eval_basis(basis, basis.b, 0).dot(theta);
    const double sb = eval_basis(basis, basis.b, 1).dot(theta);
    return fb + sb * (x - basis.b);
  }
  return eval_basis(basis, x, 0).dot(theta);
}

}  // namespace nile
