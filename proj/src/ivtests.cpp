#include "nile/ivtests.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <stdexcept>

namespace nile {

double chi_squared_quantile(double p, int dof) {
  return boost::math::quantile(boost::math::chi_squared(dof), p);
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal(), p);
}

TestReport t1_statistic(const Eigen::VectorXd& residuals,
                        const Eigen::MatrixXd& instrument_design, double alpha) {
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("t1_statistic: alpha must be in (0, 1)");
  const double total = residuals.squaredNorm();
  if (total == 0.0)
    throw std::invalid_argument("t1_statistic: zero residual vector");
  const Eigen::Index n = residuals.size();
  const Eigen::Index k = instrument_design.cols();
  if (instrument_design.rows() != n)
    throw std::invalid_argument("t1_statistic: dimension mismatch");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(instrument_design);
  if (qr.rank() < k)
    throw std::invalid_argument("t1_statistic: instrument design is column rank deficient");
  // ||P r||^2 = ||Q1' r||^2 for the thin Q factor.
  const Eigen::VectorXd qtr =
      (qr.householderQ().transpose() * residuals).head(k);
  const double projected = qtr.squaredNorm();

  TestReport report;
  report.kind = TestKind::T1;
  report.alpha = alpha;
  report.statistic = static_cast<double>(n) * projected / total;
  report.threshold = chi_squared_quantile(1.0 - alpha, static_cast<int>(k));
  report.reject = report.statistic > report.threshold;
  return report;
}

TestReport t2_statistic(const Eigen::VectorXd& y, const Eigen::VectorXd& fitted,
                        const HatSpec& hat, double alpha) {
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("t2_statistic: alpha must be in (0, 1)");
  const Eigen::Index n = y.size();
  if (n < 2) throw std::invalid_argument("t2_statistic: needs n >= 2");
  if (fitted.size() != n || hat.design.rows() != n)
    throw std::invalid_argument("t2_statistic: dimension mismatch");
  const Eigen::VectorXd r = y - fitted;
  if (r.squaredNorm() == 0.0)
    throw std::invalid_argument("t2_statistic: zero residual vector");

  const Eigen::MatrixXd G = normal_matrix(hat.design, hat.penalty, hat.weight);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("t2_statistic: singular normal matrix");

  const Eigen::VectorXd pr = hat.design * ldlt.solve(hat.design.transpose() * r);
  const double sigma2 = (r - pr).squaredNorm() / static_cast<double>(n - 1);
  if (sigma2 <= 1e-14 * r.squaredNorm() / static_cast<double>(n - 1))
    throw std::invalid_argument("t2_statistic: zero residual variance estimate");

  // trace(P^2) and trace(P^4) through the k x k smoother S = G^-1 C'C.
  const Eigen::MatrixXd S = ldlt.solve(hat.design.transpose() * hat.design);
  const Eigen::MatrixXd S2 = S * S;
  const double c_n = S2.trace();
  const double d_n = std::sqrt(2.0 * (S2 * S2).trace());
  if (d_n == 0.0)
    throw std::invalid_argument("t2_statistic: degenerate smoother (d_n = 0)");

  TestReport report;
  report.kind = TestKind::T2;
  report.alpha = alpha;
  report.statistic = (pr.squaredNorm() - sigma2 * c_n) / (sigma2 * d_n);
  report.threshold = normal_quantile(1.0 - alpha);
  report.reject = report.statistic > report.threshold;
  return report;
}

}  // namespace nile
