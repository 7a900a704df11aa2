#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace nile {

/// Penalized hat operator v -> D (D'D + w P)^-1 D' v.
struct HatSpec {
  Eigen::MatrixXd design;   // n x k
  Eigen::MatrixXd penalty;  // k x k, symmetric PSD
  double weight = 0.0;
};

/// Normal matrix D'D + w P plus a small ridge jitter proportional to
/// trace(D'D)/k, which guards against rank deficiency of clamped spline
/// designs near the boundary.
Eigen::MatrixXd normal_matrix(const Eigen::MatrixXd& design,
                              const Eigen::MatrixXd& penalty, double weight);

/// Applies the hat operator without materializing the n x n matrix.
Eigen::VectorXd hat_apply(const HatSpec& spec, const Eigen::VectorXd& v);

/// argmin_c ||y - D c||^2 + w c' P c.
Eigen::VectorXd penalized_solve(const Eigen::MatrixXd& design,
                                const Eigen::MatrixXd& penalty, double weight,
                                const Eigen::VectorXd& y);

/// 10-fold (by default) cross-validation of the penalty weight. Rows are
/// shuffled once by `seed` and split into `folds` contiguous blocks shared
/// across the whole grid; ties in out-of-sample error break toward the
/// larger weight.
double cv_penalty(const Eigen::MatrixXd& design, const Eigen::MatrixXd& penalty,
                  const Eigen::VectorXd& y, int folds,
                  const std::vector<double>& grid, std::uint64_t seed);

/// 25 log-spaced weights from 1e-4 to 1e4.
std::vector<double> default_cv_grid();

}  // namespace nile
