#include "nile/penreg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace nile {

namespace {

Eigen::LDLT<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& normal) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    std::ostringstream msg;
    msg << "penreg: singular normal matrix after jitter (condition estimate "
        << hi / std::max(lo, std::numeric_limits<double>::min()) << ")";
    throw std::runtime_error(msg.str());
  }
  return ldlt;
}

}  // namespace

Eigen::MatrixXd normal_matrix(const Eigen::MatrixXd& design,
                              const Eigen::MatrixXd& penalty, double weight) {
  if (weight < 0.0) throw std::invalid_argument("penreg: weight must be >= 0");
  Eigen::MatrixXd normal = design.transpose() * design;
  if (weight > 0.0) normal += weight * penalty;
  const double jitter = 1e-10 * (design.transpose() * design).trace() /
                        static_cast<double>(design.cols());
  normal.diagonal().array() += jitter;
  return normal;
}

Eigen::VectorXd hat_apply(const HatSpec& spec, const Eigen::VectorXd& v) {
  if (v.size() != spec.design.rows())
    throw std::invalid_argument("hat_apply: vector length must match design rows");
  const auto ldlt = factorize(normal_matrix(spec.design, spec.penalty, spec.weight));
  return spec.design * ldlt.solve(spec.design.transpose() * v);
}

Eigen::VectorXd penalized_solve(const Eigen::MatrixXd& design,
                                const Eigen::MatrixXd& penalty, double weight,
                                const Eigen::VectorXd& y) {
  const auto ldlt = factorize(normal_matrix(design, penalty, weight));
  return ldlt.solve(design.transpose() * y);
}

double cv_penalty(const Eigen::MatrixXd& design, const Eigen::MatrixXd& penalty,
                  const Eigen::VectorXd& y, int folds,
                  const std::vector<double>& grid, std::uint64_t seed) {
  const Eigen::Index n = design.rows();
  const Eigen::Index k = design.cols();
  if (folds < 2) throw std::invalid_argument("cv_penalty: folds must be >= 2");
  if (n < folds) throw std::invalid_argument("cv_penalty: fewer rows than folds");
  if (grid.empty()) throw std::invalid_argument("cv_penalty: empty grid");

  // One shuffled partition into contiguous blocks, shared across the grid.
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  struct Fold {
    Eigen::MatrixXd train_normal0;  // D'D over the training rows (no penalty)
    Eigen::VectorXd train_dty;
    Eigen::MatrixXd test_design;
    Eigen::VectorXd test_y;
    double jitter = 0.0;
  };
  std::vector<Fold> fold_data(folds);
  for (int f = 0; f < folds; ++f) {
    const Eigen::Index lo = n * f / folds;
    const Eigen::Index hi = n * (f + 1) / folds;
    const Eigen::Index n_test = hi - lo;
    if (n_test < 1) throw std::invalid_argument("cv_penalty: empty fold");
    Fold& fold = fold_data[f];
    fold.test_design.resize(n_test, k);
    fold.test_y.resize(n_test);
    Eigen::MatrixXd train(n - n_test, k);
    Eigen::VectorXd train_y(n - n_test);
    Eigen::Index it = 0, iv = 0;
    for (Eigen::Index pos = 0; pos < n; ++pos) {
      const Eigen::Index row = order[pos];
      if (pos >= lo && pos < hi) {
        fold.test_design.row(iv) = design.row(row);
        fold.test_y[iv++] = y[row];
      } else {
        train.row(it) = design.row(row);
        train_y[it++] = y[row];
      }
    }
    fold.train_normal0 = train.transpose() * train;
    fold.train_dty = train.transpose() * train_y;
    fold.jitter = 1e-10 * fold.train_normal0.trace() / static_cast<double>(k);
  }

  double best_weight = grid.front();
  double best_error = std::numeric_limits<double>::infinity();
  for (const double w : grid) {
    if (w < 0.0) throw std::invalid_argument("cv_penalty: negative grid value");
    double error = 0.0;
    for (const Fold& fold : fold_data) {
      Eigen::MatrixXd normal = fold.train_normal0 + w * penalty;
      normal.diagonal().array() += fold.jitter;
      const Eigen::VectorXd coef = factorize(normal).solve(fold.train_dty);
      error += (fold.test_y - fold.test_design * coef).squaredNorm();
    }
    if (error < best_error || (error == best_error && w > best_weight)) {
      best_error = error;
      best_weight = w;
    }
  }
  return best_weight;
}

std::vector<double> default_cv_grid() {
  std::vector<double> grid(25);
  for (int i = 0; i < 25; ++i) grid[i] = std::pow(10.0, -4.0 + 8.0 * i / 24.0);
  return grid;
}

}  // namespace nile
