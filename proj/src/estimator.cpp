#include "nile/estimator.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "nile/penreg.hpp"

namespace nile {

namespace {

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& normal, const Eigen::VectorXd& rhs,
                          const char* who) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal);
    std::ostringstream msg;
    msg << who << ": singular system (condition estimate "
        << eig.eigenvalues().maxCoeff() /
               std::max(eig.eigenvalues().minCoeff(), std::numeric_limits<double>::min())
        << ")";
    throw std::runtime_error(msg.str());
  }
  return ldlt.solve(rhs);
}

std::vector<double> effective_grid(const NileOptions& options) {
  return options.cv_grid.empty() ? default_cv_grid() : options.cv_grid;
}

}  // namespace

NileProblem NileProblem::assemble(const Eigen::MatrixXd& Bmat,
                                  const Eigen::MatrixXd& Cmat, const Eigen::VectorXd& y,
                                  double delta, const Eigen::MatrixXd& M) {
  // B'P^2 B = (C'B)' G^-1 (C'C) G^-1 (C'B) with G = C'C + delta M; everything
  // stays k x k.
  const Eigen::MatrixXd G = normal_matrix(Cmat, M, delta);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("NileProblem: singular instrument normal matrix");
  const Eigen::MatrixXd CtC = Cmat.transpose() * Cmat;
  const Eigen::MatrixXd CtB = Cmat.transpose() * Bmat;
  const Eigen::VectorXd Cty = Cmat.transpose() * y;
  const Eigen::MatrixXd GinvCtB = ldlt.solve(CtB);
  const Eigen::VectorXd GinvCty = ldlt.solve(Cty);

  NileProblem problem;
  problem.BtB = Bmat.transpose() * Bmat;
  problem.Bty = Bmat.transpose() * y;
  problem.BPPB = GinvCtB.transpose() * CtC * GinvCtB;
  problem.BPPy = GinvCtB.transpose() * CtC * GinvCty;
  return problem;
}

Eigen::VectorXd NileProblem::solve(double lambda, double gamma) const {
  if (lambda < 0.0 || gamma < 0.0)
    throw std::invalid_argument("NileProblem::solve: lambda and gamma must be >= 0");
  Eigen::MatrixXd normal = BtB + lambda * BPPB + gamma * K;
  normal.diagonal().array() += 1e-10 * BtB.trace() / static_cast<double>(BtB.cols());
  return solve_spd(normal, Bty + lambda * BPPy, "fit_theta");
}

Eigen::VectorXd NileProblem::solve_tsls_limit(double gamma_small) const {
  Eigen::MatrixXd normal = BPPB + gamma_small * K;
  normal.diagonal().array() += 1e-10 * BtB.trace() / static_cast<double>(BtB.cols());
  return solve_spd(normal, BPPy, "tsls_limit");
}

Eigen::VectorXd fit_theta(const Eigen::MatrixXd& Bmat, const Eigen::MatrixXd& Cmat,
                          const Eigen::VectorXd& y, double lambda, double gamma,
                          double delta, const Eigen::MatrixXd& K,
                          const Eigen::MatrixXd& M) {
  NileProblem problem = NileProblem::assemble(Bmat, Cmat, y, delta, M);
  problem.K = K;
  return problem.solve(lambda, gamma);
}

LambdaSearchResult lambda_search(const NileProblem& problem, double gamma,
                                 const TestFactory& test, const NileOptions& options) {
  LambdaSearchResult result;
  result.theta = problem.solve(0.0, gamma);
  result.report = test(result.theta);
  if (options.force_lambda_zero || !result.report.reject) {
    result.lambda_star = 0.0;
    return result;
  }

  // Exponential bracketing: 1, 2, 4, ... up to the cap.
  double lo = 0.0;
  double hi = 1.0;
  Eigen::VectorXd theta_hi;
  TestReport report_hi;
  bool accepted = false;
  while (hi <= options.lambda_cap) {
    theta_hi = problem.solve(hi, gamma);
    report_hi = test(theta_hi);
    if (!report_hi.reject) {
      accepted = true;
      break;
    }
    lo = hi;
    hi *= 2.0;
  }
  if (!accepted) {
    result.fallback_used = true;
    result.lambda_star = std::numeric_limits<double>::infinity();
    result.theta = problem.solve_tsls_limit(gamma * 1e-3);
    result.report = test(result.theta);
    return result;
  }

  while (hi - lo > options.binary_search_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    const Eigen::VectorXd theta_mid = problem.solve(mid, gamma);
    const TestReport report_mid = test(theta_mid);
    if (report_mid.reject) {
      lo = mid;
    } else {
      hi = mid;
      theta_hi = theta_mid;
      report_hi = report_mid;
    }
  }
  result.lambda_star = hi;
  result.theta = theta_hi;
  result.report = report_hi;
  return result;
}

NileFit nile_fit(const Dataset& data, const NileOptions& options) {
  const Eigen::Index n = data.n();
  if (options.k < 4) throw std::invalid_argument("nile_fit: k must be >= 4");
  if (options.alpha <= 0.0 || options.alpha >= 1.0)
    throw std::invalid_argument("nile_fit: alpha must be in (0, 1)");
  if (n < 2 * options.cv_folds)
    throw std::invalid_argument("nile_fit: too few observations for " +
                                std::to_string(options.cv_folds) + "-fold CV");
  const double x_lo = data.x.minCoeff(), x_hi = data.x.maxCoeff();
  const double a_lo = data.a.minCoeff(), a_hi = data.a.maxCoeff();
  if (!(x_lo < x_hi)) throw std::invalid_argument("nile_fit: X column is constant");
  if (!(a_lo < a_hi)) throw std::invalid_argument("nile_fit: A column is constant");

  NileFit fit;
  fit.basis_B = make_cubic_basis(x_lo, x_hi, options.k);
  fit.basis_C = make_cubic_basis(a_lo, a_hi, options.k);
  fit.alpha = options.alpha;
  fit.test_kind = options.test_kind;
  fit.seed = options.seed;

  const Eigen::MatrixXd Bmat = design_matrix(fit.basis_B, data.x);
  const Eigen::MatrixXd Cmat = design_matrix(fit.basis_C, data.a);
  const Eigen::MatrixXd K = curvature_penalty(fit.basis_B);
  const Eigen::MatrixXd M = curvature_penalty(fit.basis_C);

  const std::vector<double> grid = effective_grid(options);
  fit.delta = cv_penalty(Cmat, M, data.y, options.cv_folds, grid, options.seed);
  fit.gamma = cv_penalty(Bmat, K, data.y, options.cv_folds, grid, options.seed);

  NileProblem problem = NileProblem::assemble(Bmat, Cmat, data.y, fit.delta, M);
  problem.K = K;

  const double y_scale = data.y.squaredNorm();
  const TestFactory test = [&](const Eigen::VectorXd& theta) {
    const Eigen::VectorXd fitted = Bmat * theta;
    const Eigen::VectorXd r = data.y - fitted;
    if (r.squaredNorm() <= 1e-18 * std::max(y_scale, 1.0)) {
      // exact fit: nothing left to test, accept with statistic 0
      TestReport report;
      report.kind = options.test_kind;
      report.alpha = options.alpha;
      report.threshold = options.test_kind == TestKind::T1
                             ? chi_squared_quantile(1.0 - options.alpha, options.k)
                             : normal_quantile(1.0 - options.alpha);
      return report;
    }
    if (options.test_kind == TestKind::T1)
      return t1_statistic(r, Cmat, options.alpha);
    return t2_statistic(data.y, fitted, HatSpec{Cmat, M, fit.delta}, options.alpha);
  };

  const LambdaSearchResult search = lambda_search(problem, fit.gamma, test, options);
  fit.lambda_star = search.lambda_star;
  fit.fallback_used = search.fallback_used;
  fit.test_at_solution = search.report;
  if (search.fallback_used) {
    fit.theta = search.theta;
  } else {
    fit.gamma *= 1.0 + search.lambda_star;
    fit.theta = problem.solve(search.lambda_star, fit.gamma);
  }
  return fit;
}

double predict(const NileFit& fit, double x) {
  return eval_f_eta(fit.basis_B, fit.theta, x);
}

std::string serialize_fit(const NileFit& fit) {
  nlohmann::json doc;
  doc["theta"] = std::vector<double>(fit.theta.data(), fit.theta.data() + fit.theta.size());
  doc["a"] = fit.basis_B.a;
  doc["b"] = fit.basis_B.b;
  doc["k"] = fit.basis_B.k;
  doc["knots"] =
      std::vector<double>(fit.basis_B.knots.data(),
                          fit.basis_B.knots.data() + fit.basis_B.knots.size());
  doc["gamma"] = fit.gamma;
  doc["delta"] = fit.delta;
  if (std::isinf(fit.lambda_star))
    doc["lambda_star"] = "infinity";
  else
    doc["lambda_star"] = fit.lambda_star;
  doc["fallback_used"] = fit.fallback_used;
  doc["alpha"] = fit.alpha;
  doc["test_kind"] = fit.test_kind == TestKind::T1 ? "t1" : "t2";
  doc["seed"] = fit.seed;
  return doc.dump(2) + "\n";
}

NileFit parse_fit(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("fit artifact: invalid JSON: ") + e.what());
  }
  NileFit fit;
  try {
    const auto theta = doc.at("theta").get<std::vector<double>>();
    const auto knots = doc.at("knots").get<std::vector<double>>();
    fit.basis_B.a = doc.at("a").get<double>();
    fit.basis_B.b = doc.at("b").get<double>();
    fit.basis_B.k = doc.at("k").get<int>();
    fit.basis_B.knots =
        Eigen::Map<const Eigen::VectorXd>(knots.data(), static_cast<Eigen::Index>(knots.size()));
    fit.theta =
        Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    fit.gamma = doc.at("gamma").get<double>();
    fit.delta = doc.at("delta").get<double>();
    if (doc.at("lambda_star").is_string())
      fit.lambda_star = std::numeric_limits<double>::infinity();
    else
      fit.lambda_star = doc.at("lambda_star").get<double>();
    fit.fallback_used = doc.at("fallback_used").get<bool>();
    fit.alpha = doc.at("alpha").get<double>();
    fit.test_kind = doc.at("test_kind").get<std::string>() == "t1" ? TestKind::T1
                                                                   : TestKind::T2;
    fit.seed = doc.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("fit artifact: missing or mistyped field: ") +
                             e.what());
  }

  // validate the basis invariants before anyone evaluates it
  if (!(fit.basis_B.a < fit.basis_B.b))
    throw std::runtime_error("fit artifact: requires a < b");
  if (fit.basis_B.k < 4) throw std::runtime_error("fit artifact: requires k >= 4");
  if (fit.theta.size() != fit.basis_B.k)
    throw std::runtime_error("fit artifact: theta length differs from k");
  if (fit.basis_B.knots.size() != fit.basis_B.k + 4)
    throw std::runtime_error("fit artifact: knot vector length differs from k + 4");
  for (Eigen::Index i = 0; i + 1 < fit.basis_B.knots.size(); ++i)
    if (fit.basis_B.knots[i] > fit.basis_B.knots[i + 1])
      throw std::runtime_error("fit artifact: knots are not nondecreasing");
  for (int i = 0; i < 4; ++i) {
    if (fit.basis_B.knots[i] != fit.basis_B.a ||
        fit.basis_B.knots[fit.basis_B.k + i] != fit.basis_B.b)
      throw std::runtime_error("fit artifact: knots are not clamped at the boundaries");
  }
  if (fit.lambda_star < 0.0)
    throw std::runtime_error("fit artifact: lambda_star must be >= 0");
  return fit;
}

void write_fit(const NileFit& fit, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << serialize_fit(fit);
}

NileFit read_fit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_fit(buf.str());
}

}  // namespace nile
