#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "nile/dataset.hpp"
#include "nile/estimator.hpp"

namespace {

const std::string kCli = NILE_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args;
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

int line_count(const std::string& text) {
  int n = 0;
  for (const char c : text)
    if (c == '\n') ++n;
  return n;
}

std::string write_sample_csv(const std::string& path, unsigned seed) {
  nile::Dataset d;
  const int n = 200;
  d.x.resize(n);
  d.y.resize(n);
  d.a.resize(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int i = 0; i < n; ++i) {
    const double a = unif(rng);
    const double h = unif(rng);
    d.a[i] = a;
    d.x[i] = 0.6 * a + 0.8 * h;
    d.y[i] = 1.5 * d.x[i] + 0.3 * h + 0.2 * unif(rng);
  }
  nile::write_dataset_csv(d, path);
  return path;
}

}  // namespace

TEST_CASE("fit writes an artifact on valid data and predicts on a grid") {
  const std::string csv = write_sample_csv("cli_data.csv", 1);
  CHECK(run("fit " + csv + " --k 12 --seed 3 --out cli_fit.json > cli_fit.log") == 0);

  const nile::NileFit fit = nile::read_fit("cli_fit.json");
  CHECK(fit.basis_B.k == 12);

  const std::string log = slurp("cli_fit.log");
  CHECK(log.find("lambda_star = ") != std::string::npos);
  CHECK(log.find("gamma = ") != std::string::npos);

  SUBCASE("grid predictions have one row per point") {
    CHECK(run("predict cli_fit.json --grid -2:2:0.01 --out cli_pred.csv") == 0);
    const std::string pred = slurp("cli_pred.csv");
    CHECK(line_count(pred) == 402);  // header + 401 points
    CHECK(pred.rfind("x,f_hat\n", 0) == 0);
  }

  SUBCASE("file predictions agree with in-memory predict bitwise") {
    CHECK(run("predict cli_fit.json --x -3 --x 0.25 --x 4 --out cli_pred2.csv") == 0);
    const std::string pred = slurp("cli_pred2.csv");
    std::istringstream lines(pred);
    std::string line;
    std::getline(lines, line);  // header
    for (const double x : {-3.0, 0.25, 4.0}) {
      REQUIRE(std::getline(lines, line));
      const std::string expected = nile::format_double(x) + "," +
                                   nile::format_double(nile::predict(fit, x));
      CHECK(line == expected);
    }
  }

  SUBCASE("predict without points is an error") {
    CHECK(run("predict cli_fit.json 2> cli_err.log") != 0);
  }

  std::remove("cli_data.csv");
  std::remove("cli_fit.json");
  std::remove("cli_fit.log");
}

TEST_CASE("malformed input is reported with a nonzero exit") {
  {
    std::ofstream out("cli_bad.csv");
    out << "x,y\n1,2\n";  // missing the instrument column
  }
  CHECK(run("fit cli_bad.csv 2> cli_bad.log") != 0);
  const std::string err = slurp("cli_bad.log");
  CHECK(err.find("a") != std::string::npos);
  std::remove("cli_bad.csv");
  std::remove("cli_bad.log");

  CHECK(run("fit no_such_file.csv 2> /dev/null") != 0);
}

TEST_CASE("simulate is seed-deterministic and honors the config file") {
  {
    std::ofstream out("cli_sim.conf");
    out << "# unconfounded design\n"
        << "alpha_A = 0.81649658092772603\n"
        << "alpha_H = 0\n"
        << "alpha_eps = 0.57735026918962573\n"
        << "n = 50\n";
  }
  CHECK(run("simulate --config cli_sim.conf --seed 9 --out cli_sim_a.csv") == 0);
  CHECK(run("simulate --config cli_sim.conf --seed 9 --out cli_sim_b.csv") == 0);
  CHECK(run("simulate --config cli_sim.conf --seed 10 --out cli_sim_c.csv") == 0);
  const std::string a = slurp("cli_sim_a.csv");
  CHECK(a == slurp("cli_sim_b.csv"));
  CHECK(a != slurp("cli_sim_c.csv"));
  CHECK(a.rfind("x,y,a\n", 0) == 0);
  CHECK(line_count(a) == 51);

  SUBCASE("unknown config key lists the valid ones") {
    {
      std::ofstream out("cli_sim_bad.conf");
      out << "alpha_a = 0.5\n";  // wrong case
    }
    CHECK(run("simulate --config cli_sim_bad.conf 2> cli_sim_bad.log") != 0);
    const std::string err = slurp("cli_sim_bad.log");
    CHECK(err.find("unknown key") != std::string::npos);
    CHECK(err.find("alpha_A") != std::string::npos);
    std::remove("cli_sim_bad.conf");
    std::remove("cli_sim_bad.log");
  }

  std::remove("cli_sim.conf");
  std::remove("cli_sim_a.csv");
  std::remove("cli_sim_b.csv");
  std::remove("cli_sim_c.csv");
}

TEST_CASE("experiment produces row and summary CSVs with the right schema") {
  {
    std::ofstream out("cli_exp.conf");
    out << "n = 100\n"
        << "n_models = 2\n"
        << "k = 12\n"
        << "master_seed = 4\n"
        << "strength_max = 1\n"
        << "strength_step = 0.5\n"
        << "eval_grid_points = 101\n";
  }
  CHECK(run("experiment --config cli_exp.conf --rows cli_rows.csv --out cli_sum.csv") ==
        0);
  const std::string rows = slurp("cli_rows.csv");
  CHECK(rows.rfind("config_id,method,model_idx,strength,risk,lambda_star\n", 0) == 0);
  CHECK(line_count(rows) == 1 + 2 * 2 * 3);  // models x methods x strengths
  const std::string summary = slurp("cli_sum.csv");
  CHECK(summary.rfind("config_id,method,strength,mean_risk,n_models,mean_lambda_star\n",
                      0) == 0);
  CHECK(line_count(summary) == 1 + 2 * 3);
  std::remove("cli_exp.conf");
  std::remove("cli_rows.csv");
  std::remove("cli_sum.csv");
}

TEST_CASE("check-theory passes and writes the scenario table") {
  CHECK(run("check-theory --seed 7 --out cli_theory.csv") == 0);
  const std::string csv = slurp("cli_theory.csv");
  CHECK(csv.rfind("scenario,candidate,worst_case_risk,bound,pass\n", 0) == 0);
  CHECK(csv.find("fail") == std::string::npos);
  std::remove("cli_theory.csv");
}

TEST_CASE("unknown subcommands and bad flags fail cleanly") {
  CHECK(run("frobnicate 2> /dev/null") != 0);
  CHECK(run("fit 2> /dev/null") != 0);  // missing required argument
}
