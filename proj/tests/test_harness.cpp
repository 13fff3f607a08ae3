#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <unistd.h>

#include "doctest.h"
#include "logibeta/config.hpp"
#include "logibeta/csv.hpp"
#include "logibeta/simulate.hpp"
#include "logibeta/special_math.hpp"
#include "stat_tests.hpp"

using namespace logibeta;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("logibeta_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("cosine600 scenario matches its generating curve") {
  const BinarySimulation sim = simulate_cosine600(7);
  CHECK(sim.train.size() == 600);
  for (int i = 0; i < 600; ++i) {
    CHECK(sim.train.x(i, 0) >= 0.0);
    CHECK(sim.train.x(i, 0) <= 3.0);
    CHECK(std::abs(sim.train_prob(i) -
                   logistic(std::cos(std::numbers::pi * sim.train.x(i, 0)))) < 1e-12);
  }
  // determinism
  const BinarySimulation sim2 = simulate_cosine600(7);
  CHECK((sim.train.x - sim2.train.x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spatial binary scenarios produce valid probabilities on [0,1]^2") {
  for (SpatialTruth truth : {SpatialTruth::kLbp, SpatialTruth::kGaussianCopula}) {
    const BinarySimulation sim = simulate_spatial_binary(truth, 0.2, 120, 30, 9);
    CHECK(sim.train.size() == 120);
    CHECK(sim.test.size() == 30);
    CHECK(sim.train_prob.minCoeff() > 0.0);
    CHECK(sim.train_prob.maxCoeff() < 1.0);
    CHECK(sim.train.x.minCoeff() >= 0.0);
    CHECK(sim.train.x.maxCoeff() <= 1.0);
  }
  // copula probabilities have Beta(1,2) marginals; use one point per
  // independent field so the KS sample is i.i.d.
  std::vector<double> p;
  for (int rep = 0; rep < 2500; ++rep) {
    const BinarySimulation sim =
        simulate_spatial_binary(SpatialTruth::kGaussianCopula, 0.2, 4, 0, 1000 + rep);
    p.push_back(sim.train_prob(0));
  }
  CHECK(testsup::ks_test_cdf(p, [](double v) { return 1.0 - (1.0 - v) * (1.0 - v); }) > 0.01);
}

TEST_CASE("scenario A weights and scenario B branches") {
  CHECK(scenario_a_params(0.0).w1 == doctest::Approx(1.0));
  CHECK(scenario_a_params(1.0).w1 == doctest::Approx(std::exp(-2.0)));
  // y samples at x ~ 3 have mean 2, sd 0.05
  Rng rng(3);
  double s = 0.0, s2 = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const ScenarioBRow p = scenario_b_params(3.0);
    const double y = p.mu + p.sd * rnorm(rng);
    s += y;
    s2 += y * y;
  }
  CHECK(s / n == doctest::Approx(2.0).epsilon(3e-3));
  CHECK(std::sqrt(s2 / n - (s / n) * (s / n)) == doctest::Approx(0.05).epsilon(5e-2));
  // density integrates to one at representative x values (piecewise, so
  // the adaptive rule cannot step over the narrow component spikes)
  auto piecewise = [](auto f, double lo, double hi) {
    double total = 0.0;
    const int pieces = 64;
    const double h = (hi - lo) / pieces;
    for (int k = 0; k < pieces; ++k) {
      total += testsup::integrate(f, lo + k * h, lo + (k + 1) * h, 1e-12);
    }
    return total;
  };
  for (double x : {0.2, 0.9}) {
    CHECK(piecewise([x](double y) { return scenario_a_density(y, x); }, -2.0, 3.0) ==
          doctest::Approx(1.0).epsilon(1e-6));
  }
  for (double x : {-1.0, 3.0, 8.0}) {
    CHECK(piecewise([x](double y) { return scenario_b_density(y, x); }, -3.0, 12.0) ==
          doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("csv round trip and error context") {
  TempDir tmp;
  const fs::path file = tmp.path / "t.csv";
  Eigen::MatrixXd values(3, 2);
  values << 1.0, 2.5, -3.25, 1e-17, 4.0, 1234567.875;
  write_csv(file, {"alpha", "beta"}, values);
  const CsvTable table = read_csv(file);
  REQUIRE(table.header.size() == 2);
  CHECK(table.header[0] == "alpha");
  CHECK(table.column("beta") == 1);
  CHECK(table.column("missing") == -1);
  CHECK((table.values - values).cwiseAbs().maxCoeff() == 0.0);

  // malformed cell: error names file and row
  {
    std::ofstream bad(tmp.path / "bad.csv");
    bad << "x,y\n1,2\n3,oops\n";
  }
  try {
    read_csv(tmp.path / "bad.csv");
    FAIL("expected CsvError");
  } catch (const CsvError& e) {
    const std::string what = e.what();
    CHECK(what.find("bad.csv") != std::string::npos);
    CHECK(what.find(":3") != std::string::npos);
  }
  CHECK_THROWS_AS(read_csv(tmp.path / "absent.csv"), CsvError);
}

TEST_CASE("config parsing, defaults, and grids") {
  const Config config = Config::from_string(R"(
# comment
[shape]
a = 2.0
b = 4.0
[kernel]
type = matern
range = 0.3
[strategy]
blocked = false
[run]
iterations = 50
)");
  CHECK(config.get_double("shape", "a", 1.0) == 2.0);
  CHECK(config.get_double("shape", "missing", 9.0) == 9.0);
  CHECK(config.get_bool("strategy", "blocked", true) == false);
  CHECK(config.get_int("run", "iterations", 0) == 50);
  CHECK_THROWS_AS(Config::from_string("novalue\n"), ConfigError);

  const auto grid = parse_grid("0.01:0.01:0.05");
  REQUIRE(grid.size() == 5);
  CHECK(grid.front() == doctest::Approx(0.01));
  CHECK(grid.back() == doctest::Approx(0.05));
  const auto list = parse_grid("0.1,0.2,0.4");
  REQUIRE(list.size() == 3);
  CHECK(list[2] == doctest::Approx(0.4));

  // the documented template parses and reproduces its own defaults
  const Config defaults = Config::from_string(default_config_text());
  CHECK(defaults.get_double("mixture", "b", 0.0) == 1.0);
  CHECK(defaults.get_int("mixture", "h", 0) == 20);
}

TEST_CASE("config builds each kernel variant") {
  {
    const Config c = Config::from_string("[kernel]\ntype = matern\nrange = 0.25\nnu = 1.5\n");
    const auto k = build_kernel_from_config(c, nullptr);
    Eigen::RowVectorXd x0(1), x1(1);
    x0 << 0.0;
    x1 << 0.25;
    CHECK((*k)(x0, x1) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-10));
  }
  {
    const Config c = Config::from_string("[kernel]\ntype = feature_map\ndf = 6\n");
    Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(40, 0.0, 1.0);
    const auto k = build_kernel_from_config(c, &xs);
    Points pts(3, 1);
    pts << 0.1, 0.5, 0.9;
    CHECK(build_matrix(*k, pts).factor_is_exact());
  }
  {
    const Config c = Config::from_string("[kernel]\ntype = mpp\nknot_count = 8\n");
    Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(20, 0.0, 2.0);
    const auto k = build_kernel_from_config(c, &xs);
    Points pts(4, 1);
    pts << 0.1, 0.5, 1.2, 1.9;
    const CorrelationMatrix r = build_matrix(*k, pts);
    CHECK(r.has_low_rank());
  }
  {
    const Config c = Config::from_string("[kernel]\ntype = nope\n");
    CHECK_THROWS_AS(build_kernel_from_config(c, nullptr), ConfigError);
  }
}

TEST_CASE("binary config construction expands range grids") {
  BinaryDataset d;
  d.x = Eigen::MatrixXd::Zero(4, 2);
  d.z = Eigen::VectorXi::Zero(4);
  d.z(1) = 1;
  const Config c = Config::from_string(R"(
[shape]
a = 1.0
b = 2.0
[kernel]
type = matern
nu = 1.5
range_grid = 0.1:0.1:0.5
[run]
iterations = 10
burn_in = 2
)");
  const BinaryRegressionConfig bc = binary_config_from(c, d);
  CHECK(bc.kernel_grid.size() == 5);
  CHECK(bc.kernel_grid_values(4) == doctest::Approx(0.5));
  CHECK(bc.iterations == 10);
}

TEST_CASE("standardizer centers, scales, and round-trips") {
  RegressionDataset d;
  d.x = Eigen::VectorXd::LinSpaced(50, -3.0, 7.0);
  d.y = 2.0 * d.x.array() + 5.0;
  const Standardizer tf = Standardizer::fit(d);
  const RegressionDataset s = tf.apply(d);
  CHECK(s.x.mean() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.y.mean() == doctest::Approx(0.0).epsilon(1e-12));
  const double sd_y = std::sqrt((s.y.array() - s.y.mean()).square().sum() / (s.size() - 1));
  CHECK(sd_y == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tf.from_std_y(tf.to_std_y(37.0)) == doctest::Approx(37.0).epsilon(1e-12));
  // density transform keeps total mass: f_orig(y) = f_std(std(y))/sd_y
  CHECK(tf.density_to_original(1.0) == doctest::Approx(1.0 / tf.sd_y));
}
