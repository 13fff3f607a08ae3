// Command-line surface of the logistic-beta toolkit:
//   simulate      scenario data -> CSV files
//   fit-binary    latent-process binary regression chain
//   fit-ddp       LB-DDP mixture density regression chain
//   predict       posterior summaries at new points from saved draws
//   prior-analyze tie-probability / correlation curves and competitor bounds
//   diagnose      ESS / acceptance / error report from saved draws
//   replicate     named desk-scale experiments, concurrent replicates
//
// Exit codes: 0 success, 1 data or runtime error, 2 usage error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <numbers>
#include <sstream>

#include "logibeta/binary_regression.hpp"
#include "logibeta/config.hpp"
#include "logibeta/csv.hpp"
#include "logibeta/ddp_mixture.hpp"
#include "logibeta/diagnostics.hpp"
#include "logibeta/prior_dependence.hpp"
#include "logibeta/simulate.hpp"
#include "logibeta/special_math.hpp"

namespace fs = std::filesystem;
using namespace logibeta;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;

  CommonArgs() {
    const char* env = std::getenv("LOGIBETA_OUT_DIR");
    out_dir = env != nullptr ? env : ".";
  }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file");
  cmd->add_option("--out", args.out_dir,
                  "output directory (default: $LOGIBETA_OUT_DIR or .)");
  cmd->add_option("--seed", args.seed, "random seed (overrides the config)")
      ->each([&args](const std::string&) { args.seed_set = true; });
}

Config load_config(const CommonArgs& args) {
  Config config =
      args.config_path.empty() ? Config::from_string("") : Config::from_file(args.config_path);
  if (args.seed_set) config.set("run", "seed", std::to_string(args.seed));
  return config;
}

Eigen::MatrixXd hcat(const std::vector<Eigen::VectorXd>& cols) {
  Eigen::MatrixXd out(cols.front().size(), static_cast<long>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<long>(j)) = cols[j];
  return out;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  CommonArgs common;
  std::string scenario;
  int n = 500;
  int n_test = 100;
  double range = 0.2;
};

void write_binary_files(const fs::path& dir, const BinaryDataset& data,
                        const Eigen::VectorXd& prob, const std::string& prefix) {
  const int d = static_cast<int>(data.x.cols());
  std::vector<std::string> header;
  for (int j = 0; j < d; ++j) header.push_back("x" + std::to_string(j + 1));
  std::vector<Eigen::VectorXd> cols;
  for (int j = 0; j < d; ++j) cols.push_back(data.x.col(j));
  auto truth_header = header;
  auto truth_cols = cols;
  header.push_back("z");
  cols.push_back(data.z.cast<double>());
  write_csv(dir / (prefix + "data.csv"), header, hcat(cols));
  truth_header.push_back("p");
  truth_cols.push_back(prob);
  write_csv(dir / (prefix + "truth.csv"), truth_header, hcat(truth_cols));
}

int cmd_simulate(const SimulateArgs& args) {
  const Config config = load_config(args.common);
  const std::uint64_t seed = config.get_u64("run", "seed", 1);
  const fs::path dir(args.common.out_dir);
  fs::create_directories(dir);

  if (args.scenario == "cosine600") {
    const BinarySimulation sim = simulate_cosine600(seed);
    write_binary_files(dir, sim.train, sim.train_prob, "");
  } else if (args.scenario == "spatial-lbp" || args.scenario == "spatial-copula") {
    const SpatialTruth truth = args.scenario == "spatial-lbp" ? SpatialTruth::kLbp
                                                              : SpatialTruth::kGaussianCopula;
    const BinarySimulation sim =
        simulate_spatial_binary(truth, args.range, args.n, args.n_test, seed);
    write_binary_files(dir, sim.train, sim.train_prob, "");
    write_binary_files(dir, sim.test, sim.test_prob, "test_");
  } else if (args.scenario == "scenario-a") {
    const RegressionDataset data = simulate_scenario_a(args.n, seed);
    write_csv(dir / "data.csv", {"x", "y"}, hcat({data.x, data.y}));
    Eigen::MatrixXd truth(data.size(), 6);
    for (int i = 0; i < data.size(); ++i) {
      const ScenarioARow p = scenario_a_params(data.x(i));
      truth.row(i) << data.x(i), p.w1, p.mu1, p.sd1, p.mu2, p.sd2;
    }
    write_csv(dir / "truth.csv", {"x", "w1", "mu1", "sd1", "mu2", "sd2"}, truth);
  } else if (args.scenario == "scenario-b") {
    const RegressionDataset data = simulate_scenario_b(args.n, seed);
    write_csv(dir / "data.csv", {"x", "y"}, hcat({data.x, data.y}));
    Eigen::MatrixXd truth(data.size(), 3);
    for (int i = 0; i < data.size(); ++i) {
      const ScenarioBRow p = scenario_b_params(data.x(i));
      truth.row(i) << data.x(i), p.mu, p.sd;
    }
    write_csv(dir / "truth.csv", {"x", "mu", "sd"}, truth);
  } else {
    std::cerr << "unknown scenario '" << args.scenario << "'\n";
    return 2;
  }
  std::cout << "wrote " << (dir / "data.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit-binary
// ---------------------------------------------------------------------------

BinaryDataset read_binary_csv(const fs::path& file) {
  const CsvTable table = read_csv(file);
  const int zc = table.column("z");
  if (zc < 0) throw CsvError(file, 1, "missing 'z' column");
  BinaryDataset d;
  const int dim = static_cast<int>(table.header.size()) - 1;
  if (dim < 1 || dim > 2) throw CsvError(file, 1, "expected x1[,x2],z columns");
  d.x.resize(table.values.rows(), dim);
  int jx = 0;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (static_cast<int>(j) == zc) continue;
    d.x.col(jx++) = table.values.col(static_cast<long>(j));
  }
  d.z.resize(table.values.rows());
  for (long i = 0; i < table.values.rows(); ++i) {
    const double v = table.values(i, zc);
    if (v != 0.0 && v != 1.0) throw CsvError(file, i + 2, "responses must be 0 or 1");
    d.z(static_cast<int>(i)) = static_cast<int>(v);
  }
  validate_dataset(d);
  return d;
}

RegressionDataset read_regression_csv(const fs::path& file) {
  const CsvTable table = read_csv(file);
  const int xc = table.column("x");
  const int yc = table.column("y");
  if (xc < 0 || yc < 0) throw CsvError(file, 1, "expected x,y columns");
  RegressionDataset d;
  d.x = table.values.col(xc);
  d.y = table.values.col(yc);
  validate_dataset(d);
  return d;
}

void write_model_ini(const fs::path& file, const Config& config, const std::string& kind,
                     double seconds, double lambda_rate, double ab_rate) {
  std::ofstream out(file);
  out << "# resolved model context (written by logibeta; consumed by predict/diagnose)\n";
  out << "[meta]\nkind = " << kind << "\nsampler_seconds = " << seconds
      << "\nlambda_acceptance = " << lambda_rate << "\nab_acceptance = " << ab_rate << "\n\n";
  for (const char* section : {"shape", "kernel", "strategy", "ab_prior", "run", "mixture"}) {
    out << "[" << section << "]\n";
    for (const char* key :
         {"a", "b", "type", "range", "nu", "range_grid", "rho", "domain_lo", "domain_hi", "df",
          "knots", "knot_count", "blocked", "adapted", "lambda_sampler", "particles", "rank",
          "enabled", "mean_log_a", "mean_log_b", "sd_log", "rw_step", "iterations", "burn_in",
          "seed", "polya_truncation", "h", "discount", "sigma_beta", "a_tau", "b_tau",
          "standardize"}) {
      if (config.has(section, key)) out << key << " = " << config.get(section, key, "") << "\n";
    }
    out << "\n";
  }
}

void write_binary_fit(const fs::path& dir, const ChainOutput& chain,
                      const BinaryRegressionConfig& config, const BinaryDataset& data,
                      const Config& raw_config) {
  fs::create_directories(dir);
  {
    std::vector<std::string> header{"lambda", "kernel_value"};
    std::vector<Eigen::VectorXd> cols{chain.lambda_draws, chain.kernel_value_draws};
    if (chain.ab_draws.size() > 0) {
      header.insert(header.end(), {"a", "b"});
      cols.push_back(chain.ab_draws.col(0));
      cols.push_back(chain.ab_draws.col(1));
    }
    write_csv(dir / "draws.csv", header, hcat(cols));
  }
  {
    std::vector<std::string> header;
    for (int j = 0; j < chain.eta_draws.cols(); ++j) header.push_back("eta" + std::to_string(j + 1));
    write_csv(dir / "eta.csv", header, chain.eta_draws);
  }
  if (chain.gamma_draws.size() > 0) {
    std::vector<std::string> header;
    for (int j = 0; j < chain.gamma_draws.cols(); ++j) {
      header.push_back("gamma" + std::to_string(j + 1));
    }
    write_csv(dir / "gamma.csv", header, chain.gamma_draws);
  }
  {
    // per-point posterior summary of sigma(eta)
    const int n = data.size();
    Eigen::MatrixXd summary(n, static_cast<int>(data.x.cols()) + 3);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd probs(chain.retained());
      for (int r = 0; r < chain.retained(); ++r) probs(r) = logistic(chain.eta_draws(r, i));
      for (int j = 0; j < data.x.cols(); ++j) summary(i, j) = data.x(i, j);
      summary(i, data.x.cols()) = probs.mean();
      summary(i, data.x.cols() + 1) = empirical_quantile(probs, 0.025);
      summary(i, data.x.cols() + 2) = empirical_quantile(probs, 0.975);
    }
    std::vector<std::string> header;
    for (int j = 0; j < data.x.cols(); ++j) header.push_back("x" + std::to_string(j + 1));
    header.insert(header.end(), {"mean", "lower", "upper"});
    write_csv(dir / "summary.csv", header, summary);
  }
  {
    std::vector<std::string> header;
    std::vector<Eigen::VectorXd> cols;
    for (int j = 0; j < data.x.cols(); ++j) {
      header.push_back("x" + std::to_string(j + 1));
      cols.push_back(data.x.col(j));
    }
    header.push_back("z");
    cols.push_back(data.z.cast<double>());
    write_csv(dir / "train.csv", header, hcat(cols));
  }
  const double lam_rate =
      chain.lambda_attempts > 0
          ? static_cast<double>(chain.lambda_accepts) / chain.lambda_attempts
          : 0.0;
  const double ab_rate =
      chain.ab_attempts > 0 ? static_cast<double>(chain.ab_accepts) / chain.ab_attempts : 0.0;
  write_model_ini(dir / "model.ini", raw_config, "binary", chain.sampler_seconds, lam_rate,
                  ab_rate);
}

int cmd_fit_binary(const CommonArgs& common, const std::string& data_path) {
  const Config config = load_config(common);
  const BinaryDataset data = read_binary_csv(data_path);
  const BinaryRegressionConfig bc = binary_config_from(config, data);
  const ChainOutput chain = run_chain(bc, data);
  write_binary_fit(common.out_dir, chain, bc, data, config);
  std::cout << "fit-binary: " << chain.retained() << " retained draws in "
            << chain.sampler_seconds << " s\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit-ddp
// ---------------------------------------------------------------------------

void write_mixture_fit(const fs::path& dir, const MixtureChainOutput& chain,
                       const StickBreakingSpec& spec, const RegressionDataset& original,
                       const Standardizer& std_tf, const Config& raw_config) {
  fs::create_directories(dir);
  const int h_max = spec.truncation;
  {
    std::vector<std::string> header;
    for (int l = 0; l + 1 < h_max; ++l) header.push_back("lambda" + std::to_string(l + 1));
    write_csv(dir / "draws_lambda.csv", header, chain.lambda_draws);
  }
  if (!chain.gamma_draws.empty()) {
    const int q = static_cast<int>(chain.gamma_draws.front().rows());
    Eigen::MatrixXd flat(chain.retained(), q * (h_max - 1));
    std::vector<std::string> header;
    for (int l = 0; l + 1 < h_max; ++l) {
      for (int k = 0; k < q; ++k) {
        header.push_back("gamma_h" + std::to_string(l + 1) + "_" + std::to_string(k + 1));
      }
    }
    for (int r = 0; r < chain.retained(); ++r) {
      for (int l = 0; l + 1 < h_max; ++l) {
        flat.block(r, l * q, 1, q) = chain.gamma_draws[r].col(l).transpose();
      }
    }
    write_csv(dir / "draws_gamma.csv", header, flat);
  }
  {
    std::vector<std::string> header;
    Eigen::MatrixXd atoms(chain.retained(), 3 * h_max);
    for (int h = 0; h < h_max; ++h) header.push_back("beta0_" + std::to_string(h + 1));
    for (int h = 0; h < h_max; ++h) header.push_back("beta1_" + std::to_string(h + 1));
    for (int h = 0; h < h_max; ++h) header.push_back("tau_" + std::to_string(h + 1));
    atoms << chain.beta0_draws, chain.beta1_draws, chain.tau_draws;
    write_csv(dir / "draws_atoms.csv", header, atoms);
  }
  {
    std::vector<std::string> header;
    for (int h = 0; h < h_max; ++h) header.push_back("n_h" + std::to_string(h + 1));
    write_csv(dir / "occupancy.csv", header, chain.occupancy.cast<double>());
  }
  write_csv(dir / "train.csv", {"x", "y"}, hcat({original.x, original.y}));
  write_csv(dir / "standardize.csv", {"mean_x", "sd_x", "mean_y", "sd_y"},
            (Eigen::MatrixXd(1, 4) << std_tf.mean_x, std_tf.sd_x, std_tf.mean_y, std_tf.sd_y)
                .finished());
  const double rate = chain.lambda_attempts > 0
                          ? static_cast<double>(chain.lambda_accepts) / chain.lambda_attempts
                          : 0.0;
  write_model_ini(dir / "model.ini", raw_config, "ddp", chain.sampler_seconds, rate, 0.0);
  if (chain.saturated) {
    std::cerr << "warning: all " << h_max
              << " components were occupied at some iteration; consider increasing H\n";
  }
}

int cmd_fit_ddp(const CommonArgs& common, const std::string& data_path) {
  const Config config = load_config(common);
  const RegressionDataset original = read_regression_csv(data_path);
  const bool standardize = config.get_bool("mixture", "standardize", true);
  Standardizer tf;  // identity unless standardizing
  if (standardize) tf = Standardizer::fit(original);
  const RegressionDataset data = standardize ? tf.apply(original) : original;
  const StickBreakingSpec spec = mixture_spec_from(config, &data.x);
  const AtomPrior prior = atom_prior_from(config);
  const MixtureChainOutput chain = run_mixture_chain(
      spec, prior, data, config.get_int("run", "iterations", 2000),
      config.get_int("run", "burn_in", 1000), config.get_u64("run", "seed", 1),
      config.get_int("run", "polya_truncation", kDefaultPolyaTruncation));
  write_mixture_fit(common.out_dir, chain, spec, original, tf, config);
  std::cout << "fit-ddp: " << chain.retained() << " retained draws in " << chain.sampler_seconds
            << " s\n";
  return 0;
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

ChainOutput read_binary_chain(const fs::path& dir) {
  ChainOutput chain;
  const CsvTable draws = read_csv(dir / "draws.csv");
  chain.lambda_draws = draws.values.col(draws.column("lambda"));
  chain.kernel_value_draws = draws.values.col(draws.column("kernel_value"));
  if (draws.column("a") >= 0) {
    chain.ab_draws.resize(draws.values.rows(), 2);
    chain.ab_draws.col(0) = draws.values.col(draws.column("a"));
    chain.ab_draws.col(1) = draws.values.col(draws.column("b"));
  }
  chain.eta_draws = read_csv(dir / "eta.csv").values;
  if (fs::exists(dir / "gamma.csv")) chain.gamma_draws = read_csv(dir / "gamma.csv").values;
  const Config meta = Config::from_file(dir / "model.ini");
  chain.seed = meta.get_u64("run", "seed", 1);
  chain.iterations = meta.get_int("run", "iterations", chain.retained());
  chain.burn_in = chain.iterations - chain.retained();
  return chain;
}

MixtureChainOutput read_mixture_chain(const fs::path& dir, int h_max) {
  MixtureChainOutput chain;
  chain.lambda_draws = read_csv(dir / "draws_lambda.csv").values;
  const CsvTable atoms = read_csv(dir / "draws_atoms.csv");
  const int retained = static_cast<int>(atoms.values.rows());
  chain.beta0_draws = atoms.values.leftCols(h_max);
  chain.beta1_draws = atoms.values.middleCols(h_max, h_max);
  chain.tau_draws = atoms.values.rightCols(h_max);
  if (fs::exists(dir / "draws_gamma.csv")) {
    const Eigen::MatrixXd flat = read_csv(dir / "draws_gamma.csv").values;
    const int q = static_cast<int>(flat.cols()) / (h_max - 1);
    chain.gamma_draws.reserve(retained);
    for (int r = 0; r < retained; ++r) {
      Eigen::MatrixXd g(q, h_max - 1);
      for (int l = 0; l + 1 < h_max; ++l) g.col(l) = flat.block(r, l * q, 1, q).transpose();
      chain.gamma_draws.push_back(std::move(g));
    }
  }
  const CsvTable train = read_csv(dir / "train.csv");
  chain.train_x = train.values.col(train.column("x"));
  const Config meta = Config::from_file(dir / "model.ini");
  chain.seed = meta.get_u64("run", "seed", 1);
  chain.iterations = meta.get_int("run", "iterations", retained);
  chain.burn_in = chain.iterations - retained;
  return chain;
}

struct PredictArgs {
  CommonArgs common;
  std::string model_dir;
  std::string points_path;
  std::string y_grid;
  double threshold = std::numeric_limits<double>::quiet_NaN();
  int thin = 1;
};

int cmd_predict(const PredictArgs& args) {
  const fs::path model(args.model_dir);
  const Config meta = Config::from_file(model / "model.ini");
  const std::string kind = meta.get("meta", "kind", "binary");
  const fs::path out(args.common.out_dir);
  fs::create_directories(out);

  if (kind == "binary") {
    const BinaryDataset train = read_binary_csv(model / "train.csv");
    const BinaryRegressionConfig bc = binary_config_from(meta, train);
    const ChainOutput chain = read_binary_chain(model);
    const CsvTable pts_table = read_csv(args.points_path);
    const Points new_points = pts_table.values;
    const PredictionSummary pred =
        predict_probabilities(chain, bc, train, new_points, args.thin);
    Eigen::MatrixXd result(new_points.rows(), new_points.cols() + 3);
    result.leftCols(new_points.cols()) = new_points;
    result.col(new_points.cols()) = pred.mean;
    result.col(new_points.cols() + 1) = pred.lower;
    result.col(new_points.cols() + 2) = pred.upper;
    std::vector<std::string> header = pts_table.header;
    header.insert(header.end(), {"mean", "lower", "upper"});
    write_csv(out / "predict.csv", header, result);
    std::cout << "wrote " << (out / "predict.csv").string() << "\n";
    return 0;
  }

  // ddp: densities / cdf in original units through the standardizer
  const CsvTable tf_table = read_csv(model / "standardize.csv");
  Standardizer tf;
  tf.mean_x = tf_table.values(0, 0);
  tf.sd_x = tf_table.values(0, 1);
  tf.mean_y = tf_table.values(0, 2);
  tf.sd_y = tf_table.values(0, 3);
  const RegressionDataset original = read_regression_csv(model / "train.csv");
  const RegressionDataset data = tf.apply(original);
  const StickBreakingSpec spec = mixture_spec_from(meta, &data.x);
  const MixtureChainOutput chain = read_mixture_chain(model, spec.truncation);
  const CsvTable pts_table = read_csv(args.points_path);
  const Eigen::VectorXd xs = pts_table.values.col(0);

  if (!std::isnan(args.threshold)) {
    Eigen::MatrixXd result(xs.size(), 4);
    for (int i = 0; i < xs.size(); ++i) {
      const CdfSummary s = conditional_cdf(chain, spec, tf.to_std_x(xs(i)),
                                           tf.to_std_y(args.threshold), args.thin);
      result.row(i) << xs(i), s.mean, s.lower, s.upper;
    }
    write_csv(out / "cdf.csv", {"x", "mean", "lower", "upper"}, result);
    std::cout << "wrote " << (out / "cdf.csv").string() << "\n";
    return 0;
  }

  const std::vector<double> grid = parse_grid(args.y_grid.empty() ? "-1:0.01:2" : args.y_grid);
  Eigen::VectorXd y_grid_std(static_cast<long>(grid.size()));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    y_grid_std(static_cast<long>(g)) = tf.to_std_y(grid[g]);
  }
  std::vector<Eigen::VectorXd> cols(5);
  Eigen::MatrixXd result(xs.size() * static_cast<long>(grid.size()), 5);
  long row = 0;
  for (int i = 0; i < xs.size(); ++i) {
    const DensitySummary s =
        conditional_density(chain, spec, tf.to_std_x(xs(i)), y_grid_std, args.thin, true);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      result.row(row++) << xs(i), grid[g], tf.density_to_original(s.mean(static_cast<long>(g))),
          tf.density_to_original(s.lower(static_cast<long>(g))),
          tf.density_to_original(s.upper(static_cast<long>(g)));
    }
  }
  write_csv(out / "density.csv", {"x", "y", "mean", "lower", "upper"}, result);
  std::cout << "wrote " << (out / "density.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// prior-analyze
// ---------------------------------------------------------------------------

struct PriorAnalyzeArgs {
  CommonArgs common;
  double b = 1.0;
  long nsim = 200000;
  std::string b_grid = "0.25,0.5,1,2,4,8";
  std::string distance_grid = "0:0.05:1.5";
};

int cmd_prior_analyze(const PriorAnalyzeArgs& args) {
  const Config config = load_config(args.common);
  const std::uint64_t seed = config.get_u64("run", "seed", 1);
  const fs::path out(args.common.out_dir);
  fs::create_directories(out);
  const std::unique_ptr<CorrelationKernel> kernel = build_kernel_from_config(config, nullptr);

  std::cout << "tie probability at distance 0: "
            << tie_probability(mu_diagonal(args.b), args.b) << "\n";

  // dependence decay curve along distance
  const std::vector<double> distances = parse_grid(args.distance_grid);
  Eigen::MatrixXd curve(static_cast<long>(distances.size()), 6);
  const ShapePair shape{1.0, args.b};
  for (std::size_t k = 0; k < distances.size(); ++k) {
    Eigen::RowVectorXd x0(1), x1(1);
    x0 << 0.0;
    x1 << distances[k];
    const double r12 = (*kernel)(x0, x1);
    const MonteCarloEstimate mu =
        distances[k] == 0.0
            ? MonteCarloEstimate{mu_diagonal(args.b), 0.0, 0}
            : mu_mc_corr(r12, shape, args.nsim, seed + k);
    curve.row(static_cast<long>(k)) << distances[k], r12, mu.value, mu.se,
        tie_probability(mu.value, args.b), corr_rpm(mu.value, args.b);
  }
  write_csv(out / "dependence_curve.csv", {"distance", "r12", "mu", "mu_se", "tie", "corr_rpm"},
            curve);

  // competitor bounds over a b grid
  const std::vector<double> bs = parse_grid(args.b_grid);
  Eigen::MatrixXd bounds(static_cast<long>(bs.size()), 13);
  for (std::size_t k = 0; k < bs.size(); ++k) {
    const CompetitorBounds cb = competitor_corr_bounds(bs[k], args.nsim, seed + 1000 + k);
    bounds.row(static_cast<long>(k)) << bs[k], cb.m1_stick_corr.value, cb.m1_stick_corr.se,
        cb.m2_stick_corr, cb.m3_stick_corr, cb.m4_stick_corr.value, cb.m4_stick_corr.se,
        cb.m1_rpm.value, cb.m1_rpm.se, cb.m2_rpm, cb.m3_rpm, cb.m4_rpm.value, cb.m4_rpm.se;
  }
  write_csv(out / "competitor_bounds.csv",
            {"b", "m1_stick", "m1_stick_se", "m2_stick", "m3_stick", "m4_stick", "m4_stick_se",
             "m1_rpm", "m1_rpm_se", "m2_rpm", "m3_rpm", "m4_rpm", "m4_rpm_se"},
            bounds);
  std::cout << "wrote " << (out / "competitor_bounds.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// diagnose
// ---------------------------------------------------------------------------

int cmd_diagnose(const CommonArgs& common, const std::string& model_dir,
                 const std::string& truth_path) {
  const fs::path model(model_dir);
  const Config meta = Config::from_file(model / "model.ini");
  const fs::path out(common.out_dir);
  fs::create_directories(out);

  DiagnosticsReport report;
  report.wall_seconds = meta.get_double("meta", "sampler_seconds", 0.0);
  report.lambda_acceptance_rate = meta.get_double("meta", "lambda_acceptance", 0.0);
  report.ab_acceptance_rate = meta.get_double("meta", "ab_acceptance", 0.0);
  report.rmse = report.mae = report.mean_crps = std::numeric_limits<double>::quiet_NaN();

  const std::string kind = meta.get("meta", "kind", "binary");
  Eigen::MatrixXd eta;
  if (kind == "binary") {
    const CsvTable draws = read_csv(model / "draws.csv");
    const Eigen::VectorXd lambda = draws.values.col(draws.column("lambda"));
    const auto ess_l = ess_univariate(lambda);
    report.parameter_ess.emplace_back("lambda", std::min(ess_l.ess, double(lambda.size())));
    const Eigen::VectorXd kv = draws.values.col(draws.column("kernel_value"));
    if ((kv.array() != kv(0)).any()) {
      report.parameter_ess.emplace_back(
          "kernel_value", std::min(ess_univariate(kv).ess, double(kv.size())));
    }
    if (draws.column("a") >= 0) {
      report.parameter_ess.emplace_back(
          "a", std::min(ess_univariate(draws.values.col(draws.column("a"))).ess,
                        double(draws.values.rows())));
    }
    eta = read_csv(model / "eta.csv").values;
    // multivariate ESS of the latent success probabilities on a small slice
    const int p = std::min<int>(5, static_cast<int>(eta.cols()));
    Eigen::MatrixXd probs(eta.rows(), p);
    const long stride = std::max<long>(1, eta.cols() / p);
    for (int j = 0; j < p; ++j) {
      for (long r = 0; r < eta.rows(); ++r) probs(r, j) = logistic(eta(r, j * stride));
    }
    report.multivariate_ess = ess_multivariate(probs);

    if (!truth_path.empty()) {
      const CsvTable truth = read_csv(truth_path);
      const int pc = truth.column("p");
      if (pc < 0) throw CsvError(truth_path, 1, "missing 'p' column");
      const Eigen::VectorXd p_true = truth.values.col(pc);
      if (p_true.size() != eta.cols()) {
        throw CsvError(truth_path, 1, "truth size does not match the fitted data");
      }
      double se = 0.0, ae = 0.0, crps = 0.0;
      for (long i = 0; i < eta.cols(); ++i) {
        Eigen::VectorXd probs_i(eta.rows());
        for (long r = 0; r < eta.rows(); ++r) probs_i(r) = logistic(eta(r, i));
        const double err = probs_i.mean() - p_true(i);
        se += err * err;
        ae += std::abs(err);
        crps += crps_empirical(probs_i, p_true(i));
      }
      report.rmse = std::sqrt(se / eta.cols());
      report.mae = ae / eta.cols();
      report.mean_crps = crps / eta.cols();
    }
  } else {
    const Eigen::MatrixXd lambdas = read_csv(model / "draws_lambda.csv").values;
    for (int l = 0; l < std::min<int>(3, static_cast<int>(lambdas.cols())); ++l) {
      report.parameter_ess.emplace_back(
          "lambda" + std::to_string(l + 1),
          std::min(ess_univariate(lambdas.col(l)).ess, double(lambdas.rows())));
    }
    report.multivariate_ess =
        ess_multivariate(lambdas.leftCols(std::min<int>(3, static_cast<int>(lambdas.cols()))));
  }

  // report file and console echo
  std::vector<std::string> names;
  std::vector<double> values;
  for (const auto& [name, v] : report.parameter_ess) {
    names.push_back("ess_" + name);
    values.push_back(v);
  }
  names.insert(names.end(), {"multivariate_ess", "lambda_acceptance", "ab_acceptance",
                             "sampler_seconds", "rmse", "mae", "mean_crps"});
  values.insert(values.end(),
                {report.multivariate_ess, report.lambda_acceptance_rate,
                 report.ab_acceptance_rate, report.wall_seconds, report.rmse, report.mae,
                 report.mean_crps});
  Eigen::MatrixXd table(static_cast<long>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) table(static_cast<long>(i), 0) = values[i];
  std::ofstream txt(out / "diagnostics.csv");
  txt << "metric,value\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    txt << names[i] << "," << values[i] << "\n";
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::cout << names[i] << " = " << values[i] << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// replicate
// ---------------------------------------------------------------------------

struct ReplicateArgs {
  CommonArgs common;
  std::string experiment;
  int replicates = 10;
  int n = 200;
  double range = 0.2;
  int iterations = 2000;
  int burn_in = 1000;
};

struct ReplicateRow {
  std::vector<double> values;
};

int cmd_replicate(const ReplicateArgs& args) {
  const Config config = load_config(args.common);
  const std::uint64_t seed = config.get_u64("run", "seed", 1);
  const fs::path out(args.common.out_dir);
  fs::create_directories(out);

  std::vector<std::string> header;
  std::function<ReplicateRow(int)> one;

  if (args.experiment == "blocking" || args.experiment == "adaptation") {
    const bool blocking = args.experiment == "blocking";
    header = blocking ? std::vector<std::string>{"rep", "ess_blocked", "ess_nonblocked",
                                                 "rate_blocked", "rate_nonblocked"}
                      : std::vector<std::string>{"rep", "ess_adapted", "ess_nonadapted",
                                                 "rate_adapted", "rate_nonadapted"};
    one = [&, blocking](int rep) {
      const BinarySimulation sim = simulate_spatial_binary(SpatialTruth::kLbp, args.range,
                                                           args.n, 0, seed + 17 * rep);
      BinaryRegressionConfig bc;
      bc.shape = {1.0, 2.0};
      bc.kernel_grid.push_back(std::make_shared<MaternKernel>(args.range, 1.5));
      bc.kernel_grid_values = Eigen::VectorXd::Constant(1, args.range);
      bc.iterations = args.iterations;
      bc.burn_in = args.burn_in;
      bc.seed = seed + 1000 + rep;

      ReplicateRow row;
      row.values.push_back(rep);
      double rate_a = 0.0, rate_b = 0.0, ess_a = 0.0, ess_b = 0.0;
      {
        bc.blocked = true;
        bc.adapted = true;
        const ChainOutput c = run_chain(bc, sim.train);
        ess_a = ess_univariate(c.lambda_draws).ess;
        rate_a = static_cast<double>(c.lambda_accepts) / c.lambda_attempts;
      }
      {
        if (blocking) {
          bc.blocked = false;
          bc.adapted = true;
        } else {
          bc.blocked = true;
          bc.adapted = false;
        }
        const ChainOutput c = run_chain(bc, sim.train);
        ess_b = ess_univariate(c.lambda_draws).ess;
        rate_b = static_cast<double>(c.lambda_accepts) / c.lambda_attempts;
      }
      row.values.insert(row.values.end(), {ess_a, ess_b, rate_a, rate_b});
      return row;
    };
  } else if (args.experiment == "scenario-a" || args.experiment == "scenario-b") {
    const bool is_a = args.experiment == "scenario-a";
    header = {"rep", "density_error", "regression_error", "seconds"};
    one = [&, is_a](int rep) {
      const RegressionDataset original = is_a ? simulate_scenario_a(args.n, seed + 31 * rep)
                                              : simulate_scenario_b(args.n, seed + 31 * rep);
      const Standardizer tf = Standardizer::fit(original);
      const RegressionDataset data = tf.apply(original);
      Config cfg = config;
      if (!cfg.has("kernel", "type")) cfg.set("kernel", "type", "feature_map");
      StickBreakingSpec spec = mixture_spec_from(cfg, &data.x);
      const AtomPrior prior = atom_prior_from(cfg);
      const MixtureChainOutput chain =
          run_mixture_chain(spec, prior, data, args.iterations, args.burn_in, seed + 500 + rep);

      const int n_test = 100, n_grid = 500;
      const double y_lo = -1.0, y_hi = is_a ? 2.0 : 10.0;
      const double x_lo = is_a ? 0.0 : -2.0, x_hi = is_a ? 1.0 : 10.0;
      const Eigen::VectorXd x_test = Eigen::VectorXd::LinSpaced(n_test, x_lo, x_hi);
      const Eigen::VectorXd y_grid = Eigen::VectorXd::LinSpaced(n_grid, y_lo, y_hi);
      Eigen::VectorXd y_grid_std(n_grid);
      for (int g = 0; g < n_grid; ++g) y_grid_std(g) = tf.to_std_y(y_grid(g));
      Eigen::MatrixXd est(n_test, n_grid), truth(n_test, n_grid);
      Eigen::VectorXd m_est(n_test), m_truth(n_test);
      const int thin = std::max(1, chain.retained() / 500);
      for (int i = 0; i < n_test; ++i) {
        const double xs = tf.to_std_x(x_test(i));
        const DensitySummary dens = conditional_density(chain, spec, xs, y_grid_std, thin);
        for (int g = 0; g < n_grid; ++g) {
          est(i, g) = tf.density_to_original(dens.mean(g));
          truth(i, g) = is_a ? scenario_a_density(y_grid(g), x_test(i))
                             : scenario_b_density(y_grid(g), x_test(i));
        }
        m_est(i) = tf.from_std_y(conditional_mean(chain, spec, xs, thin));
        m_truth(i) = is_a ? scenario_a_mean(x_test(i)) : scenario_b_mean(x_test(i));
      }
      const ErrorPair err = density_and_regression_errors(est, truth, m_est, m_truth,
                                                          y_grid(1) - y_grid(0));
      ReplicateRow row;
      row.values = {static_cast<double>(rep), err.density_error, err.regression_error,
                    chain.sampler_seconds};
      return row;
    };
  } else {
    std::cerr << "unknown experiment '" << args.experiment << "'\n";
    return 2;
  }

  // run replicates concurrently, aggregate in index order
  std::vector<std::future<ReplicateRow>> futures;
  futures.reserve(args.replicates);
  for (int rep = 0; rep < args.replicates; ++rep) {
    futures.push_back(std::async(std::launch::async, one, rep));
  }
  Eigen::MatrixXd table(args.replicates, static_cast<long>(header.size()));
  for (int rep = 0; rep < args.replicates; ++rep) {
    const ReplicateRow row = futures[rep].get();
    for (std::size_t j = 0; j < header.size(); ++j) table(rep, static_cast<long>(j)) = row.values[j];
  }
  write_csv(out / "replicates.csv", header, table);

  // summary with Monte Carlo standard errors (sample SD / sqrt(R))
  Eigen::MatrixXd summary(2, table.cols() - 1);
  for (long j = 1; j < table.cols(); ++j) {
    const double mean = table.col(j).mean();
    const double sd =
        std::sqrt((table.col(j).array() - mean).square().sum() / (args.replicates - 1));
    summary(0, j - 1) = mean;
    summary(1, j - 1) = sd / std::sqrt(static_cast<double>(args.replicates));
  }
  write_csv(out / "summary.csv", std::vector<std::string>(header.begin() + 1, header.end()),
            summary);
  std::cout << "wrote " << (out / "summary.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"logistic-beta distributions, processes and samplers"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand("simulate", "generate scenario data as CSV");
  sim->add_option("--scenario", sim_args.scenario,
                  "cosine600 | spatial-lbp | spatial-copula | scenario-a | scenario-b")
      ->required();
  sim->add_option("--n", sim_args.n, "training size (spatial / scenario-a / scenario-b)");
  sim->add_option("--n-test", sim_args.n_test, "test size (spatial)");
  sim->add_option("--range", sim_args.range, "Matern range of the generating field");
  add_common(sim, sim_args.common);

  CommonArgs fitb_common;
  std::string fitb_data;
  CLI::App* fitb = app.add_subcommand("fit-binary", "fit the latent-process binary model");
  fitb->add_option("--data", fitb_data, "CSV with x1[,x2],z columns")->required();
  add_common(fitb, fitb_common);

  CommonArgs fitd_common;
  std::string fitd_data;
  CLI::App* fitd = app.add_subcommand("fit-ddp", "fit the LB-DDP mixture model");
  fitd->add_option("--data", fitd_data, "CSV with x,y columns")->required();
  add_common(fitd, fitd_common);

  PredictArgs pred_args;
  CLI::App* pred = app.add_subcommand("predict", "posterior summaries at new points");
  pred->add_option("--model", pred_args.model_dir, "directory written by fit-*")->required();
  pred->add_option("--points", pred_args.points_path, "CSV of new covariates")->required();
  pred->add_option("--y-grid", pred_args.y_grid, "lo:step:hi response grid (ddp density)");
  pred->add_option("--threshold", pred_args.threshold, "P(y <= t | x) instead of densities");
  pred->add_option("--thin", pred_args.thin, "use every k-th retained draw");
  add_common(pred, pred_args.common);

  PriorAnalyzeArgs prior_args;
  CLI::App* prior = app.add_subcommand("prior-analyze", "prior dependence tables");
  prior->add_option("--b", prior_args.b, "concentration parameter")->required();
  prior->add_option("--nsim", prior_args.nsim, "Monte Carlo draws per point");
  prior->add_option("--b-grid", prior_args.b_grid, "b values for the competitor table");
  prior->add_option("--distances", prior_args.distance_grid, "distance grid lo:step:hi");
  add_common(prior, prior_args.common);

  CommonArgs diag_common;
  std::string diag_model, diag_truth;
  CLI::App* diag = app.add_subcommand("diagnose", "efficiency and error report");
  diag->add_option("--model", diag_model, "directory written by fit-*")->required();
  diag->add_option("--truth", diag_truth, "truth CSV (binary: x...,p)");
  add_common(diag, diag_common);

  ReplicateArgs rep_args;
  CLI::App* rep = app.add_subcommand("replicate", "named desk-scale experiments");
  rep->add_option("--experiment", rep_args.experiment,
                  "blocking | adaptation | scenario-a | scenario-b")
      ->required();
  rep->add_option("--replicates", rep_args.replicates, "number of replicates");
  rep->add_option("--n", rep_args.n, "per-replicate sample size");
  rep->add_option("--range", rep_args.range, "Matern range (binary experiments)");
  rep->add_option("--iterations", rep_args.iterations, "MCMC iterations");
  rep->add_option("--burn-in", rep_args.burn_in, "burn-in iterations");
  add_common(rep, rep_args.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // --help exits 0, any usage problem exits 2
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (fitb->parsed()) return cmd_fit_binary(fitb_common, fitb_data);
    if (fitd->parsed()) return cmd_fit_ddp(fitd_common, fitd_data);
    if (pred->parsed()) return cmd_predict(pred_args);
    if (prior->parsed()) return cmd_prior_analyze(prior_args);
    if (diag->parsed()) return cmd_diagnose(diag_common, diag_model, diag_truth);
    if (rep->parsed()) return cmd_replicate(rep_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
