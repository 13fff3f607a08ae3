#include "logibeta/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace logibeta {

namespace {

std::string trim(const std::string& s) {
  auto b = s.begin();
  auto e = s.end();
  while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
  while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
  return {b, e};
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

Config Config::from_string(const std::string& text) {
  Config out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(row) + ": bad section");
      section = lower(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(row) + ": expected key = value");
    }
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(row) + ": empty key");
    out.sections_[section][key] = value;
  }
  return out;
}

Config Config::from_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string() + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(lower(section));
  return it != sections_.end() && it->second.count(lower(key)) > 0;
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
  const auto it = sections_.find(lower(section));
  if (it == sections_.end()) return fallback;
  const auto kit = it->second.find(lower(key));
  return kit == it->second.end() ? fallback : kit->second;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key, "");
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": cannot parse '" + v + "' as a number");
  }
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key, "");
  try {
    return std::stoi(v);
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": cannot parse '" + v + "' as an integer");
  }
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key,
                              std::uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key, "");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": cannot parse '" + v + "' as an integer");
  }
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = lower(get(section, key, ""));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("[" + section + "] " + key + ": cannot parse '" + v + "' as a boolean");
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  sections_[lower(section)][lower(key)] = value;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  if (text.find(':') != std::string::npos) {
    double lo = 0, step = 0, hi = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(text);
    if (!(ss >> lo >> c1 >> step >> c2 >> hi) || c1 != ':' || c2 != ':' || step <= 0) {
      throw ConfigError("grid '" + text + "': expected lo:step:hi");
    }
    for (double v = lo; v <= hi + 1e-12; v += step) out.push_back(v);
    return out;
  }
  std::istringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(trim(cell)));
    } catch (const std::exception&) {
      throw ConfigError("grid '" + text + "': cannot parse '" + cell + "'");
    }
  }
  return out;
}

namespace {

BasisSpec basis_from_config(const Config& config, const Eigen::VectorXd* train_x) {
  const int df = config.get_int("kernel", "df", 6);
  const std::string knots = config.get("kernel", "knots", "auto");
  if (knots == "auto") {
    if (train_x != nullptr && train_x->size() >= df) {
      return natural_spline_basis_from_quantiles(*train_x, df);
    }
    const double lo = config.get_double("kernel", "domain_lo", 0.0);
    const double hi = config.get_double("kernel", "domain_hi", 1.0);
    return natural_spline_basis(lo, hi, df);
  }
  const std::vector<double> values = parse_grid(knots);
  if (static_cast<int>(values.size()) < 2) throw ConfigError("[kernel] knots: need >= 2 knots");
  Eigen::VectorXd k(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) k(static_cast<int>(i)) = values[i];
  return BasisSpec{std::move(k)};
}

}  // namespace

std::unique_ptr<CorrelationKernel> build_kernel_from_config(const Config& config,
                                                            const Eigen::VectorXd* train_x) {
  const std::string type = config.get("kernel", "type", "matern");
  if (type == "matern") {
    return std::make_unique<MaternKernel>(config.get_double("kernel", "range", 0.3),
                                          config.get_double("kernel", "nu", 1.5));
  }
  if (type == "ar1") {
    return std::make_unique<Ar1Kernel>(config.get_double("kernel", "rho", 0.8));
  }
  if (type == "feature_map") {
    return std::make_unique<FeatureMapKernel>(basis_from_config(config, train_x));
  }
  if (type == "mpp") {
    auto parent = std::make_unique<MaternKernel>(config.get_double("kernel", "range", 0.3),
                                                 config.get_double("kernel", "nu", 1.5));
    const int count = config.get_int("kernel", "knot_count", 25);
    if (count < 1) throw ConfigError("[kernel] knot_count must be >= 1");
    double lo = config.get_double("kernel", "domain_lo", 0.0);
    double hi = config.get_double("kernel", "domain_hi", 1.0);
    if (train_x != nullptr && train_x->size() > 1) {
      lo = train_x->minCoeff();
      hi = train_x->maxCoeff();
    }
    Points knots(count, 1);
    knots.col(0) = Eigen::VectorXd::LinSpaced(count, lo, hi);
    return std::make_unique<ModifiedPredictiveProcessKernel>(std::move(parent), knots);
  }
  throw ConfigError("[kernel] type: unknown kernel '" + type + "'");
}

BinaryRegressionConfig binary_config_from(const Config& config, const BinaryDataset& data) {
  BinaryRegressionConfig out;
  out.shape = ShapePair{config.get_double("shape", "a", 1.0), config.get_double("shape", "b", 1.0)};

  const std::string type = config.get("kernel", "type", "matern");
  const std::string grid_text = config.get("kernel", "range_grid", "");
  if (!grid_text.empty()) {
    if (type != "matern") throw ConfigError("[kernel] range_grid requires type = matern");
    const std::vector<double> ranges = parse_grid(grid_text);
    if (ranges.empty()) throw ConfigError("[kernel] range_grid: empty grid");
    const double nu = config.get_double("kernel", "nu", 1.5);
    out.kernel_grid_values.resize(static_cast<int>(ranges.size()));
    for (std::size_t k = 0; k < ranges.size(); ++k) {
      out.kernel_grid.push_back(std::make_shared<MaternKernel>(ranges[k], nu));
      out.kernel_grid_values(static_cast<int>(k)) = ranges[k];
    }
    out.kernel_start_index = static_cast<int>(ranges.size()) / 2;
  } else {
    Eigen::VectorXd x1;
    if (data.x.cols() == 1) x1 = data.x.col(0);
    std::unique_ptr<CorrelationKernel> kernel =
        build_kernel_from_config(config, data.x.cols() == 1 ? &x1 : nullptr);
    out.kernel_grid.push_back(std::shared_ptr<const CorrelationKernel>(std::move(kernel)));
    out.kernel_grid_values = Eigen::VectorXd::Constant(1, config.get_double("kernel", "range", 0));
  }

  out.blocked = config.get_bool("strategy", "blocked", true);
  out.adapted = config.get_bool("strategy", "adapted", true);
  const std::string sampler = config.get("strategy", "lambda_sampler", "mh");
  if (sampler == "mh") {
    out.lambda_sampler = LambdaSampler::kMetropolisHastings;
  } else if (sampler == "particle_gibbs") {
    out.lambda_sampler = LambdaSampler::kParticleGibbs;
  } else {
    throw ConfigError("[strategy] lambda_sampler: expected mh or particle_gibbs");
  }
  out.particle_count = config.get_int("strategy", "particles", 10);
  const std::string rank = config.get("strategy", "rank", "auto");
  if (rank == "full") {
    out.force_dense = true;
  } else if (rank != "auto" && rank != "low") {
    throw ConfigError("[strategy] rank: expected auto, full or low");
  }

  if (config.get_bool("ab_prior", "enabled", false)) {
    AbHyperprior prior;
    const double mean_log_a = config.get_double("ab_prior", "mean_log_a", 0.0);
    const double mean_log_b = config.get_double("ab_prior", "mean_log_b", 0.0);
    const double sd_log = config.get_double("ab_prior", "sd_log", 0.5);
    prior.log_density = [=](double a, double b) {
      if (!(a > 0.0) || !(b > 0.0)) return -std::numeric_limits<double>::infinity();
      const double za = (std::log(a) - mean_log_a) / sd_log;
      const double zb = (std::log(b) - mean_log_b) / sd_log;
      return -0.5 * (za * za + zb * zb) - std::log(a * b);
    };
    prior.rw_step = config.get_double("ab_prior", "rw_step", 0.2);
    prior.particles = config.get_int("ab_prior", "particles", 10);
    out.ab_prior = std::move(prior);
  }

  out.iterations = config.get_int("run", "iterations", 2000);
  out.burn_in = config.get_int("run", "burn_in", 1000);
  out.seed = config.get_u64("run", "seed", 1);
  out.polya_truncation = config.get_int("run", "polya_truncation", kDefaultPolyaTruncation);
  return out;
}

StickBreakingSpec mixture_spec_from(const Config& config, const Eigen::VectorXd* train_x) {
  StickBreakingSpec spec;
  spec.truncation = config.get_int("mixture", "h", 20);
  spec.concentration = config.get_double("mixture", "b", 1.0);
  spec.discount = config.get_double("mixture", "discount", 0.0);
  spec.kernel = std::shared_ptr<const CorrelationKernel>(
      build_kernel_from_config(config, train_x).release());
  return spec;
}

AtomPrior atom_prior_from(const Config& config) {
  AtomPrior prior;
  const double scale = config.get_double("mixture", "sigma_beta", 1.0);
  prior.sigma_beta = scale * scale * Eigen::Matrix2d::Identity();
  prior.a_tau = config.get_double("mixture", "a_tau", 1.0);
  prior.b_tau = config.get_double("mixture", "b_tau", 1.0);
  return prior;
}

std::string default_config_text() {
  return R"(# logibeta run configuration (all keys optional; defaults shown)

[shape]              # beta shape parameters of the latent process
a = 1.0
b = 1.0

[kernel]
type = matern        # matern | ar1 | feature_map | mpp
range = 0.3          # matern range
nu = 1.5             # matern smoothness
range_grid =         # e.g. 0.01:0.01:0.5 -> discrete uniform prior on range
rho = 0.8            # ar1 correlation
domain_lo = 0.0      # feature_map / mpp domain when no data quantiles exist
domain_hi = 1.0
df = 6               # feature_map basis size (intercept included)
knots = auto         # auto (train-covariate quantiles) or comma list
knot_count = 25      # mpp knot count

[strategy]
blocked = true       # collapsed lambda update (eta marginalized out)
adapted = true       # moment-matched Polya proposal
lambda_sampler = mh  # mh | particle_gibbs
particles = 10
rank = auto          # auto | full | low

[ab_prior]           # optional hyperprior on (a, b); PMMH joint update
enabled = false
mean_log_a = 0.0
mean_log_b = 0.0
sd_log = 0.5
rw_step = 0.2
particles = 10

[run]
iterations = 2000
burn_in = 1000
seed = 1
polya_truncation = 200

[mixture]            # density-regression fits
h = 20
b = 1.0
discount = 0.0       # Pitman-Yor discount; 0 = LB-DDP
sigma_beta = 1.0     # atom coefficient prior N2(0, sigma_beta^2 I)
a_tau = 1.0
b_tau = 1.0
standardize = true   # center/scale (x, y) before fitting
)";
}

}  // namespace logibeta
