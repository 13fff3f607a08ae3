#ifndef LOGIBETA_CONFIG_HPP
#define LOGIBETA_CONFIG_HPP

// Run configuration: a flat key/value file with [sections]. Every model
// and sampler default is documented in the template written by
// default_config_text().

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "logibeta/binary_regression.hpp"
#include "logibeta/ddp_mixture.hpp"

namespace logibeta {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  static Config from_file(const std::filesystem::path& file);
  static Config from_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

  void set(const std::string& section, const std::string& key, const std::string& value);

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

// "lo:step:hi" or a comma-separated list.
std::vector<double> parse_grid(const std::string& text);

// Kernel construction from the [kernel] section. train_x (when given)
// supplies quantile knots for feature-map bases with knots = auto.
std::unique_ptr<CorrelationKernel> build_kernel_from_config(const Config& config,
                                                            const Eigen::VectorXd* train_x);

// Full sampler configuration for the binary model; builds the kernel
// grid from [kernel] (range_grid expands into one Matern per value).
BinaryRegressionConfig binary_config_from(const Config& config, const BinaryDataset& data);

StickBreakingSpec mixture_spec_from(const Config& config, const Eigen::VectorXd* train_x);
AtomPrior atom_prior_from(const Config& config);

// Commented template with every recognized key and its default.
std::string default_config_text();

}  // namespace logibeta

#endif
