#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmix/harness.hpp"

namespace cmix {

/// One section of an experiment file.
///
///   # comment
///   [kde-doubling]
///   type = rate
///   estimator = kde
///   Ns = 512, 1024, 2048, 4096
///
/// Tail sections (type = tail) take process, statistic, Ns, reps, t_grid,
/// seed, omega, b, gamma.  Rate sections (type = rate) take the RateConfig
/// fields.  Lists are comma separated.  Unknown keys are rejected.
struct ExperimentSection {
  std::string name;
  std::string type;  // tail | rate
  bool has_seed = false;
  TailExperiment tail;
  double omega = 2.0;
  double b = 1.0;
  double gamma = 1.0;
  RateConfig rate;

  /// Fill the seed from the command line when the section has none.
  void apply_default_seed(std::uint64_t seed);
  nlohmann::json to_json() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<ExperimentSection> parse_experiments(const std::string& text);
std::vector<ExperimentSection> load_experiments(const std::filesystem::path& path);

}  // namespace cmix
