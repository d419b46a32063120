#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmix/bounds.hpp"
#include "cmix/processes.hpp"

namespace cmix {

/// Centered bounded statistic h with known envelopes under a process's
/// invariant law.
struct Statistic {
  std::string id;
  std::function<double(double)> fn;  // already centered
  double A = 1.0;
  double B = 0.0;
  double sigma2 = 1.0;
};

/// Registry: "sin" (sin 2 pi x), "ramp" (smoothed indicator of [0, 1/2],
/// ramp width 0.1, minus 1/2), "kernel-at-point" (Epanechnikov bump at 1/2
/// with width 0.1, minus its mean 0.1), "identity" (x).  Throws when the
/// statistic's mean under the process's law is not recorded.
Statistic make_statistic(const std::string& id, const std::string& process);

/// Process registry for experiments: "doubling", "logistic",
/// "cell-chain" (64 cells, rho 0.5), "rademacher".
Series generate_process(const std::string& process, std::int64_t n, std::uint64_t seed);

/// Parallel map over replications: fn(rep) for rep in [0, reps), results
/// stored by index so worker count cannot change them.
void for_each_rep(std::int64_t reps, int workers, const std::function<void(std::int64_t)>& fn);

struct ProportionCI {
  double lo = 0.0;
  double hi = 1.0;
};

/// Exact two-sided Clopper-Pearson interval at the given confidence.
ProportionCI clopper_pearson(std::int64_t successes, std::int64_t trials,
                             double confidence = 0.99);

struct TailExperiment {
  std::string process = "doubling";
  std::string statistic = "sin";
  std::uint64_t seed = 1;
  std::vector<std::int64_t> Ns{4096};
  std::vector<double> t_grid;
  std::int64_t reps = 1000;

  void validate() const;
  nlohmann::json to_json() const;
};

struct TailPoint {
  std::int64_t N = 0;
  double t = 0.0;
  std::int64_t exceed = 0;
  double probability = 0.0;
  ProportionCI ci;
};

struct TailResult {
  std::vector<TailPoint> points;
  /// means[n][rep]: sample mean of h for Ns[n] and replication rep.
  std::vector<std::vector<double>> means;
  Statistic statistic;
};

TailResult tail_probability(const TailExperiment& exp, int workers = 1);

struct ComparisonRow {
  std::int64_t N = 0;
  double t = 0.0;
  double empirical = 0.0;
  BoundReport ours;       // 1-d geometric bound
  BoundReport earlier;    // Hang-Steinwart restatement
  BoundReport algebraic;  // fixed-B algebraic bound
  /// Exponent of ours >= exponent of the earlier bound.
  bool sharper = false;
  /// Clamped bounds >= empirical tail wherever N >= N0.
  bool sound = true;

  nlohmann::json to_json() const;
};

/// Empirical tail against the three bound evaluators on the same grid.
std::vector<ComparisonRow> bound_comparison(const TailExperiment& exp, const TailResult& tail,
                                            double omega, double b, double gamma);

struct RateConfig {
  std::string estimator = "kde";  // kde | mean | var | mode
  std::string process = "doubling";
  std::vector<std::int64_t> Ns;
  std::int64_t reps = 50;
  std::string bandwidth = "optimal";  // optimal | geometric | value:<h>
  double alpha = 1.0;
  double gamma = 1.0;
  std::string kernel = "epanechnikov";
  std::int64_t grid_points = 101;
  std::uint64_t seed = 1;
  std::string mean = "sin";
  std::string sigma = "half-sin";
  std::string mode = "kink";
  double L = 2.0;

  void validate() const;
  nlohmann::json to_json() const;
  double bandwidth_for(std::int64_t N) const;
  double target_exponent() const;
};

struct RateReport {
  std::vector<std::int64_t> Ns;
  std::vector<double> bandwidths;
  std::vector<double> median_sup_errors;
  double slope = 0.0;
  double slope_se = 0.0;
  double target_exponent = 0.0;
  /// errors[n][rep]; NaN for aborted reps.
  std::vector<std::vector<double>> errors;
  std::vector<std::int64_t> aborted;
  /// Every defined variance estimate was >= 0 (var estimator only).
  bool nonnegative = true;

  nlohmann::json to_json() const;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double se = 0.0;
};

/// Least squares of log(errors) on log(Ns).
SlopeFit loglog_slope(const std::vector<double>& Ns, const std::vector<double>& errors);

RateReport rate_experiment(const RateConfig& cfg, int workers = 1);

/// Report serialization shared by the CLI and the determinism tests.
std::string tail_report_jsonl(const TailExperiment& exp, const TailResult& tail,
                              const std::vector<ComparisonRow>& rows);
std::string tail_raw_csv(const TailExperiment& exp, const TailResult& tail);
std::string rate_report_jsonl(const RateConfig& cfg, const RateReport& rep);
std::string rate_raw_csv(const RateConfig& cfg, const RateReport& rep);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace cmix
