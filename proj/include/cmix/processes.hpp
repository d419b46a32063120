#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cmix/grid.hpp"

namespace cmix {

/// Simulated process output.  values is N x D, ordered by the grid's
/// scalar index.
struct Series {
  Eigen::MatrixXd values;
  SampleGrid grid;
  std::string process;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  /// Id of the invariant density of the marginal law ("uniform",
  /// "arcsine" or "none").
  std::string density = "none";

  Eigen::Index size() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

/// Closed-form ground truth attached to a dataset.  Each entry is a
/// registry id understood by evaluate_truth (empty = unknown).
struct Truth {
  std::string density;
  std::string mean;
  std::string sigma;
  std::string mode;
};

struct Dataset {
  Eigen::MatrixXd x;  // N x D
  Eigen::VectorXd y;
  std::optional<double> y_bound;
  Truth truth;
  nlohmann::json meta = nlohmann::json::object();

  Eigen::Index size() const { return x.rows(); }
  Eigen::Index dim() const { return x.cols(); }
  void validate() const;
};

/// Registry of closed-form functions on [0,1]^D, evaluated on the first
/// coordinate.  Ids: "zero", "const:<c>", "sin" (sin 2 pi x), "half-sin"
/// (0.5 + 0.25 sin 2 pi x), "poly" (4x(1-x)), "kink" (0.3 + 0.2|x - 0.5|),
/// "uniform" (density 1), "arcsine" (1 / (pi sqrt(x(1-x)))).  Any id may
/// carry a "+<c>" suffix adding a constant.
double evaluate_truth(const std::string& id, double x);
/// sup over [0,1] of |f|.
double truth_sup_abs(const std::string& id);
bool is_known_truth(const std::string& id);

/// Doubling map x -> 2x mod 1 as a shift on a fair bit stream.
Series simulate_doubling_map(std::int64_t n, std::uint64_t seed);
/// Same construction fed from an explicit source of 64-bit words (bits
/// consumed MSB first).
Series simulate_doubling_map(std::int64_t n,
                             const std::function<std::uint64_t()>& words);

/// Logistic map x -> 4x(1-x) from a seeded start after burn_in steps.
Series simulate_logistic_map(std::int64_t n, std::uint64_t seed,
                             std::int64_t burn_in = 1000);
/// Raw orbit from a given start; burn_in steps are discarded.
Eigen::VectorXd logistic_orbit(double x0, std::int64_t n, std::int64_t burn_in = 0);
/// Arcsine invariant density of the logistic map.
double logistic_density(double x);

/// Stationary finite-state chain; values are the labels of visited states.
Series simulate_markov_chain(const Eigen::MatrixXd& P, const Eigen::VectorXd& states,
                             std::int64_t n, std::uint64_t seed);

/// Doubly-stochastic K-state chain: with probability rho step to a
/// neighbour on the cycle (+1 or -1), otherwise jump uniformly.
Eigen::MatrixXd cell_chain_matrix(int cells, double rho);

/// X_t = (S_t + U_t) / K with S_t the cell chain and U_t iid uniform.
/// The marginal law of X_t is Uniform[0,1).
Series simulate_cell_chain(int cells, double rho, std::int64_t n, std::uint64_t seed);

/// Finite-range moving average of iid Uniform[-1,1] innovations over the
/// sup-norm ball of radius R, averaged (value = mean of the ball).
Series simulate_lattice_field(const SampleGrid& grid, int range, std::uint64_t seed);

/// Exact covariance of two sites of the lattice field.
double lattice_field_covariance(const std::vector<std::int64_t>& a,
                                const std::vector<std::int64_t>& b, int range);

/// iid +-1.
Series simulate_rademacher(std::int64_t n, std::uint64_t seed);

/// Y = m(X) + sigma(X) eps, eps iid Uniform[-sqrt 3, sqrt 3].
Dataset make_regression_dataset(const Series& x, const std::string& mean_id,
                                const std::string& sigma_id, double y_bound,
                                std::uint64_t seed);

/// Skewed conditional law: with probability 0.8 an Epanechnikov bump of
/// half-width 0.15 at mode(X), else the same bump at mode(X) + 0.4.
Dataset make_modal_dataset(const Series& x, const std::string& mode_id,
                           double y_bound, std::uint64_t seed);

/// Conditional density of the modal dataset's Y given X = x.
double modal_conditional_density(const std::string& mode_id, double x, double y);

inline constexpr double kModalMajorWeight = 0.8;
inline constexpr double kModalOffset = 0.4;
inline constexpr double kModalHalfWidth = 0.15;

}  // namespace cmix
