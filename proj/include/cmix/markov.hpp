#pragma once

#include <Eigen/Dense>

namespace cmix::markov {

/// Throws unless P is square, non-negative and row-stochastic to 1e-12.
void validate_stochastic(const Eigen::MatrixXd& P);

/// Strong connectivity of the transition graph (forward and backward
/// reachability from state 0).
bool is_irreducible(const Eigen::MatrixXd& P);

/// For an irreducible chain: gcd of return times to state 0 equals 1.
bool is_aperiodic(const Eigen::MatrixXd& P);

/// Stationary law by fixed-point iteration pi <- pi P, stopped once the
/// L1 change drops below tol.  Requires an irreducible aperiodic chain.
Eigen::RowVectorXd stationary_distribution(const Eigen::MatrixXd& P,
                                           double tol = 1e-12);

/// phi(r) = max_s sum_y |P^r(s, y) - pi(y)|.
double phi_coefficient(const Eigen::MatrixXd& P, const Eigen::RowVectorXd& pi,
                       int r);

}  // namespace cmix::markov
