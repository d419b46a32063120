#include "cmix/markov.hpp"

#include <numeric>
#include <stdexcept>
#include <vector>

namespace cmix::markov {

namespace {

std::vector<bool> reachable(const Eigen::MatrixXd& P, bool forward) {
  const auto n = P.rows();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<Eigen::Index> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    auto s = stack.back();
    stack.pop_back();
    for (Eigen::Index t = 0; t < n; ++t) {
      double w = forward ? P(s, t) : P(t, s);
      if (w > 0.0 && !seen[static_cast<std::size_t>(t)]) {
        seen[static_cast<std::size_t>(t)] = true;
        stack.push_back(t);
      }
    }
  }
  return seen;
}

}  // namespace

void validate_stochastic(const Eigen::MatrixXd& P) {
  if (P.rows() == 0 || P.rows() != P.cols())
    throw std::invalid_argument("transition matrix must be square and non-empty");
  if ((P.array() < 0.0).any() || !P.allFinite())
    throw std::invalid_argument("transition matrix has negative or non-finite entries");
  for (Eigen::Index s = 0; s < P.rows(); ++s)
    if (std::abs(P.row(s).sum() - 1.0) > 1e-12)
      throw std::invalid_argument("transition matrix row " + std::to_string(s) +
                                  " does not sum to 1");
}

bool is_irreducible(const Eigen::MatrixXd& P) {
  for (bool dir : {true, false}) {
    auto seen = reachable(P, dir);
    for (bool b : seen)
      if (!b) return false;
  }
  return true;
}

bool is_aperiodic(const Eigen::MatrixXd& P) {
  // BFS levels from state 0; the period is gcd of level(s) + 1 - level(t)
  // over all edges s -> t.
  const auto n = P.rows();
  std::vector<long> level(static_cast<std::size_t>(n), -1);
  std::vector<Eigen::Index> queue{0};
  level[0] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    auto s = queue[head];
    for (Eigen::Index t = 0; t < n; ++t)
      if (P(s, t) > 0.0 && level[static_cast<std::size_t>(t)] < 0) {
        level[static_cast<std::size_t>(t)] = level[static_cast<std::size_t>(s)] + 1;
        queue.push_back(t);
      }
  }
  long g = 0;
  for (Eigen::Index s = 0; s < n; ++s)
    for (Eigen::Index t = 0; t < n; ++t)
      if (P(s, t) > 0.0 && level[static_cast<std::size_t>(s)] >= 0 &&
          level[static_cast<std::size_t>(t)] >= 0)
        g = std::gcd(g, std::abs(level[static_cast<std::size_t>(s)] + 1 -
                                 level[static_cast<std::size_t>(t)]));
  return g == 1;
}

Eigen::RowVectorXd stationary_distribution(const Eigen::MatrixXd& P, double tol) {
  validate_stochastic(P);
  if (!is_irreducible(P)) throw std::invalid_argument("transition matrix is reducible");
  if (!is_aperiodic(P)) throw std::invalid_argument("transition matrix is periodic");
  const auto n = P.rows();
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  constexpr long max_iter = 50'000'000;
  for (long it = 0; it < max_iter; ++it) {
    Eigen::RowVectorXd next = pi * P;
    next /= next.sum();
    double change = (next - pi).lpNorm<1>();
    pi = std::move(next);
    if (change < tol) return pi;
  }
  throw std::runtime_error("stationary distribution iteration did not converge");
}

double phi_coefficient(const Eigen::MatrixXd& P, const Eigen::RowVectorXd& pi, int r) {
  if (r < 0) throw std::invalid_argument("lag must be >= 0");
  Eigen::MatrixXd Pr = Eigen::MatrixXd::Identity(P.rows(), P.cols());
  for (int k = 0; k < r; ++k) Pr = Pr * P;
  return (Pr.rowwise() - pi).cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace cmix::markov
