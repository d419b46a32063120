#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cmix/grid.hpp"

namespace cmix {

/// Envelopes of a centered function class: sup-norm A, semi-norm B,
/// variance sigma2 and class variance sigmaF2.
struct ClassBounds {
  double A = 1.0;
  double B = 0.0;
  double sigma2 = 1.0;
  double sigmaF2 = 1.0;

  void validate() const;
};

/// Evaluated tail bound.  bound = min(raw, 1).
struct BoundReport {
  std::string family;
  double bound = 1.0;
  double raw = 1.0;
  std::int64_t N0 = 1;
  bool n_ge_n0 = true;
  nlohmann::json params = nlohmann::json::object();
  std::map<std::string, bool> flags;
  std::vector<std::string> warnings;

  /// Magnitude of the exponent, i.e. -log(raw / prefactor).
  double exponent = 0.0;

  nlohmann::json to_json() const;
};

/// Geometric C-mixing on a sampling grid:
///   8m exp(-N t^2 / (2m ((omega/b) log_nu N)^(d'/gamma) (sigma2 + tA)))
/// valid for N >= N0, the smallest N with (N/m)^(omega-1) A/(A+B) >= 2^(d'-1).
BoundReport geometric_bound(double N, double t, const MixingSpec& spec,
                            const ClassBounds& cb, double omega, const SampleGrid& grid);

/// nu = e, d = d' = 1, m = 1 specialization.
BoundReport geometric_bound_1d(double N, double t, double b, double gamma,
                               const ClassBounds& cb, double omega);

/// theta = 1 - (alpha + 1) d' / (gamma + d').
double algebraic_theta(double alpha, int d_eff, double gamma);

/// Algebraic C-mixing on a sampling grid:
///   C1 exp(-N^theta t^2 / (2 C2 (sigma2 + tA))),
///   C1 = m exp(1 + (2^d' + 1)/A), C2 = m^theta b^(-1/(gamma + d')).
/// N0 is the smallest N with (N/m)^alpha > A.
BoundReport algebraic_bound(double N, double t, const MixingSpec& spec,
                            const ClassBounds& cb, double alpha, const SampleGrid& grid);

/// One-dimensional fixed-B variant:
///   C3 exp(-N^(gamma/(gamma+1)) t^2 / (2 C4 (sigma2 + tA))),
///   C3 = exp(1 + 2(A + B)/A), C4 = b^(-1/(gamma+1)).  Valid for all N.
BoundReport algebraic_bound_fixed_b(double N, double t, double b, double gamma,
                                    const ClassBounds& cb);

double algebraic_c3(double A, double B);

/// Earlier Bernstein bound for stationary geometric C-mixing (nu = e):
///   2 exp(-N t^2 / (8 (ln N)^(2/gamma) (sigma2 + tA/3))).
/// Its threshold constant 808c is evaluated with c = 1.
BoundReport hang_steinwart_bound(double N, double t, double b, double gamma,
                                 const ClassBounds& cb);

/// ceil(((omega/b) log_nu N-hat)^(1/gamma)), at least 1.
std::int64_t block_gap_geometric(double n_hat, const MixingSpec& spec, double omega);
/// ceil(N-hat^((alpha+1)/(gamma+d')) b^(1/(gamma+d'))), at least 1.
std::int64_t block_gap_algebraic(double n_hat, const MixingSpec& spec, double alpha,
                                 int d_eff);
/// Fixed-B gap (N-hat b)^(1/(gamma+d')), ceiled.
std::int64_t block_gap_algebraic_fixed_b(double n_hat, const MixingSpec& spec, int d_eff);

/// Arithmetic-progression blocks over the diverging directions of a grid.
struct Blocking {
  std::int64_t P = 1;
  std::vector<std::int64_t> n_k;  // extents of the blocked sub-lattice
  std::vector<std::int64_t> L_k;  // floor(n_k / P)
  std::vector<std::int64_t> r_k;  // n_k - L_k P
  /// Scalar indices 1..N-hat (row-major over n_k) in each block.
  std::vector<std::vector<std::int64_t>> blocks;

  std::int64_t n_hat() const;
  /// 1-based coordinates of a scalar index of the blocked sub-lattice.
  std::vector<std::int64_t> lattice(std::int64_t scalar) const;
};

/// Empty progressions (possible when P > n_k) produce no block.
Blocking build_blocking(const SampleGrid& grid, std::int64_t P);

struct CovarianceCheck {
  double lhs = 0.0;    // |Cov(f(Z_0), g(Z_r))|
  double rhs = 0.0;    // phi(r) ||f||_{L1(pi)} (||g||_inf + ||g||)
  double phi = 0.0;
  bool holds = true;   // lhs <= rhs up to 1e-12
  double slack() const { return rhs - lhs; }
};

/// Exact check of the C-mixing covariance inequality on a stationary
/// finite chain.  g_seminorm is the declared semi-norm of g (0 for the
/// zero semi-norm).
CovarianceCheck covariance_check(const Eigen::MatrixXd& P, const Eigen::VectorXd& f,
                                 const Eigen::VectorXd& g, int lag,
                                 double g_seminorm = 0.0);

}  // namespace cmix
