#pragma once

#include <functional>
#include <string>

#include <json.hpp>

#include "cmix/bounds.hpp"

namespace cmix {

/// Covering bound of a kernel translation class,
/// N(tau) = max(1, (c / (tau h^(D+1)))^D).
struct EntropySpec {
  double c = 1.0;
  double h = 1.0;
  int D = 1;

  void validate() const;
  /// Radius above which the bound is clamped to 1: c / h^(D+1).
  double clamp_radius() const;
};

double covering_bound(double tau, const EntropySpec& spec);

/// Adaptive Simpson over [lower, upper] of sqrt(log N(u^2)), absolute
/// tolerance 1e-8.
double dudley_integral(double lower, double upper, const EntropySpec& spec);
/// Same integral for a user-supplied covering number tau -> N(tau) >= 1.
double dudley_integral(double lower, double upper,
                       const std::function<double(double)>& covering);

/// Generic adaptive Simpson quadrature.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 60);

/// Parameters of the chaining bound for a multiplier empirical process.
struct ChainParams {
  double N = 2.0;
  double t = 1.0;
  double L_N = 1.0;     // truncation level
  double sigma2 = 1.0;  // sup_x E[Y^2 | X = x]
  double sigmaF2 = 1.0; // class variance
  double A = 1.0;
  double B = 0.0;
  double omega = 2.0;
  double b = 1.0;
  double gamma = 1.0;

  void validate() const;
  nlohmann::json to_json() const;
};

struct ConditionReport {
  bool c1 = false, c2 = false, c3 = false, c4 = false;
  /// lhs - rhs of each inequality (>= 0 when it holds).
  double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
  double integral = 0.0;
  /// "C" for the multiplier process, "D" for the plain empirical process.
  char prefix = 'C';

  bool all() const { return c1 && c2 && c3 && c4; }
  nlohmann::json to_json() const;
};

/// Side conditions C1-C4 of the multiplier chaining bound (d' = 1).
ConditionReport check_conditions_prop6(const ChainParams& p, const EntropySpec& spec);
/// Side conditions D1-D4 of the plain (unweighted) chaining bound (d' = 1).
ConditionReport check_conditions_cor7(const ChainParams& p, const EntropySpec& spec);

/// 88 exp(-(b/omega)^(1/gamma) N t^2 / (2250 (ln N)^(1/gamma) sigma2 sigmaF2)).
BoundReport prop6_bound(const ChainParams& p, const EntropySpec& spec);
/// Plain-process form: the same exponent without sigma2.
BoundReport cor7_bound(const ChainParams& p, const EntropySpec& spec);

}  // namespace cmix
