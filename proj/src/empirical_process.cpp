#include "cmix/empirical_process.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmix {

void EntropySpec::validate() const {
  if (!(c > 0.0)) throw std::invalid_argument("covering constant c must be > 0");
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth h must be > 0");
  if (D < 1) throw std::invalid_argument("input dimension D must be >= 1");
}

double EntropySpec::clamp_radius() const { return c / std::pow(h, D + 1); }

double covering_bound(double tau, const EntropySpec& spec) {
  spec.validate();
  if (!(tau > 0.0)) throw std::invalid_argument("covering radius must be > 0");
  return std::max(1.0, std::pow(spec.c / (tau * std::pow(spec.h, spec.D + 1)), spec.D));
}

namespace {

double simpson(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(fa, flm, fm, a, m);
  const double right = simpson(fm, frm, fb, m, b);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson_step(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth);
}

double dudley_integral(double lower, double upper,
                       const std::function<double(double)>& covering) {
  if (!(lower > 0.0) || !(lower <= upper))
    throw std::invalid_argument("Dudley integral needs 0 < lower <= upper");
  auto integrand = [&](double u) {
    const double n = covering(u * u);
    if (!(n >= 1.0) || !std::isfinite(n))
      throw std::domain_error("covering number must be finite and >= 1");
    return std::sqrt(std::log(n));
  };
  return adaptive_simpson(integrand, lower, upper, 1e-8);
}

double dudley_integral(double lower, double upper, const EntropySpec& spec) {
  spec.validate();
  if (!(lower > 0.0) || !(lower <= upper))
    throw std::invalid_argument("Dudley integral needs 0 < lower <= upper");
  // the integrand vanishes for u^2 >= c / h^(D+1); integrate up to there
  const double kink = std::sqrt(spec.clamp_radius());
  const double top = std::min(upper, kink);
  if (top <= lower) return 0.0;
  return dudley_integral(lower, top, [&spec](double tau) { return covering_bound(tau, spec); });
}

void ChainParams::validate() const {
  if (!(N > 1.0)) throw std::invalid_argument("N must be > 1");
  if (!(t > 0.0)) throw std::invalid_argument("t must be > 0");
  if (!(L_N >= 1.0)) throw std::invalid_argument("truncation level L_N must be >= 1");
  if (!(sigma2 > 0.0) || !(sigmaF2 > 0.0))
    throw std::invalid_argument("sigma2 and sigmaF2 must be > 0");
  if (!(A > 0.0) || !(B >= 0.0)) throw std::invalid_argument("need A > 0 and B >= 0");
  if (!(omega > 1.0)) throw std::invalid_argument("omega must be > 1");
  if (!(b > 0.0) || !(gamma > 0.0)) throw std::invalid_argument("need b, gamma > 0");
}

nlohmann::json ChainParams::to_json() const {
  return {{"N", N},       {"t", t},         {"L_N", L_N}, {"sigma2", sigma2},
          {"sigmaF2", sigmaF2}, {"A", A},   {"B", B},     {"omega", omega},
          {"b", b},       {"gamma", gamma}};
}

nlohmann::json ConditionReport::to_json() const {
  const std::string p(1, prefix);
  return {{p + "1", c1},         {p + "2", c2},         {p + "3", c3},
          {p + "4", c4},         {"margin_" + p + "1", m1}, {"margin_" + p + "2", m2},
          {"margin_" + p + "3", m3}, {"margin_" + p + "4", m4}, {"integral", integral},
          {"all", all()}};
}

namespace {

// sqrt(N / (ln N)^(1/gamma)) t, shared lhs of conditions 2 and 4
double effective_deviation(const ChainParams& p) {
  return std::sqrt(p.N / std::pow(std::log(p.N), 1.0 / p.gamma)) * p.t;
}

double mixing_scale(const ChainParams& p) {
  return std::pow(p.b / p.omega, 1.0 / (2.0 * p.gamma));
}

double entropy_term(double lower, double upper, const EntropySpec& spec) {
  if (lower >= upper) return 0.0;
  return dudley_integral(lower, upper, spec);
}

}  // namespace

ConditionReport check_conditions_prop6(const ChainParams& p, const EntropySpec& spec) {
  p.validate();
  spec.validate();
  const double sigma = std::sqrt(p.sigma2);
  const double sigmaF = std::sqrt(p.sigmaF2);
  const double lhs = effective_deviation(p);
  const double scale = mixing_scale(p);
  constexpr int d_eff = 1;

  ConditionReport r;
  r.prefix = 'C';
  r.m1 = p.sigma2 * p.sigmaF2 / 10.0 - p.t * p.A * p.L_N;
  r.c1 = r.m1 >= 0.0 && p.L_N >= 1.0;

  r.m2 = lhs - 15.0 * sigma * sigmaF / scale;
  r.c2 = r.m2 >= 0.0;

  r.m3 = std::pow(p.N, p.omega - 1.0) -
         (2.0 + 32.0 * p.B * p.L_N * sigmaF / (5.0 * p.A * p.t)) * std::pow(2.0, d_eff - 1);
  r.c3 = r.m3 >= 0.0;

  r.integral = entropy_term(0.5 * std::pow(p.t / p.L_N, 0.25), std::pow(sigmaF, 0.25), spec);
  r.m4 = lhs - 60.0 * std::sqrt(10.0) * sigma * std::sqrt(sigmaF) / scale * r.integral;
  r.c4 = r.m4 >= 0.0;
  return r;
}

ConditionReport check_conditions_cor7(const ChainParams& p, const EntropySpec& spec) {
  p.validate();
  spec.validate();
  const double sigmaF = std::sqrt(p.sigmaF2);
  const double lhs = effective_deviation(p);
  const double scale = mixing_scale(p);
  constexpr int d_eff = 1;

  ConditionReport r;
  r.prefix = 'D';
  r.m1 = p.sigmaF2 / 10.0 - p.t * p.A;
  r.c1 = r.m1 >= 0.0;

  r.m2 = lhs - 15.0 * sigmaF / scale;
  r.c2 = r.m2 >= 0.0;

  r.m3 = std::pow(p.N, p.omega - 1.0) -
         (1.5 + 16.0 * p.B * sigmaF / (5.0 * p.A * p.t)) * std::pow(2.0, d_eff - 1);
  r.c3 = r.m3 >= 0.0;

  r.integral = entropy_term(0.5 * std::pow(p.t, 0.25), std::pow(sigmaF, 0.25), spec);
  r.m4 = lhs - 60.0 * std::sqrt(10.0) * std::sqrt(sigmaF) / scale * r.integral;
  r.c4 = r.m4 >= 0.0;
  return r;
}

namespace {

BoundReport chaining_bound(const ChainParams& p, double variance, const std::string& family,
                           const ConditionReport& cond) {
  BoundReport r;
  r.family = family;
  r.exponent = std::pow(p.b / p.omega, 1.0 / p.gamma) * p.N * p.t * p.t /
               (2250.0 * std::pow(std::log(p.N), 1.0 / p.gamma) * variance);
  r.raw = 88.0 * std::exp(-r.exponent);
  r.bound = std::clamp(r.raw, 0.0, 1.0);
  r.N0 = 1;
  r.n_ge_n0 = cond.all();
  r.params = p.to_json();
  const std::string c(1, cond.prefix);
  r.flags = {{c + "1", cond.c1}, {c + "2", cond.c2}, {c + "3", cond.c3}, {c + "4", cond.c4}};
  return r;
}

}  // namespace

BoundReport prop6_bound(const ChainParams& p, const EntropySpec& spec) {
  auto cond = check_conditions_prop6(p, spec);
  return chaining_bound(p, p.sigma2 * p.sigmaF2, "prop6", cond);
}

BoundReport cor7_bound(const ChainParams& p, const EntropySpec& spec) {
  auto cond = check_conditions_cor7(p, spec);
  return chaining_bound(p, p.sigmaF2, "cor7", cond);
}

}  // namespace cmix
