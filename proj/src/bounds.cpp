#include "cmix/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cmix/markov.hpp"

namespace cmix {

namespace {

constexpr double kInt64Max = 9.2e18;

// Ceil that ignores rounding noise just above an integer.
std::int64_t snapped_ceil(double x) {
  const double c = std::ceil(x - 1e-12 * std::max(1.0, std::abs(x)));
  if (c > kInt64Max) return std::numeric_limits<std::int64_t>::max();
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(c));
}

void require_t(double t) {
  if (!(t > 0.0)) throw std::invalid_argument("deviation t must be > 0");
}

void finish(BoundReport& r, double prefactor, double exponent, double N) {
  r.exponent = exponent;
  r.raw = prefactor * std::exp(-exponent);
  r.bound = std::clamp(r.raw, 0.0, 1.0);
  r.n_ge_n0 = N >= static_cast<double>(r.N0);
}

// Smallest integer N >= 1 with N >= threshold (inclusive), checked with
// the exact predicate to absorb rounding in the closed-form solve.
template <class Pred>
std::int64_t smallest_satisfying(double estimate, Pred pred) {
  std::int64_t n = snapped_ceil(estimate);
  if (n == std::numeric_limits<std::int64_t>::max()) return n;
  while (n > 1 && pred(static_cast<double>(n - 1))) --n;
  while (!pred(static_cast<double>(n))) ++n;
  return n;
}

}  // namespace

void ClassBounds::validate() const {
  if (!(A > 0.0)) throw std::invalid_argument("sup-norm envelope A must be > 0");
  if (!(B >= 0.0)) throw std::invalid_argument("semi-norm envelope B must be >= 0");
  if (!(sigma2 >= 0.0) || !(sigmaF2 >= 0.0))
    throw std::invalid_argument("variance envelopes must be >= 0");
  if (sigma2 > A * A * (1.0 + 1e-12))
    throw std::invalid_argument("variance envelope exceeds A^2");
}

nlohmann::json BoundReport::to_json() const {
  nlohmann::json j = {{"family", family},  {"bound", bound},     {"raw", raw},
                      {"N0", N0},          {"n_ge_n0", n_ge_n0}, {"exponent", exponent},
                      {"params", params}};
  if (!flags.empty()) j["flags"] = flags;
  if (!warnings.empty()) j["warnings"] = warnings;
  return j;
}

BoundReport geometric_bound(double N, double t, const MixingSpec& spec,
                            const ClassBounds& cb, double omega, const SampleGrid& grid) {
  spec.validate();
  cb.validate();
  require_t(t);
  if (spec.kind != MixingSpec::Kind::Geometric)
    throw std::invalid_argument("geometric bound needs a geometric mixing spec");
  if (!(omega > 1.0)) throw std::invalid_argument("omega must be > 1");
  if (N < 2.0) throw std::invalid_argument("sample size N must be >= 2");

  const double m = static_cast<double>(grid.m());
  const double dp = grid.d_eff();
  const double log_factor = std::pow(omega / spec.b * spec.log_nu(N), dp / spec.gamma);
  const double exponent = N * t * t / (2.0 * m * log_factor * (cb.sigma2 + t * cb.A));

  BoundReport r;
  r.family = "geometric";
  const double need = std::pow(2.0, dp - 1.0) * (cb.A + cb.B) / cb.A;
  r.N0 = smallest_satisfying(m * std::pow(need, 1.0 / (omega - 1.0)), [&](double n) {
    return std::pow(n / m, omega - 1.0) * cb.A / (cb.A + cb.B) >= std::pow(2.0, dp - 1.0) * (1.0 - 1e-12);
  });
  finish(r, 8.0 * m, exponent, N);
  r.params = {{"N", N},         {"t", t},           {"omega", omega},
              {"m", grid.m()},  {"d_eff", grid.d_eff()}, {"nu", spec.nu},
              {"b", spec.b},    {"gamma", spec.gamma},   {"A", cb.A},
              {"B", cb.B},      {"sigma2", cb.sigma2}};
  return r;
}

BoundReport geometric_bound_1d(double N, double t, double b, double gamma,
                               const ClassBounds& cb, double omega) {
  cb.validate();
  require_t(t);
  if (!(omega > 1.0)) throw std::invalid_argument("omega must be > 1");
  if (N < 2.0) throw std::invalid_argument("sample size N must be >= 2");
  if (!(b > 0.0) || !(gamma > 0.0))
    throw std::invalid_argument("mixing parameters b, gamma must be > 0");

  const double exponent = N * t * t /
                          (2.0 * std::pow(omega / b * std::log(N), 1.0 / gamma) *
                           (cb.sigma2 + t * cb.A));
  BoundReport r;
  r.family = "geometric-1d";
  r.N0 = smallest_satisfying(std::pow((cb.A + cb.B) / cb.A, 1.0 / (omega - 1.0)),
                             [&](double n) {
                               return std::pow(n, omega - 1.0) * cb.A / (cb.A + cb.B) >= 1.0 - 1e-12;
                             });
  finish(r, 8.0, exponent, N);
  r.params = {{"N", N}, {"t", t},   {"omega", omega}, {"b", b},
              {"gamma", gamma}, {"A", cb.A}, {"B", cb.B}, {"sigma2", cb.sigma2}};
  return r;
}

double algebraic_theta(double alpha, int d_eff, double gamma) {
  return 1.0 - (alpha + 1.0) * d_eff / (gamma + d_eff);
}

BoundReport algebraic_bound(double N, double t, const MixingSpec& spec,
                            const ClassBounds& cb, double alpha, const SampleGrid& grid) {
  spec.validate();
  cb.validate();
  require_t(t);
  if (spec.kind != MixingSpec::Kind::Algebraic)
    throw std::invalid_argument("algebraic bound needs an algebraic mixing spec");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (N < 1.0) throw std::invalid_argument("sample size N must be >= 1");
  const int dp = grid.d_eff();
  if (!(spec.gamma > alpha * dp))
    throw std::invalid_argument("algebraic bound requires gamma > alpha d'");

  const double m = static_cast<double>(grid.m());
  const double theta = algebraic_theta(alpha, dp, spec.gamma);
  const double c1 = m * std::exp(1.0 + (std::pow(2.0, dp) + 1.0) / cb.A);
  const double c2 = std::pow(m, theta) * std::pow(spec.b, -1.0 / (spec.gamma + dp));
  const double exponent =
      std::pow(N, theta) * t * t / (2.0 * c2 * (cb.sigma2 + t * cb.A));

  BoundReport r;
  r.family = "algebraic";
  r.N0 = smallest_satisfying(m * std::pow(cb.A, 1.0 / alpha), [&](double n) {
    return std::pow(n / m, alpha) > cb.A;
  });
  finish(r, c1, exponent, N);
  if (cb.B > std::pow(N, alpha))
    r.warnings.push_back("semi-norm envelope B exceeds N^alpha");
  r.params = {{"N", N},           {"t", t},         {"alpha", alpha}, {"m", grid.m()},
              {"d_eff", dp},      {"b", spec.b},    {"gamma", spec.gamma},
              {"A", cb.A},        {"B", cb.B},      {"sigma2", cb.sigma2},
              {"theta", theta},   {"C1", c1},       {"C2", c2}};
  return r;
}

double algebraic_c3(double A, double B) { return std::exp(1.0 + 2.0 * (A + B) / A); }

BoundReport algebraic_bound_fixed_b(double N, double t, double b, double gamma,
                                    const ClassBounds& cb) {
  cb.validate();
  require_t(t);
  if (N < 1.0) throw std::invalid_argument("sample size N must be >= 1");
  if (!(b > 0.0) || !(gamma > 0.0))
    throw std::invalid_argument("mixing parameters b, gamma must be > 0");
  const double c3 = algebraic_c3(cb.A, cb.B);
  const double c4 = std::pow(b, -1.0 / (gamma + 1.0));
  const double exponent = std::pow(N, gamma / (gamma + 1.0)) * t * t /
                          (2.0 * c4 * (cb.sigma2 + t * cb.A));
  BoundReport r;
  r.family = "algebraic-fixed-b";
  r.N0 = 1;
  finish(r, c3, exponent, N);
  r.params = {{"N", N}, {"t", t},   {"b", b},   {"gamma", gamma},
              {"A", cb.A}, {"B", cb.B}, {"sigma2", cb.sigma2}, {"C3", c3}, {"C4", c4}};
  return r;
}

BoundReport hang_steinwart_bound(double N, double t, double b, double gamma,
                                 const ClassBounds& cb) {
  cb.validate();
  require_t(t);
  if (N < 3.0) throw std::invalid_argument("sample size N must be >= 3");
  if (!(b > 0.0) || !(gamma > 0.0))
    throw std::invalid_argument("mixing parameters b, gamma must be > 0");

  const double k = 2.0 / gamma;
  const double exponent = N * t * t /
                          (8.0 * std::pow(std::log(N), k) * (cb.sigma2 + t * cb.A / 3.0));

  // min{N >= 3 : N^2 >= 808c(3B + A)/A and N/(ln N)^(2/gamma) >= 4}, c = 1
  const double c = 1.0;
  const double need_sq = 808.0 * c * (3.0 * cb.B + cb.A) / cb.A;
  auto ratio_ok = [k](double n) { return n / std::pow(std::log(n), k) >= 4.0; };
  double n = std::max(3.0, std::ceil(std::sqrt(need_sq)));
  while (n * n < need_sq) n += 1.0;
  if (!ratio_ok(n)) {
    // n/(ln n)^k decreases up to e^k and increases afterwards
    n = std::max(n, std::ceil(std::exp(k)));
    double hi = n;
    while (!ratio_ok(hi)) hi *= 2.0;
    double lo = std::max(n, hi / 2.0);
    if (ratio_ok(lo)) hi = lo;
    while (hi - lo > 1.0) {
      double mid = std::floor((lo + hi) / 2.0);
      (ratio_ok(mid) ? hi : lo) = mid;
    }
    n = hi;
  }
  const double n0 = std::max(n, std::ceil(std::exp(3.0 / b)));

  BoundReport r;
  r.family = "hang-steinwart";
  r.N0 = n0 > kInt64Max ? std::numeric_limits<std::int64_t>::max()
                        : static_cast<std::int64_t>(n0);
  finish(r, 2.0, exponent, N);
  r.params = {{"N", N}, {"t", t}, {"b", b}, {"gamma", gamma}, {"A", cb.A},
              {"B", cb.B}, {"sigma2", cb.sigma2}, {"c", c}};
  return r;
}

std::int64_t block_gap_geometric(double n_hat, const MixingSpec& spec, double omega) {
  spec.validate();
  if (n_hat < 1.0) throw std::invalid_argument("N-hat must be >= 1");
  if (!(omega > 1.0)) throw std::invalid_argument("omega must be > 1");
  const double base = omega / spec.b * spec.log_nu(n_hat);
  if (base <= 0.0) return 1;
  return snapped_ceil(std::pow(base, 1.0 / spec.gamma));
}

std::int64_t block_gap_algebraic(double n_hat, const MixingSpec& spec, double alpha,
                                 int d_eff) {
  spec.validate();
  if (n_hat < 1.0) throw std::invalid_argument("N-hat must be >= 1");
  const double e = 1.0 / (spec.gamma + d_eff);
  return snapped_ceil(std::pow(n_hat, (alpha + 1.0) * e) * std::pow(spec.b, e));
}

std::int64_t block_gap_algebraic_fixed_b(double n_hat, const MixingSpec& spec, int d_eff) {
  spec.validate();
  if (n_hat < 1.0) throw std::invalid_argument("N-hat must be >= 1");
  return snapped_ceil(std::pow(n_hat * spec.b, 1.0 / (spec.gamma + d_eff)));
}

std::int64_t Blocking::n_hat() const {
  std::int64_t n = 1;
  for (auto v : n_k) n *= v;
  return n;
}

std::vector<std::int64_t> Blocking::lattice(std::int64_t scalar) const {
  std::vector<std::int64_t> v(n_k.size());
  std::int64_t rest = scalar - 1;
  for (std::size_t k = n_k.size(); k-- > 0;) {
    v[k] = rest % n_k[k] + 1;
    rest /= n_k[k];
  }
  return v;
}

Blocking build_blocking(const SampleGrid& grid, std::int64_t P) {
  if (P < 1) throw std::invalid_argument("block gap P must be >= 1");
  Blocking out;
  out.P = P;
  out.n_k = grid.diverging_counts();
  const std::size_t dp = out.n_k.size();

  // per-direction progressions I(j_k), j_k = 1..min(P, n_k)
  std::vector<std::vector<std::vector<std::int64_t>>> progressions(dp);
  for (std::size_t k = 0; k < dp; ++k) {
    const std::int64_t L = out.n_k[k] / P;
    const std::int64_t r = out.n_k[k] - L * P;
    out.L_k.push_back(L);
    out.r_k.push_back(r);
    for (std::int64_t j = 1; j <= std::min(P, out.n_k[k]); ++j) {
      const std::int64_t count = j <= r ? L + 1 : L;
      std::vector<std::int64_t> prog;
      prog.reserve(static_cast<std::size_t>(count));
      for (std::int64_t l = 0; l < count; ++l) prog.push_back(j + l * P);
      progressions[k].push_back(std::move(prog));
    }
  }

  // Cartesian products of one progression per direction
  std::vector<std::size_t> pick(dp, 0);
  for (;;) {
    std::vector<std::int64_t> block{0};
    for (std::size_t k = 0; k < dp; ++k) {
      const auto& prog = progressions[k][pick[k]];
      std::vector<std::int64_t> next;
      next.reserve(block.size() * prog.size());
      for (auto partial : block)
        for (auto i : prog) next.push_back(partial * out.n_k[k] + (i - 1));
      block = std::move(next);
    }
    for (auto& s : block) s += 1;
    out.blocks.push_back(std::move(block));

    std::size_t k = dp;
    while (k-- > 0) {
      if (++pick[k] < progressions[k].size()) break;
      pick[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

CovarianceCheck covariance_check(const Eigen::MatrixXd& P, const Eigen::VectorXd& f,
                                 const Eigen::VectorXd& g, int lag, double g_seminorm) {
  if (f.size() != P.rows() || g.size() != P.rows())
    throw std::invalid_argument("f and g need one value per chain state");
  if (lag < 0) throw std::invalid_argument("lag must be >= 0");
  if (g_seminorm < 0.0) throw std::invalid_argument("semi-norm value must be >= 0");
  const Eigen::RowVectorXd pi = markov::stationary_distribution(P);

  Eigen::MatrixXd Pr = Eigen::MatrixXd::Identity(P.rows(), P.cols());
  for (int k = 0; k < lag; ++k) Pr = Pr * P;
  const double joint = pi * f.cwiseProduct(Pr * g);
  const double cov = joint - pi.dot(f) * pi.dot(g);

  CovarianceCheck c;
  c.lhs = std::abs(cov);
  c.phi = (Pr.rowwise() - pi).cwiseAbs().rowwise().sum().maxCoeff();
  c.rhs = c.phi * pi.dot(f.cwiseAbs()) * (g.cwiseAbs().maxCoeff() + g_seminorm);
  c.holds = c.lhs <= c.rhs + 1e-12;
  return c;
}

}  // namespace cmix
