#include "cmix/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <cstdio>
#include <mutex>
#include <thread>

#include <boost/math/special_functions/beta.hpp>

#include "cmix/io.hpp"
#include "cmix/random.hpp"
#include "cmix/smoothers.hpp"

namespace cmix {

namespace {

constexpr double kRampWidth = 0.1;
constexpr double kBumpWidth = 0.1;
// y-grid spacing for the mode experiments, as a fraction of h^2
constexpr double kModeStepFraction = 0.1;

bool uniform_law(const std::string& process) {
  return process == "doubling" || process == "cell-chain";
}

double median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::uint64_t rep_seed(std::uint64_t master, std::int64_t N, std::int64_t rep) {
  return derive_seed(derive_seed(master, static_cast<std::uint64_t>(N)),
                     static_cast<std::uint64_t>(rep));
}

}  // namespace

Statistic make_statistic(const std::string& id, const std::string& process) {
  Statistic s;
  s.id = id;
  if (id == "sin") {
    if (!uniform_law(process) && process != "logistic")
      throw std::invalid_argument("uncentered statistic: no recorded mean of 'sin' under '" +
                                  process + "'");
    s.fn = [](double x) { return std::sin(2.0 * std::numbers::pi * x); };
    s.A = 1.0;
    s.B = 2.0 * std::numbers::pi;
    // exact under the uniform law; A^2 otherwise
    s.sigma2 = uniform_law(process) ? 0.5 : 1.0;
    return s;
  }
  if (id == "ramp") {
    if (!uniform_law(process))
      throw std::invalid_argument("uncentered statistic: no recorded mean of 'ramp' under '" +
                                  process + "'");
    s.fn = [](double x) {
      return std::clamp((0.5 - x) / kRampWidth + 0.5, 0.0, 1.0) - 0.5;
    };
    s.A = 0.5;
    s.B = 1.0 / kRampWidth;
    s.sigma2 = 0.25 - kRampWidth / 6.0;
    return s;
  }
  if (id == "kernel-at-point") {
    if (!uniform_law(process))
      throw std::invalid_argument(
          "uncentered statistic: no recorded mean of 'kernel-at-point' under '" + process + "'");
    Kernel<double> k(KernelId::Epanechnikov, 1);
    s.fn = [k](double x) { return k((x - 0.5) / kBumpWidth) - kBumpWidth; };
    s.A = std::max(k.sup() - kBumpWidth, kBumpWidth);
    s.B = k.lipschitz() / kBumpWidth;
    s.sigma2 = kBumpWidth * k.roughness() - kBumpWidth * kBumpWidth;
    return s;
  }
  if (id == "identity") {
    if (process != "rademacher")
      throw std::invalid_argument("uncentered statistic: no recorded mean of 'identity' under '" +
                                  process + "'");
    s.fn = [](double x) { return x; };
    s.A = 1.0;
    s.B = 0.0;
    s.sigma2 = 1.0;
    return s;
  }
  throw std::invalid_argument("unknown statistic '" + id + "'");
}

Series generate_process(const std::string& process, std::int64_t n, std::uint64_t seed) {
  if (process == "doubling") return simulate_doubling_map(n, seed);
  if (process == "logistic") return simulate_logistic_map(n, seed);
  if (process == "cell-chain") return simulate_cell_chain(64, 0.5, n, seed);
  if (process == "rademacher") return simulate_rademacher(n, seed);
  throw std::invalid_argument("unknown process '" + process + "'");
}

void for_each_rep(std::int64_t reps, int workers, const std::function<void(std::int64_t)>& fn) {
  if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
  if (workers == 1 || reps <= 1) {
    for (std::int64_t r = 0; r < reps; ++r) fn(r);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::int64_t r; (r = next.fetch_add(1)) < reps;) {
        try {
          fn(r);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

ProportionCI clopper_pearson(std::int64_t k, std::int64_t n, double confidence) {
  if (n < 1 || k < 0 || k > n) throw std::invalid_argument("need 0 <= successes <= trials");
  const double a = 1.0 - confidence;
  ProportionCI ci;
  const auto kd = static_cast<double>(k), nd = static_cast<double>(n);
  ci.lo = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1.0, a / 2.0);
  ci.hi = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - a / 2.0);
  return ci;
}

void TailExperiment::validate() const {
  if (reps < 100) throw std::invalid_argument("tail experiment needs reps >= 100");
  if (Ns.empty()) throw std::invalid_argument("tail experiment needs at least one N");
  for (auto n : Ns)
    if (n < 1) throw std::invalid_argument("sample sizes must be >= 1");
  if (t_grid.empty()) throw std::invalid_argument("tail experiment needs a t grid");
  for (double t : t_grid)
    if (!(t > 0.0)) throw std::invalid_argument("deviations t must be > 0");
  make_statistic(statistic, process);
}

nlohmann::json TailExperiment::to_json() const {
  return {{"process", process}, {"statistic", statistic}, {"seed", seed},
          {"Ns", Ns},           {"t_grid", t_grid},       {"reps", reps}};
}

TailResult tail_probability(const TailExperiment& exp, int workers) {
  exp.validate();
  TailResult res;
  res.statistic = make_statistic(exp.statistic, exp.process);
  const auto nN = static_cast<std::int64_t>(exp.Ns.size());
  res.means.assign(exp.Ns.size(), std::vector<double>(static_cast<std::size_t>(exp.reps)));

  for_each_rep(nN * exp.reps, workers, [&](std::int64_t job) {
    const auto ni = static_cast<std::size_t>(job / exp.reps);
    const auto rep = job % exp.reps;
    const auto N = exp.Ns[ni];
    const Series s = generate_process(exp.process, N, rep_seed(exp.seed, N, rep));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) acc += res.statistic.fn(s.values(i, 0));
    res.means[ni][static_cast<std::size_t>(rep)] = acc / static_cast<double>(N);
  });

  for (std::size_t ni = 0; ni < exp.Ns.size(); ++ni)
    for (double t : exp.t_grid) {
      TailPoint p;
      p.N = exp.Ns[ni];
      p.t = t;
      for (double m : res.means[ni]) p.exceed += std::abs(m) >= t;
      p.probability = static_cast<double>(p.exceed) / static_cast<double>(exp.reps);
      p.ci = clopper_pearson(p.exceed, exp.reps);
      res.points.push_back(p);
    }
  return res;
}

nlohmann::json ComparisonRow::to_json() const {
  return {{"N", N},
          {"t", t},
          {"empirical", empirical},
          {"geometric_1d", ours.to_json()},
          {"hang_steinwart", earlier.to_json()},
          {"algebraic_fixed_b", algebraic.to_json()},
          {"sharper", sharper},
          {"sound", sound}};
}

std::vector<ComparisonRow> bound_comparison(const TailExperiment& exp, const TailResult& tail,
                                            double omega, double b, double gamma) {
  const auto& st = tail.statistic;
  ClassBounds cb{st.A, st.B, st.sigma2, st.sigma2};
  std::vector<ComparisonRow> rows;
  for (const auto& p : tail.points) {
    ComparisonRow row;
    row.N = p.N;
    row.t = p.t;
    row.empirical = p.probability;
    const double N = static_cast<double>(p.N);
    row.ours = geometric_bound_1d(N, p.t, b, gamma, cb, omega);
    row.earlier = hang_steinwart_bound(std::max(N, 3.0), p.t, b, gamma, cb);
    row.algebraic = algebraic_bound_fixed_b(N, p.t, b, gamma, cb);
    row.sharper = row.ours.exponent >= row.earlier.exponent;
    for (const auto* r : {&row.ours, &row.earlier, &row.algebraic})
      if (r->n_ge_n0 && r->bound < row.empirical) row.sound = false;
    rows.push_back(std::move(row));
  }
  (void)exp;
  return rows;
}

void RateConfig::validate() const {
  if (estimator != "kde" && estimator != "mean" && estimator != "var" && estimator != "mode")
    throw std::invalid_argument("unknown estimator '" + estimator + "'");
  if (Ns.size() < 4) throw std::invalid_argument("rate experiment needs at least 4 sample sizes");
  for (std::size_t k = 1; k < Ns.size(); ++k)
    if (Ns[k] <= Ns[k - 1]) throw std::invalid_argument("sample sizes must increase strictly");
  if (Ns.front() < 2) throw std::invalid_argument("sample sizes must be >= 2");
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (grid_points < 1) throw std::invalid_argument("grid_points must be >= 1");
  if (!(alpha > 0.0) || !(gamma > 0.0)) throw std::invalid_argument("need alpha, gamma > 0");
  parse_kernel_id(kernel);
  bandwidth_for(Ns.front());
}

nlohmann::json RateConfig::to_json() const {
  return {{"estimator", estimator}, {"process", process},   {"Ns", Ns},
          {"reps", reps},           {"bandwidth", bandwidth}, {"alpha", alpha},
          {"gamma", gamma},         {"kernel", kernel},     {"grid_points", grid_points},
          {"seed", seed},           {"mean", mean},         {"sigma", sigma},
          {"mode", mode},           {"L", L}};
}

double RateConfig::bandwidth_for(std::int64_t N) const {
  const double n = static_cast<double>(N);
  const int D = 1;
  const bool modal = estimator == "mode";
  if (bandwidth == "optimal")
    return modal ? bandwidth_mode(n, alpha, D) : bandwidth_optimal(n, alpha, D);
  if (bandwidth == "geometric")
    return modal ? std::pow(std::pow(std::log(n), (gamma + 1.0) / gamma) / n,
                            1.0 / (2.0 * alpha + D + 1.0))
                 : bandwidth_geometric(n, alpha, D, gamma);
  if (bandwidth.rfind("value:", 0) == 0) {
    const double h = std::stod(bandwidth.substr(6));
    if (!(h > 0.0)) throw std::invalid_argument("bandwidth value must be > 0");
    return h;
  }
  throw std::invalid_argument("unknown bandwidth rule '" + bandwidth + "'");
}

double RateConfig::target_exponent() const {
  const double D = 1.0;
  return estimator == "mode" ? -alpha / (2.0 * alpha + D + 1.0) : -alpha / (2.0 * alpha + D);
}

nlohmann::json RateReport::to_json() const {
  return {{"Ns", Ns},
          {"bandwidths", bandwidths},
          {"median_sup_errors", median_sup_errors},
          {"slope", slope},
          {"slope_se", slope_se},
          {"target_exponent", target_exponent},
          {"aborted", aborted},
          {"nonnegative", nonnegative}};
}

SlopeFit loglog_slope(const std::vector<double>& Ns, const std::vector<double>& errors) {
  if (Ns.size() != errors.size() || Ns.size() < 3)
    throw std::invalid_argument("slope fit needs >= 3 matched points");
  const auto n = static_cast<double>(Ns.size());
  double mx = 0, my = 0;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < Ns.size(); ++k) {
    if (!(Ns[k] > 0) || !(errors[k] > 0))
      throw std::invalid_argument("slope fit needs positive values");
    lx.push_back(std::log(Ns[k]));
    ly.push_back(std::log(errors[k]));
    mx += lx.back();
    my += ly.back();
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
  }
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    const double r = ly[k] - f.intercept - f.slope * lx[k];
    rss += r * r;
  }
  f.se = std::sqrt(rss / (n - 2.0) / sxx);
  return f;
}

namespace {

struct RepOutcome {
  double error = std::numeric_limits<double>::quiet_NaN();
  bool nonnegative = true;
};

RepOutcome run_rate_rep(const RateConfig& cfg, std::int64_t N, double h, std::uint64_t seed) {
  const Series xs = generate_process(cfg.process, N, seed);
  const Kernel<double> kernel(parse_kernel_id(cfg.kernel), 1);
  const auto grid = interior_grid<double>(h * Kernel<double>::support_radius(), cfg.grid_points);
  const std::uint64_t noise_seed = mix64(seed ^ 0xa54ff53a5f1d36f1ULL);
  RepOutcome out;
  try {
    if (cfg.estimator == "kde") {
      if (xs.density == "none") throw std::invalid_argument("process has no known density");
      const auto f = kde<double>(xs.values, h, kernel, grid.points);
      out.error = sup_error<double>(f, [&](double x) { return evaluate_truth(xs.density, x); },
                                    grid.points)
                      .value;
    } else if (cfg.estimator == "mean") {
      const Dataset ds = make_regression_dataset(xs, cfg.mean, cfg.sigma, cfg.L, noise_seed);
      const auto m = nw_mean<double>(ds.x, ds.y, h, kernel, grid.points);
      out.error =
          sup_error(m, [&](double x) { return evaluate_truth(cfg.mean, x); }, grid.points).value;
    } else if (cfg.estimator == "var") {
      const Dataset ds = make_regression_dataset(xs, cfg.mean, cfg.sigma, cfg.L, noise_seed);
      const auto v = two_step_variance<double>(ds.x, ds.y, h, kernel, grid.points);
      for (Eigen::Index g = 0; g < v.size(); ++g)
        if (v.defined[g] && v.values[g] < 0.0) out.nonnegative = false;
      out.error = sup_error(v,
                            [&](double x) {
                              const double s = evaluate_truth(cfg.sigma, x);
                              return s * s;
                            },
                            grid.points)
                      .value;
    } else {
      const Dataset ds = make_modal_dataset(xs, cfg.mode, cfg.L, noise_seed);
      // known support of Y: mode range widened by the bump and the offset
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int k = 0; k <= 1000; ++k) {
        const double v = evaluate_truth(cfg.mode, k / 1000.0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      lo -= kModalHalfWidth;
      hi += kModalOffset + kModalHalfWidth;
      const auto gy = spaced_grid<double>(lo, hi, kModeStepFraction * h * h);
      const auto mode = modal_regression<double>(ds.x, ds.y, h, kernel, kernel, grid.points, gy);
      if (!mode.any_defined()) throw std::runtime_error("mode undefined at every grid point");
      out.error =
          sup_error(mode, [&](double x) { return evaluate_truth(cfg.mode, x); }, grid.points)
              .value;
    }
  } catch (const std::runtime_error&) {
    out.error = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace

RateReport rate_experiment(const RateConfig& cfg, int workers) {
  cfg.validate();
  RateReport rep;
  rep.Ns = cfg.Ns;
  rep.target_exponent = cfg.target_exponent();
  const auto nN = static_cast<std::int64_t>(cfg.Ns.size());
  for (auto N : cfg.Ns) rep.bandwidths.push_back(cfg.bandwidth_for(N));

  std::vector<std::vector<RepOutcome>> outcomes(
      cfg.Ns.size(), std::vector<RepOutcome>(static_cast<std::size_t>(cfg.reps)));
  // largest N first so the expensive jobs start early
  for_each_rep(nN * cfg.reps, workers, [&](std::int64_t job) {
    const auto ni = static_cast<std::size_t>(nN - 1 - job / cfg.reps);
    const auto r = job % cfg.reps;
    const auto N = cfg.Ns[ni];
    outcomes[ni][static_cast<std::size_t>(r)] =
        run_rate_rep(cfg, N, rep.bandwidths[ni], rep_seed(cfg.seed, N, r));
  });

  std::vector<double> xs;
  for (std::size_t ni = 0; ni < cfg.Ns.size(); ++ni) {
    std::vector<double> errs;
    std::int64_t aborted = 0;
    for (const auto& o : outcomes[ni]) {
      errs.push_back(o.error);
      aborted += std::isnan(o.error);
      rep.nonnegative = rep.nonnegative && o.nonnegative;
    }
    rep.median_sup_errors.push_back(median(errs));
    rep.errors.push_back(std::move(errs));
    rep.aborted.push_back(aborted);
    xs.push_back(static_cast<double>(cfg.Ns[ni]));
  }
  const auto fit = loglog_slope(xs, rep.median_sup_errors);
  rep.slope = fit.slope;
  rep.slope_se = fit.se;
  return rep;
}

std::string tail_report_jsonl(const TailExperiment& exp, const TailResult& tail,
                              const std::vector<ComparisonRow>& rows) {
  std::string out;
  nlohmann::json head = {{"record", "config"}, {"experiment", "tail"}, {"config", exp.to_json()},
                         {"statistic",
                          {{"id", tail.statistic.id},
                           {"A", tail.statistic.A},
                           {"B", tail.statistic.B},
                           {"sigma2", tail.statistic.sigma2}}}};
  out += head.dump() + "\n";
  for (std::size_t k = 0; k < tail.points.size(); ++k) {
    const auto& p = tail.points[k];
    nlohmann::json j = {{"record", "tail"},
                        {"N", p.N},
                        {"t", p.t},
                        {"exceed", p.exceed},
                        {"probability", p.probability},
                        {"ci_lo", p.ci.lo},
                        {"ci_hi", p.ci.hi}};
    if (k < rows.size()) j["comparison"] = rows[k].to_json();
    out += j.dump() + "\n";
  }
  return out;
}

std::string tail_raw_csv(const TailExperiment& exp, const TailResult& tail) {
  std::string out = "N,rep,mean\n";
  for (std::size_t ni = 0; ni < exp.Ns.size(); ++ni)
    for (std::size_t r = 0; r < tail.means[ni].size(); ++r)
      out += std::to_string(exp.Ns[ni]) + "," + std::to_string(r) + "," +
             io::format_double(tail.means[ni][r]) + "\n";
  return out;
}

std::string rate_report_jsonl(const RateConfig& cfg, const RateReport& rep) {
  std::string out;
  out += nlohmann::json{{"record", "config"}, {"experiment", "rate"}, {"config", cfg.to_json()}}
             .dump() +
         "\n";
  for (std::size_t ni = 0; ni < rep.Ns.size(); ++ni)
    out += nlohmann::json{{"record", "point"},
                          {"N", rep.Ns[ni]},
                          {"bandwidth", rep.bandwidths[ni]},
                          {"median_sup_error", rep.median_sup_errors[ni]},
                          {"aborted", rep.aborted[ni]}}
               .dump() +
           "\n";
  nlohmann::json summary = rep.to_json();
  summary["record"] = "summary";
  out += summary.dump() + "\n";
  return out;
}

std::string rate_raw_csv(const RateConfig& cfg, const RateReport& rep) {
  std::string out = "N,rep,sup_error\n";
  for (std::size_t ni = 0; ni < rep.Ns.size(); ++ni)
    for (std::size_t r = 0; r < rep.errors[ni].size(); ++r)
      out += std::to_string(cfg.Ns[ni]) + "," + std::to_string(r) + "," +
             (std::isnan(rep.errors[ni][r]) ? std::string("nan")
                                            : io::format_double(rep.errors[ni][r])) +
             "\n";
  return out;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cmix
