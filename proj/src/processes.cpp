#include "cmix/processes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cmix/markov.hpp"
#include "cmix/random.hpp"

namespace cmix {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

void require_length(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("series length must be >= 1");
}

// Splits "base+c" into (base, c).
std::pair<std::string, double> split_offset(const std::string& id) {
  auto pos = id.find('+', 1);
  if (pos == std::string::npos) return {id, 0.0};
  return {id.substr(0, pos), std::stod(id.substr(pos + 1))};
}

}  // namespace

void Dataset::validate() const {
  if (x.rows() != y.size()) throw std::invalid_argument("dataset has |x| != |y|");
  if (y_bound) {
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (std::abs(y[i]) > *y_bound)
        throw std::invalid_argument("dataset violates |y| <= L at row " +
                                    std::to_string(i));
  }
}

double evaluate_truth(const std::string& id, double x) {
  auto [base, offset] = split_offset(id);
  double v;
  if (base == "zero") {
    v = 0.0;
  } else if (base.rfind("const:", 0) == 0) {
    v = std::stod(base.substr(6));
  } else if (base == "sin") {
    v = std::sin(2.0 * std::numbers::pi * x);
  } else if (base == "half-sin") {
    v = 0.5 + 0.25 * std::sin(2.0 * std::numbers::pi * x);
  } else if (base == "poly") {
    v = 4.0 * x * (1.0 - x);
  } else if (base == "kink") {
    v = 0.3 + 0.2 * std::abs(x - 0.5);
  } else if (base == "uniform") {
    v = (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
  } else if (base == "arcsine") {
    v = logistic_density(x);
  } else {
    throw std::invalid_argument("unknown truth function id '" + id + "'");
  }
  return v + offset;
}

double truth_sup_abs(const std::string& id) {
  auto [base, offset] = split_offset(id);
  double lo, hi;
  if (base == "zero") {
    lo = hi = 0.0;
  } else if (base.rfind("const:", 0) == 0) {
    lo = hi = std::stod(base.substr(6));
  } else if (base == "sin") {
    lo = -1.0, hi = 1.0;
  } else if (base == "half-sin") {
    lo = 0.25, hi = 0.75;
  } else if (base == "poly") {
    lo = 0.0, hi = 1.0;
  } else if (base == "kink") {
    lo = 0.3, hi = 0.4;
  } else if (base == "uniform") {
    lo = 0.0, hi = 1.0;
  } else {
    throw std::invalid_argument("no sup bound for truth function id '" + id + "'");
  }
  return std::max(std::abs(lo + offset), std::abs(hi + offset));
}

bool is_known_truth(const std::string& id) {
  try {
    evaluate_truth(id, 0.5);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

Series simulate_doubling_map(std::int64_t n, std::uint64_t seed) {
  Rng rng(seed);
  Series s = simulate_doubling_map(n, [&rng] { return rng.bits(); });
  s.seed = seed;
  return s;
}

Series simulate_doubling_map(std::int64_t n,
                             const std::function<std::uint64_t()>& words) {
  require_length(n);
  Series s;
  s.values.resize(n, 1);
  s.grid = SampleGrid::series(n);
  s.process = "doubling";
  s.density = "uniform";
  // window holds b_{t+1} .. b_{t+64}; x_t is its binary fraction
  std::uint64_t window = words();
  std::uint64_t pending = 0;
  int pending_bits = 0;
  for (std::int64_t t = 0; t < n; ++t) {
    s.values(t, 0) = static_cast<double>(window >> 11) * 0x1.0p-53;
    if (pending_bits == 0) {
      pending = words();
      pending_bits = 64;
    }
    window = (window << 1) | (pending >> 63);
    pending <<= 1;
    --pending_bits;
  }
  return s;
}

Eigen::VectorXd logistic_orbit(double x0, std::int64_t n, std::int64_t burn_in) {
  require_length(n);
  double x = x0;
  for (std::int64_t t = 0; t < burn_in; ++t) x = 4.0 * x * (1.0 - x);
  Eigen::VectorXd out(n);
  for (std::int64_t t = 0; t < n; ++t) {
    out[t] = x;
    x = 4.0 * x * (1.0 - x);
  }
  return out;
}

double logistic_density(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return 1.0 / (std::numbers::pi * std::sqrt(x * (1.0 - x)));
}

Series simulate_logistic_map(std::int64_t n, std::uint64_t seed, std::int64_t burn_in) {
  require_length(n);
  if (burn_in < 0) throw std::invalid_argument("burn-in must be >= 0");
  Rng rng(seed);
  Eigen::VectorXd orbit;
  for (;;) {
    double x0 = rng.uniform_open();
    // 0, 1/4, 1/2, 3/4 and 1 land on the fixed points 0 and 3/4
    if (x0 == 0.25 || x0 == 0.5 || x0 == 0.75) continue;
    orbit = logistic_orbit(x0, n, burn_in);
    // a double orbit can still be absorbed at 0; redraw if it is
    if ((orbit.array() <= 0.0).any() || (orbit.array() >= 1.0).any()) continue;
    break;
  }
  Series s;
  s.values = orbit;
  s.grid = SampleGrid::series(n);
  s.process = "logistic";
  s.params = {{"burn_in", burn_in}};
  s.seed = seed;
  s.density = "arcsine";
  return s;
}

Series simulate_markov_chain(const Eigen::MatrixXd& P, const Eigen::VectorXd& states,
                             std::int64_t n, std::uint64_t seed) {
  require_length(n);
  if (states.size() != P.rows())
    throw std::invalid_argument("need one label per chain state");
  const Eigen::RowVectorXd pi = markov::stationary_distribution(P);
  const auto k = P.rows();

  // cumulative rows for inverse-CDF draws
  Eigen::MatrixXd cum(k, k);
  for (Eigen::Index s = 0; s < k; ++s) {
    double acc = 0.0;
    for (Eigen::Index t = 0; t < k; ++t) cum(s, t) = (acc += P(s, t));
  }
  Eigen::RowVectorXd pi_cum(k);
  double acc = 0.0;
  for (Eigen::Index t = 0; t < k; ++t) pi_cum[t] = (acc += pi[t]);

  auto draw = [k](const auto& row, double u) {
    for (Eigen::Index t = 0; t < k; ++t)
      if (u < row[t]) return t;
    return k - 1;
  };

  Rng rng(seed);
  Series s;
  s.values.resize(n, 1);
  s.grid = SampleGrid::series(n);
  s.process = "markov";
  s.seed = seed;
  Eigen::Index state = draw(pi_cum, rng.uniform() * pi_cum[k - 1]);
  for (std::int64_t t = 0; t < n; ++t) {
    s.values(t, 0) = states[state];
    state = draw(cum.row(state), rng.uniform() * cum(state, k - 1));
  }
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < k; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < k; ++c) row.push_back(P(r, c));
    rows.push_back(std::move(row));
  }
  s.params = {{"P", rows},
              {"states", std::vector<double>(states.data(), states.data() + states.size())}};
  return s;
}

Eigen::MatrixXd cell_chain_matrix(int cells, double rho) {
  if (cells < 3) throw std::invalid_argument("cell chain needs at least 3 cells");
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in [0, 1)");
  Eigen::MatrixXd P = Eigen::MatrixXd::Constant(cells, cells, (1.0 - rho) / cells);
  for (int s = 0; s < cells; ++s) {
    P(s, (s + 1) % cells) += 0.5 * rho;
    P(s, (s + cells - 1) % cells) += 0.5 * rho;
  }
  return P;
}

Series simulate_cell_chain(int cells, double rho, std::int64_t n, std::uint64_t seed) {
  Eigen::MatrixXd P = cell_chain_matrix(cells, rho);
  Eigen::VectorXd labels = Eigen::VectorXd::LinSpaced(cells, 0.0, cells - 1.0);
  Series s = simulate_markov_chain(P, labels, n, seed);
  Rng jitter(mix64(seed ^ 0x6a09e667f3bcc909ULL));
  for (std::int64_t t = 0; t < n; ++t)
    s.values(t, 0) = (s.values(t, 0) + jitter.uniform()) / cells;
  s.process = "cell-chain";
  s.params = {{"cells", cells}, {"rho", rho}};
  s.density = "uniform";
  return s;
}

Series simulate_lattice_field(const SampleGrid& grid, int range, std::uint64_t seed) {
  if (range < 0) throw std::invalid_argument("field range must be >= 0");
  if (!grid.satisfies_log_condition())
    throw std::invalid_argument("grid violates log(N-hat) <= min n_k");
  const auto ext = grid.extents();
  const int d = grid.d();
  std::vector<std::int64_t> box(static_cast<std::size_t>(d));
  std::int64_t total = 1;
  for (int k = 0; k < d; ++k) {
    box[static_cast<std::size_t>(k)] = ext[static_cast<std::size_t>(k)] + 2 * range;
    total *= box[static_cast<std::size_t>(k)];
  }
  Rng rng(seed);
  std::vector<double> eps(static_cast<std::size_t>(total));
  for (auto& e : eps) e = rng.uniform(-1.0, 1.0);

  // offsets of the (2R+1)^d ball in the innovation box
  const std::int64_t width = 2 * range + 1;
  std::vector<std::int64_t> stride(static_cast<std::size_t>(d), 1);
  for (int k = d - 2; k >= 0; --k)
    stride[static_cast<std::size_t>(k)] =
        stride[static_cast<std::size_t>(k + 1)] * box[static_cast<std::size_t>(k + 1)];
  std::vector<std::int64_t> offsets{0};
  for (int k = 0; k < d; ++k) {
    std::vector<std::int64_t> next;
    for (auto o : offsets)
      for (std::int64_t j = 0; j < width; ++j)
        next.push_back(o + j * stride[static_cast<std::size_t>(k)]);
    offsets = std::move(next);
  }
  const double norm = 1.0 / static_cast<double>(offsets.size());

  Series s;
  const auto n = grid.size();
  s.values.resize(n, 1);
  s.grid = grid;
  s.process = "lattice";
  s.params = {{"range", range}};
  s.seed = seed;
  for (std::int64_t i = 1; i <= n; ++i) {
    auto v = grid.to_lattice(i);
    // site v occupies box position v - 1 + R; its ball starts at v - 1
    std::int64_t base = 0;
    for (int k = 0; k < d; ++k)
      base += (v[static_cast<std::size_t>(k)] - 1) * stride[static_cast<std::size_t>(k)];
    double acc = 0.0;
    for (auto o : offsets) acc += eps[static_cast<std::size_t>(base + o)];
    s.values(i - 1, 0) = acc * norm;
  }
  return s;
}

double lattice_field_covariance(const std::vector<std::int64_t>& a,
                                const std::vector<std::int64_t>& b, int range) {
  const double width = 2.0 * range + 1.0;
  double shared = 1.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    shared *= std::max(0.0, width - static_cast<double>(std::abs(a[k] - b[k])));
  const double cells = std::pow(width, static_cast<double>(a.size()));
  return shared * (1.0 / 3.0) / (cells * cells);
}

Series simulate_rademacher(std::int64_t n, std::uint64_t seed) {
  require_length(n);
  Rng rng(seed);
  Series s;
  s.values.resize(n, 1);
  s.grid = SampleGrid::series(n);
  s.process = "rademacher";
  s.seed = seed;
  for (std::int64_t t = 0; t < n; ++t) s.values(t, 0) = (rng.bits() >> 63) ? 1.0 : -1.0;
  return s;
}

Dataset make_regression_dataset(const Series& x, const std::string& mean_id,
                                const std::string& sigma_id, double y_bound,
                                std::uint64_t seed) {
  if ((x.values.array() < 0.0).any() || (x.values.array() > 1.0).any())
    throw std::invalid_argument("regression inputs must lie in [0,1]^D");
  if (truth_sup_abs(mean_id) + kSqrt3 * truth_sup_abs(sigma_id) > y_bound)
    throw std::invalid_argument("|m| + sqrt(3)|sigma| exceeds the bound L for '" +
                                mean_id + "', '" + sigma_id + "'");
  Rng rng(seed);
  Dataset ds;
  ds.x = x.values;
  ds.y.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x.values(i, 0);
    const double eps = rng.uniform(-kSqrt3, kSqrt3);
    ds.y[i] = evaluate_truth(mean_id, xi) + evaluate_truth(sigma_id, xi) * eps;
  }
  ds.y_bound = y_bound;
  ds.truth = Truth{x.density, mean_id, sigma_id, ""};
  ds.meta = {{"x_process", x.process},
             {"x_params", x.params},
             {"x_seed", x.seed},
             {"noise", "uniform"},
             {"noise_seed", seed}};
  ds.validate();
  return ds;
}

Dataset make_modal_dataset(const Series& x, const std::string& mode_id, double y_bound,
                           std::uint64_t seed) {
  if ((x.values.array() < 0.0).any() || (x.values.array() > 1.0).any())
    throw std::invalid_argument("regression inputs must lie in [0,1]^D");
  if (truth_sup_abs(mode_id) + kModalOffset + kModalHalfWidth > y_bound)
    throw std::invalid_argument("modal law for '" + mode_id + "' exceeds the bound L");
  Rng rng(seed);
  Dataset ds;
  ds.x = x.values;
  ds.y.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double center = evaluate_truth(mode_id, x.values(i, 0));
    if (rng.uniform() >= kModalMajorWeight) center += kModalOffset;
    ds.y[i] = center + kModalHalfWidth * rng.epanechnikov();
  }
  ds.y_bound = y_bound;
  const double mean_shift = (1.0 - kModalMajorWeight) * kModalOffset;
  ds.truth = Truth{x.density, mode_id + "+" + std::to_string(mean_shift), "", mode_id};
  ds.meta = {{"x_process", x.process},
             {"x_params", x.params},
             {"x_seed", x.seed},
             {"noise", "skew-mixture"},
             {"noise_seed", seed}};
  ds.validate();
  return ds;
}

double modal_conditional_density(const std::string& mode_id, double x, double y) {
  auto bump = [](double u) {
    u /= kModalHalfWidth;
    return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) / kModalHalfWidth : 0.0;
  };
  const double c = evaluate_truth(mode_id, x);
  return kModalMajorWeight * bump(y - c) +
         (1.0 - kModalMajorWeight) * bump(y - c - kModalOffset);
}

}  // namespace cmix
