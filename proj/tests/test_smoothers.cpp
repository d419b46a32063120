#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "cmix/processes.hpp"
#include "cmix/random.hpp"
#include "cmix/smoothers.hpp"
#include "oracles.hpp"

using namespace cmix;

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Mat column(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}
Vec vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

const Kernel<double> kEpa;

double close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("normalization and support") {
    for (auto id : {KernelId::Epanechnikov, KernelId::Quartic, KernelId::Triweight,
                    KernelId::FlatTop}) {
      const Kernel<double> k(id);
      const double mass = oracle::trapezoid([&](double u) { return k(u); }, -1.0, 1.0, 200000);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(k(1.0001) == 0.0);
      CHECK(k(0.0) == doctest::Approx(k.sup()));
    }
    CHECK(kEpa(0.0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(kEpa.lipschitz() == doctest::Approx(1.5));
    CHECK(Kernel<double>(KernelId::FlatTop).inf_on_support() > 0.0);
  }

  TEST_CASE("sampled Lipschitz modulus") {
    for (auto id : {KernelId::Epanechnikov, KernelId::Quartic, KernelId::Triweight}) {
      const Kernel<double> k(id);
      for (double u = -1.0; u < 1.0; u += 1e-3)
        REQUIRE(std::abs(k(u + 1e-3) - k(u)) <= k.lipschitz() * 1e-3 * (1 + 1e-9));
    }
  }

  TEST_CASE("moments") {
    // int |u| 0.75 (1 - u^2) du = 0.375
    CHECK(kEpa.moment(1.0) == doctest::Approx(0.375).epsilon(1e-13));
    CHECK(kEpa.roughness() == doctest::Approx(0.6).epsilon(1e-13));
    const Kernel<double> two(KernelId::Epanechnikov, 2);
    CHECK(two.moment(0.0) == doctest::Approx(1.0).epsilon(1e-13));
  }

  TEST_CASE("semi-norm bound") {
    const auto s = kernel_seminorm_bound(kEpa, 0.1);
    CHECK(s.B == doctest::Approx(15.0).epsilon(1e-14));
    CHECK(s.omega_suggest == 2.0);
    CHECK(kernel_seminorm_bound(kEpa, 1e12).B < 1e-11);
    CHECK_THROWS_AS(kernel_seminorm_bound(kEpa, 0.0), std::invalid_argument);
  }
}

TEST_SUITE("bandwidths") {
  TEST_CASE("hand evaluations") {
    CHECK(bandwidth_geometric(1000, 1, 1, 1) ==
          doctest::Approx(std::cbrt(std::pow(std::log(1000.0), 2) / 1000.0)).epsilon(1e-14));
    CHECK(bandwidth_geometric(1000, 1, 1, 1) == doctest::Approx(0.3627).epsilon(1e-3));
    CHECK(bandwidth_optimal(1000, 1, 1) == doctest::Approx(0.1904).epsilon(1e-3));
    CHECK(bandwidth_geometric(1000, 1, 1, 1e9) ==
          doctest::Approx(bandwidth_optimal(1000, 1, 1)).epsilon(1e-7));
  }

  TEST_CASE("exponents") {
    const double r = std::log(bandwidth_optimal(1e8, 1, 1) / bandwidth_optimal(1e4, 1, 1));
    const double l = std::log((std::log(1e8) / 1e8) / (std::log(1e4) / 1e4));
    CHECK(r / l == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    const double rm = std::log(bandwidth_mode(1e8, 1, 1) / bandwidth_mode(1e4, 1, 1));
    CHECK(rm / l == doctest::Approx(0.25).epsilon(1e-13));
    CHECK_THROWS_AS(bandwidth_optimal(1.5, 1, 1), std::invalid_argument);
  }
}

TEST_SUITE("density estimate") {
  TEST_CASE("single observation") {
    const auto f = kde(column({0.4}), 0.2, kEpa, column({0.4}));
    CHECK(f[0] == doctest::Approx(0.75 / 0.2).epsilon(1e-15));
  }

  TEST_CASE("integrates to one and is non-negative") {
    Rng rng(2);
    std::vector<double> x;
    for (int i = 0; i < 300; ++i) x.push_back(rng.uniform());
    const double h = 0.07;
    const auto grid = Vec::LinSpaced(20001, -h - 0.01, 1.0 + h + 0.01);
    const auto f = kde(column(x), h, kEpa, Mat(grid));
    CHECK(f.minCoeff() >= 0.0);
    double mass = 0.0;
    const double step = grid[1] - grid[0];
    for (Eigen::Index g = 1; g < grid.size(); ++g) mass += 0.5 * step * (f[g] + f[g - 1]);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
  }

  TEST_CASE("doubling-map sample at the centre") {
    const auto s = simulate_doubling_map(100000, 21);
    const auto f = kde(Mat(s.values), 0.1, kEpa, column({0.5}));
    CHECK(f[0] >= 0.97);
    CHECK(f[0] <= 1.03);
  }

  TEST_CASE("location equivariance") {
    Rng rng(4);
    std::vector<double> x, shifted, g, gs;
    for (int i = 0; i < 200; ++i) {
      x.push_back(rng.uniform());
      shifted.push_back(x.back() + 0.25);
    }
    for (int i = 0; i < 50; ++i) {
      g.push_back(rng.uniform());
      gs.push_back(g.back() + 0.25);
    }
    const auto a = kde(column(x), 0.1, kEpa, column(g));
    const auto b = kde(column(shifted), 0.1, kEpa, column(gs));
    for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
  }

  TEST_CASE("bandwidth must be positive") {
    CHECK_THROWS_AS(kde(column({0.1}), 0.0, kEpa, column({0.1})), std::invalid_argument);
  }
}

TEST_SUITE("regression estimates") {
  TEST_CASE("constant response") {
    Rng rng(6);
    std::vector<double> x, y;
    for (int i = 0; i < 100; ++i) {
      x.push_back(rng.uniform());
      y.push_back(2.5);
    }
    const auto m = nw_mean(column(x), vec(y), 0.05, kEpa, Mat(Vec::LinSpaced(101, 0, 1)));
    for (Eigen::Index g = 0; g < m.size(); ++g)
      if (m.defined[g]) CHECK(m.values[g] == doctest::Approx(2.5).epsilon(1e-15));
    const auto v = two_step_variance(column(x), vec(y), 0.05, kEpa, Mat(Vec::LinSpaced(101, 0, 1)));
    for (Eigen::Index g = 0; g < v.size(); ++g)
      if (v.defined[g]) CHECK(v.values[g] < 1e-28);
  }

  TEST_CASE("single observation and undefined points") {
    const auto m = nw_mean(column({0.3}), vec({-1.5}), 0.1, kEpa, column({0.35, 0.9}));
    CHECK(m.defined[0]);
    CHECK(m.values[0] == -1.5);
    CHECK_FALSE(m.defined[1]);
    CHECK(std::isnan(m.values[1]));
    CHECK_THROWS_AS(nw_mean(column({0.3}), vec({1.0}), 0.1, kEpa, column({0.9})),
                    std::runtime_error);
  }

  TEST_CASE("range and non-negativity") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x, y;
      for (int i = 0; i < 60; ++i) {
        x.push_back(rng.uniform());
        y.push_back(rng.uniform(-3, 3));
      }
      const double lo = *std::min_element(y.begin(), y.end());
      const double hi = *std::max_element(y.begin(), y.end());
      const Mat grid = Vec::LinSpaced(41, 0, 1);
      const auto m = nw_mean(column(x), vec(y), 0.08, kEpa, grid);
      const auto v = two_step_variance(column(x), vec(y), 0.08, kEpa, grid);
      for (Eigen::Index g = 0; g < grid.rows(); ++g) {
        if (m.defined[g]) {
          CHECK(m.values[g] >= lo - 1e-12);
          CHECK(m.values[g] <= hi + 1e-12);
        }
        if (v.defined[g]) {
          CHECK(v.values[g] >= 0.0);
          CHECK(v.values[g] <= (hi - lo) * (hi - lo));
        }
      }
    }
  }

  TEST_CASE("conditional mean on chain-driven data") {
    const auto s = simulate_cell_chain(64, 0.5, 10000, 31);
    const auto ds = make_regression_dataset(s, "sin", "const:0.1", 2.0, 32);
    const double h = bandwidth_optimal(10000, 1, 1);
    const auto grid = interior_grid(h, 200);
    const auto m = nw_mean(ds.x, ds.y, h, kEpa, grid.points);
    const auto err = sup_error(m, [](double x) { return std::sin(2 * std::numbers::pi * x); },
                               grid.points);
    CHECK(err.excluded == 0);
    CHECK(err.value < 0.1);
  }

  TEST_CASE("variance of uniform noise") {
    const auto s = simulate_cell_chain(64, 0.5, 10000, 41);
    const auto ds = make_regression_dataset(s, "zero", "const:1", 2.0, 42);
    const auto v = two_step_variance(ds.x, ds.y, 0.1, kEpa, column({0.5}));
    CHECK(v.values[0] >= 0.9);
    CHECK(v.values[0] <= 1.1);
  }
}

TEST_SUITE("conditional density and mode") {
  TEST_CASE("single observation bump") {
    const Vec gy = Vec::LinSpaced(2001, -1, 1);
    const auto d = conditional_density(column({0.5}), vec({0.2}), 0.1, kEpa, kEpa,
                                       column({0.52}), gy);
    for (Eigen::Index c = 0; c < gy.size(); ++c)
      REQUIRE(d.values(0, c) == doctest::Approx(kEpa((0.2 - gy[c]) / 0.1) / 0.1).epsilon(1e-13));
  }

  TEST_CASE("columns integrate to one") {
    const auto s = simulate_cell_chain(64, 0.5, 3000, 51);
    const auto ds = make_modal_dataset(s, "kink", 1.0, 52);
    const double h = 0.1;
    const double lo = ds.y.minCoeff() - h - 0.01, hi = ds.y.maxCoeff() + h + 0.01;
    const Vec gy = Vec::LinSpaced(20001, lo, hi);
    const Mat gx = Vec::LinSpaced(21, 0, 1);
    const auto d = conditional_density(ds.x, ds.y, h, kEpa, kEpa, gx, gy);
    const double step = gy[1] - gy[0];
    for (Eigen::Index g = 0; g < gx.rows(); ++g) {
      if (!d.defined[g]) continue;
      double mass = 0.0;
      for (Eigen::Index c = 1; c < gy.size(); ++c)
        mass += 0.5 * step * (d.values(g, c) + d.values(g, c - 1));
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
    }
    CHECK_THROWS_AS(conditional_density(ds.x, ds.y, h, kEpa, kEpa, gx, Vec(gy.reverse())),
                    std::invalid_argument);
  }

  TEST_CASE("mode attains the column maximum") {
    const auto s = simulate_cell_chain(64, 0.5, 2000, 61);
    const auto ds = make_modal_dataset(s, "kink", 1.0, 62);
    const double h = 0.12;
    const Vec gy = spaced_grid(0.0, 1.2, h * h);
    const Mat gx = Vec::LinSpaced(31, 0.1, 0.9);
    const auto d = conditional_density(ds.x, ds.y, h, kEpa, kEpa, gx, gy);
    const auto m = modal_regression(ds.x, ds.y, h, kEpa, kEpa, gx, gy);
    for (Eigen::Index g = 0; g < gx.rows(); ++g) {
      REQUIRE(m.defined[g]);
      const auto c = static_cast<Eigen::Index>(std::lround((m.values[g] - gy[0]) / (gy[1] - gy[0])));
      CHECK(gy[c] == m.values[g]);
      CHECK(d.values(g, c) == d.values.row(g).maxCoeff());
    }
  }

  TEST_CASE("ties go to the smallest y") {
    // two observations give two identical bumps
    const Vec gy = Vec::LinSpaced(11, 0, 1);
    const auto m = modal_regression(column({0.5, 0.5}), vec({0.2, 0.8}), 0.05, kEpa, kEpa,
                                    column({0.5}), gy);
    CHECK(m.values[0] == doctest::Approx(0.2).epsilon(1e-15));
  }

  TEST_CASE("skewed law separates mode and mean") {
    const auto s = simulate_cell_chain(64, 0.5, 20000, 71);
    const auto ds = make_modal_dataset(s, "const:0.3", 1.5, 72);
    const double h = 0.08;
    const Vec gy = spaced_grid(-0.2, 1.0, 0.1 * h * h);
    const auto m = modal_regression(ds.x, ds.y, h, kEpa, kEpa, column({0.5}), gy);
    const auto mean = nw_mean(ds.x, ds.y, h, kEpa, column({0.5}));
    CHECK(std::abs(m.values[0] - 0.3) < 0.03);
    CHECK(std::abs(mean.values[0] - (0.3 + (1.0 - kModalMajorWeight) * kModalOffset)) < 0.02);
  }
}

TEST_SUITE("oracle equivalence") {
  TEST_CASE("random small instances") {
    Rng rng(81);
    auto K = [](double u) { return oracle::epanechnikov(u); };
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 1 + static_cast<int>(rng.below(50));
      std::vector<double> x, y, g;
      for (int i = 0; i < n; ++i) {
        x.push_back(rng.uniform());
        y.push_back(rng.uniform(-2, 2));
      }
      for (int i = 0; i < 15; ++i) g.push_back(rng.uniform());
      const double h = rng.uniform(0.05, 0.5);
      const Vec gy = Vec::LinSpaced(61, -2.5, 2.5);
      const std::vector<double> gyv(gy.data(), gy.data() + gy.size());

      const auto f = kde(column(x), h, kEpa, column(g));
      const auto m = nw_mean(column(x), vec(y), h, kEpa, column(g));
      const auto v = two_step_variance(column(x), vec(y), h, kEpa, column(g));
      const auto mo = modal_regression(column(x), vec(y), h, kEpa, kEpa, column(g), gy);
      for (std::size_t j = 0; j < g.size(); ++j) {
        const auto i = static_cast<Eigen::Index>(j);
        REQUIRE(close(f[i], oracle::kde(x, h, g[j], K)));
        const double om = oracle::nw(x, y, h, g[j], K);
        REQUIRE(std::isnan(om) == !m.defined[i]);
        if (m.defined[i]) REQUIRE(close(m.values[i], om));
        const double ov = oracle::two_step_variance(x, y, h, g[j], K);
        if (v.defined[i]) REQUIRE(close(v.values[i], ov));
        const double omo = oracle::mode(x, y, h, g[j], gyv, K, K);
        if (mo.defined[i]) REQUIRE(mo.values[i] == omo);
      }
    }
  }
}

TEST_CASE("sup error") {
  const Mat grid = Vec::LinSpaced(5, 0, 1);
  const Vec v = Vec::LinSpaced(5, 0, 1);
  CHECK(sup_error(v, [](double x) { return x; }, grid).value == 0.0);
  CHECK(sup_error(Vec(Vec::Constant(1, 2.0)), [](double) { return 0.5; }, Mat(Mat::Constant(1, 1, 0.3)))
            .value == 1.5);
  auto est = detail::make_estimate<double>(5);
  est.values << 0, 0.3, 0, 0.9, 0;
  est.defined << true, true, false, true, false;
  const auto s = sup_error(est, [](double) { return 0.0; }, grid);
  CHECK(s.value == 0.9);
  CHECK(s.excluded == 2);
  const Mat fine = Vec::LinSpaced(9, 0, 1);
  const auto coarse_err = sup_error(Vec(grid.col(0).array().square()), [](double x) { return x; }, grid);
  const auto fine_err = sup_error(Vec(fine.col(0).array().square()), [](double x) { return x; }, fine);
  CHECK(fine_err.value >= coarse_err.value);
}
