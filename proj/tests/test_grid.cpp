#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cmix/grid.hpp"
#include "cmix/random.hpp"

using namespace cmix;

TEST_CASE("mixing spec validation") {
  CHECK_THROWS_AS(MixingSpec::geometric(1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(MixingSpec::geometric(2.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(MixingSpec::algebraic(1.0, -1.0), std::invalid_argument);
  CHECK_NOTHROW(MixingSpec::algebraic(0.5, 2.0));
}

TEST_CASE("coefficient is non-negative and non-increasing") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const bool geo = trial % 2 == 0;
    const double b = rng.uniform(0.05, 5.0), gamma = rng.uniform(0.1, 4.0);
    const auto spec = geo ? MixingSpec::geometric(rng.uniform(1.01, 10.0), b, gamma)
                          : MixingSpec::algebraic(b, gamma);
    double prev = spec.coefficient(0.0);
    for (double r = 0.0; r <= 60.0; r += 0.25) {
      const double c = spec.coefficient(r);
      CHECK(c >= 0.0);
      CHECK(c <= prev);
      prev = c;
    }
  }
}

TEST_CASE("geometric coefficient closed form") {
  const auto spec = MixingSpec::geometric(2.0, 0.5, 2.0);
  CHECK(spec.coefficient(3.0) == doctest::Approx(std::pow(2.0, -0.5 * 9.0)).epsilon(1e-14));
  CHECK(spec.log_nu(8.0) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("sample grid sizes") {
  SampleGrid g(2, 1, 4, {1000});
  CHECK(g.m() == 4);
  CHECK(g.n_hat() == 1000);
  CHECK(g.size() == 4000);
  CHECK(g.satisfies_log_condition());
  CHECK_FALSE(SampleGrid(2, 2, 1, {1, 1000}).satisfies_log_condition());
  CHECK_THROWS_AS(SampleGrid(1, 2, 1, {3, 3}), std::invalid_argument);
  CHECK_THROWS_AS(SampleGrid(2, 1, 1, {3, 3}), std::invalid_argument);
  CHECK_THROWS_AS(SampleGrid(1, 1, 1, {0}), std::invalid_argument);
}

TEST_CASE("index bijection round-trips") {
  SampleGrid g(2, 1, 4, {1000});
  for (std::int64_t i = 1; i <= g.size(); ++i) REQUIRE(g.to_scalar(g.to_lattice(i)) == i);
  // fixed direction varies slowest
  CHECK(g.to_lattice(1) == std::vector<std::int64_t>{1, 1});
  CHECK(g.to_lattice(1000) == std::vector<std::int64_t>{1, 1000});
  CHECK(g.to_lattice(1001) == std::vector<std::int64_t>{2, 1});

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int d_eff = 1 + static_cast<int>(rng.below(3));
    const int d = d_eff + static_cast<int>(rng.below(2));
    std::vector<std::int64_t> nk;
    for (int k = 0; k < d_eff; ++k) nk.push_back(1 + static_cast<std::int64_t>(rng.below(9)));
    SampleGrid h(d, d_eff, 1 + static_cast<std::int64_t>(rng.below(3)), nk);
    std::vector<bool> seen(static_cast<std::size_t>(h.size()) + 1, false);
    for (std::int64_t i = 1; i <= h.size(); ++i) {
      const auto v = h.to_lattice(i);
      REQUIRE(v.size() == static_cast<std::size_t>(d));
      const auto j = h.to_scalar(v);
      REQUIRE(j == i);
      seen[static_cast<std::size_t>(j)] = true;
    }
    CHECK(std::count(seen.begin() + 1, seen.end(), true) == h.size());
  }
}

TEST_CASE("out-of-range indices are rejected") {
  SampleGrid g(1, 1, 1, {5});
  CHECK_THROWS_AS(g.to_lattice(0), std::out_of_range);
  CHECK_THROWS_AS(g.to_lattice(6), std::out_of_range);
  CHECK_THROWS_AS(g.to_scalar({6}), std::out_of_range);
}

TEST_CASE("sup distance") {
  CHECK(sup_distance({1, 5, 2}, {4, 5, 0}) == 3);
  CHECK(sup_distance({7}, {7}) == 0);
}

TEST_CASE("seed derivation is stable") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(5, 9) == (5 ^ mix64(9)));
  Rng a(42), b(42);
  for (int k = 0; k < 10; ++k) CHECK(a.bits() == b.bits());
}
