#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cmix/harness.hpp"
#include "cmix/smoothers.hpp"
#include "oracles.hpp"

using namespace cmix;

TEST_SUITE("statistics registry") {
  TEST_CASE("envelopes") {
    const auto s = make_statistic("sin", "doubling");
    CHECK(s.A == 1.0);
    CHECK(s.sigma2 == 0.5);
    CHECK(s.fn(0.25) == doctest::Approx(1.0));
    CHECK(make_statistic("sin", "logistic").sigma2 == 1.0);
    // centered under the uniform law
    for (const char* id : {"sin", "ramp", "kernel-at-point"}) {
      const auto st = make_statistic(id, "cell-chain");
      const double mean = oracle::trapezoid(st.fn, 0.0, 1.0, 200000);
      const double second = oracle::trapezoid([&](double x) { return st.fn(x) * st.fn(x); },
                                              0.0, 1.0, 200000);
      CHECK(std::abs(mean) < 1e-8);
      CHECK(second == doctest::Approx(st.sigma2).epsilon(1e-6));
    }
  }

  TEST_CASE("uncentered statistic is refused") {
    CHECK_THROWS(make_statistic("identity", "doubling"));
    CHECK_THROWS(make_statistic("ramp", "logistic"));
    CHECK_THROWS(make_statistic("nope", "doubling"));
  }
}

TEST_SUITE("tail probability") {
  TEST_CASE("bounded mean never exceeds one") {
    TailExperiment e;
    e.process = "rademacher";
    e.statistic = "identity";
    e.Ns = {100};
    e.t_grid = {1.01};
    e.reps = 200;
    const auto r = tail_probability(e);
    CHECK(r.points.at(0).exceed == 0);
    CHECK(r.points.at(0).probability == 0.0);
  }

  TEST_CASE("exact binomial tail") {
    TailExperiment e;
    e.process = "rademacher";
    e.statistic = "identity";
    e.Ns = {10};
    e.t_grid = {0.999};
    e.reps = 20000;
    e.seed = 3;
    const auto r = tail_probability(e, 2);
    const double exact = oracle::binomial_pmf(10, 0, 0.5) + oracle::binomial_pmf(10, 10, 0.5);
    CHECK(exact == doctest::Approx(2.0 / 1024.0));
    const auto& p = r.points.at(0);
    CHECK(p.ci.lo <= exact);
    CHECK(exact <= p.ci.hi);
  }

  TEST_CASE("Clopper-Pearson edges") {
    const auto none = clopper_pearson(0, 100);
    CHECK(none.lo == 0.0);
    CHECK(none.hi == doctest::Approx(1.0 - std::pow(0.005, 0.01)).epsilon(1e-10));
    const auto all = clopper_pearson(100, 100);
    CHECK(all.hi == 1.0);
    CHECK(all.lo == doctest::Approx(std::pow(0.005, 0.01)).epsilon(1e-10));
  }

  TEST_CASE("doubling map stays under the bound") {
    TailExperiment e;
    e.Ns = {4096};
    e.t_grid = {0.02, 0.04, 0.06, 0.08, 0.1};
    e.reps = 300;
    e.seed = 9;
    const auto tail = tail_probability(e);
    const auto rows = bound_comparison(e, tail, 2.0, 1.0, 1.0);
    REQUIRE(rows.size() == 5);
    for (const auto& row : rows) {
      CHECK(row.sound);
      if (row.ours.n_ge_n0) CHECK(row.empirical <= row.ours.bound);
    }
  }

  TEST_CASE("validation") {
    TailExperiment e;
    e.t_grid = {0.1};
    e.reps = 10;
    CHECK_THROWS(e.validate());
  }
}

TEST_SUITE("rate fits") {
  TEST_CASE("exact power law") {
    std::vector<double> Ns, errs;
    for (double n = 512; n <= 16384; n *= 2) {
      Ns.push_back(n);
      errs.push_back(3.0 * std::pow(n, -1.0 / 3.0));
    }
    const auto f = loglog_slope(Ns, errs);
    CHECK(f.slope == doctest::Approx(-1.0 / 3.0).epsilon(1e-10));
    CHECK(f.se < 1e-10);
  }

  TEST_CASE("target exponents") {
    RateConfig c;
    c.Ns = {100, 200, 400, 800};
    CHECK(c.target_exponent() == doctest::Approx(-1.0 / 3.0));
    c.estimator = "mode";
    CHECK(c.target_exponent() == doctest::Approx(-0.25));
    CHECK(c.bandwidth_for(800) == doctest::Approx(bandwidth_mode(800, 1, 1)));
    c.bandwidth = "value:0.2";
    CHECK(c.bandwidth_for(800) == 0.2);
  }

  TEST_CASE("config validation") {
    RateConfig c;
    c.Ns = {100, 200, 400};
    CHECK_THROWS(c.validate());
    c.Ns = {100, 200, 200, 400};
    CHECK_THROWS(c.validate());
  }
}

TEST_SUITE("determinism") {
  TEST_CASE("worker count does not change reports") {
    RateConfig c;
    c.estimator = "mean";
    c.process = "cell-chain";
    c.Ns = {256, 512, 1024, 2048};
    c.reps = 6;
    c.L = 2.3;
    c.seed = 5;
    const auto a = rate_experiment(c, 1);
    const auto b = rate_experiment(c, 4);
    CHECK(rate_report_jsonl(c, a) == rate_report_jsonl(c, b));
    CHECK(rate_raw_csv(c, a) == rate_raw_csv(c, b));

    TailExperiment e;
    e.Ns = {128, 256};
    e.t_grid = {0.05, 0.1};
    e.reps = 100;
    const auto t1 = tail_probability(e, 1);
    const auto t4 = tail_probability(e, 4);
    CHECK(tail_raw_csv(e, t1) == tail_raw_csv(e, t4));
  }

  TEST_CASE("fnv1a") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  }
}
