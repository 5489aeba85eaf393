#include "rrl/rstat.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "rrl/rand.hpp"

using rrl::RStatConfig;
using rrl::RStatResult;
using rrl::rand::PathElem;
using rrl::rand::Stream;
using rrl::rand::StreamTree;

TEST_SUITE_BEGIN("rstat");

TEST_CASE("tolerance budget for tau=0.1 rho=0.2 delta=0.01") {
  const auto c = RStatConfig::from_total_tolerance(0.1, 0.2, 0.01);
  CHECK(c.tau_prime == doctest::Approx(0.015254237288136).epsilon(1e-12));
  CHECK(c.alpha == doctest::Approx(0.169491525423729).epsilon(1e-12));
  CHECK(c.tau_prime + c.alpha / 2.0 == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(2.0 * c.tau_prime / c.alpha ==
        doctest::Approx(0.2 - 2.0 * 0.01).epsilon(1e-14));
  CHECK(c.required_n() == 11385);
}

TEST_CASE("tolerance budget for tau=0.1 rho=0.2 delta=0.05") {
  const auto c = RStatConfig::from_total_tolerance(0.1, 0.2, 0.05);
  CHECK(c.tau_prime == doctest::Approx(1.0 / 110.0).epsilon(1e-14));
  CHECK(c.alpha == doctest::Approx(0.18181818181818185).epsilon(1e-14));
  CHECK(c.required_n() == 22318);
}

TEST_CASE("pinning the statistical tolerance widens the grid") {
  const auto c = RStatConfig::from_statistical_tolerance(0.01, 0.1, 0.001);
  CHECK(c.alpha == doctest::Approx(0.20408163265306123).epsilon(1e-14));
  CHECK(c.tau == doctest::Approx(0.11204081632653061).epsilon(1e-14));
  CHECK(c.required_n() == 38005);
  // Same derived quantities through either factory.
  const auto c2 =
      RStatConfig::from_total_tolerance(c.tau, 0.1, 0.001);
  CHECK(c2.tau_prime == doctest::Approx(c.tau_prime).epsilon(1e-13));
  CHECK(c2.alpha == doctest::Approx(c.alpha).epsilon(1e-13));
}

TEST_CASE("config validation rejects bad budgets") {
  CHECK_THROWS_AS(RStatConfig::from_total_tolerance(0.1, 0.2, 0.1),
                  std::invalid_argument);  // delta = rho/2
  CHECK_THROWS_AS(RStatConfig::from_total_tolerance(0.1, 0.2, 0.15),
                  std::invalid_argument);  // delta > rho/2
  CHECK_THROWS_AS(RStatConfig::from_total_tolerance(0.1, 0.2, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(RStatConfig::from_total_tolerance(0.0, 0.2, 0.01),
                  std::invalid_argument);
  CHECK_THROWS_AS(RStatConfig::from_total_tolerance(0.1, 0.0, 0.01),
                  std::invalid_argument);
  CHECK_THROWS_AS(RStatConfig::from_total_tolerance(0.1, 1.0, 0.01),
                  std::invalid_argument);
  CHECK_THROWS_AS(RStatConfig::from_statistical_tolerance(0.0, 0.2, 0.01),
                  std::invalid_argument);
}

TEST_CASE("round_to_grid picks the nearest point, ties toward minus infinity") {
  CHECK(rrl::round_to_grid(0.10, 0.2, 0.05) == doctest::Approx(0.05));
  CHECK(rrl::round_to_grid(0.16, 0.2, 0.05) == doctest::Approx(0.25));
  CHECK(rrl::round_to_grid(0.15, 0.2, 0.05) == doctest::Approx(0.05));
  CHECK(rrl::round_to_grid(0.25, 0.2, 0.05) == doctest::Approx(0.25));
  CHECK(rrl::round_to_grid(0.35, 0.2, 0.05) == doctest::Approx(0.25));
  CHECK(rrl::round_to_grid(0.36, 0.2, 0.05) == doctest::Approx(0.45));
  CHECK(rrl::round_to_grid(0.00, 0.2, 0.05) == doctest::Approx(0.05));
  CHECK(rrl::round_to_grid(-0.20, 0.2, 0.05) == doctest::Approx(-0.15));
}

TEST_CASE("estimator consumes exactly one offset draw and clamps") {
  const auto c = RStatConfig::from_total_tolerance(0.1, 0.2, 0.01);
  StreamTree tree(42, "internal");

  std::vector<double> ones(c.required_n(), 1.0);
  Stream offs = tree.derive({PathElem("q", 0)});
  const auto res = rrl::rstat(c, ones, offs);

  Stream twin = tree.derive({PathElem("q", 0)});
  const double expected_offset = c.alpha * twin.uniform01();
  CHECK(res.offset == expected_offset);
  CHECK(res.empirical_mean == doctest::Approx(1.0));
  CHECK(res.grid_value ==
        doctest::Approx(rrl::round_to_grid(1.0, c.alpha, expected_offset)));
  CHECK(res.value <= 1.0);
  CHECK(res.value >= 1.0 - c.alpha);
  CHECK_FALSE(res.empirical_only);

  // The next draw from the consumed stream continues where the twin is now,
  // proving the estimator took exactly one draw.
  CHECK(offs.next_u64() == twin.next_u64());
}

TEST_CASE("all-zero samples stay within the bottom grid cell") {
  const auto c = RStatConfig::from_total_tolerance(0.1, 0.2, 0.01);
  StreamTree tree(43, "internal");
  std::vector<double> zeros(c.required_n(), 0.0);
  Stream offs = tree.derive({PathElem("q", 1)});
  const auto res = rrl::rstat(c, zeros, offs);
  CHECK(res.value >= 0.0);
  CHECK(res.value <= c.alpha);
}

TEST_CASE("weighted and flat forms agree exactly") {
  const auto c = RStatConfig::from_total_tolerance(0.1, 0.2, 0.05);
  StreamTree tree(44, "internal");

  std::vector<double> flat;
  flat.insert(flat.end(), 15000, 0.0);
  flat.insert(flat.end(), 7318, 1.0);
  Stream s1 = tree.derive({PathElem("q", 2)});
  const auto r1 = rrl::rstat(c, flat, s1);

  const std::vector<double> values{0.0, 1.0};
  const std::vector<std::uint64_t> counts{15000, 7318};
  Stream s2 = tree.derive({PathElem("q", 2)});
  const auto r2 = rrl::rstat_weighted(c, values, counts, s2);

  CHECK(r1.value == r2.value);
  CHECK(r1.grid_value == r2.grid_value);
  CHECK(r1.empirical_mean == doctest::Approx(r2.empirical_mean).epsilon(1e-15));
  CHECK(r1.offset == r2.offset);
  CHECK(r1.n == r2.n);
}

TEST_CASE("insufficient samples throw unless practical mode is set") {
  const auto c = RStatConfig::from_total_tolerance(0.1, 0.2, 0.05);
  StreamTree tree(45, "internal");
  std::vector<double> few(100, 0.5);
  Stream s = tree.derive({PathElem("q", 3)});
  CHECK_THROWS_AS(rrl::rstat(c, few, s), std::invalid_argument);
  Stream s2 = tree.derive({PathElem("q", 3)});
  const auto res = rrl::rstat(c, few, s2, true);
  CHECK(res.empirical_only);
  CHECK(res.n == 100);
}

TEST_CASE("input validation") {
  const auto c = RStatConfig::from_total_tolerance(0.1, 0.2, 0.05);
  StreamTree tree(46, "internal");
  Stream s = tree.derive({PathElem("q", 4)});
  const std::vector<double> empty;
  CHECK_THROWS_AS(rrl::rstat(c, empty, s), std::invalid_argument);
  const std::vector<double> bad{0.5, 1.5};
  CHECK_THROWS_AS(rrl::rstat(c, bad, s, true), std::invalid_argument);
  const std::vector<double> values{0.0, 1.0};
  const std::vector<std::uint64_t> counts{1, 2, 3};
  CHECK_THROWS_AS(rrl::rstat_weighted(c, values, counts, s, true),
                  std::invalid_argument);
  const std::vector<std::uint64_t> zero_counts{0, 0};
  CHECK_THROWS_AS(rrl::rstat_weighted(c, values, zero_counts, s, true),
                  std::invalid_argument);
}

TEST_CASE("query adapter maps observations into [0,1]") {
  const auto c = RStatConfig::from_total_tolerance(0.1, 0.2, 0.05);
  StreamTree tree(47, "internal");
  std::vector<int> obs(c.required_n());
  for (std::size_t i = 0; i < obs.size(); ++i) obs[i] = i % 2 == 0 ? 3 : 9;
  Stream s = tree.derive({PathElem("q", 5)});
  const auto res = rrl::apply_query(
      c, obs, [](int x) { return x == 3 ? 1.0 : 0.0; }, s);
  CHECK(res.empirical_mean == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::abs(res.value - 0.5) <= 0.1 + 1e-12);
}

TEST_CASE("paired runs with shared offsets agree well above the budget") {
  const auto c = RStatConfig::from_total_tolerance(0.1, 0.2, 0.05);
  const std::uint64_t n = c.required_n();
  StreamTree internal(7, "internal");
  StreamTree samples1(100, "sample");
  StreamTree samples2(101, "sample");

  const int trials = 400;
  const double p = 0.5;
  int disagree = 0;
  int inaccurate = 0;
  const std::vector<double> values{0.0, 1.0};
  for (int t = 0; t < trials; ++t) {
    Stream o1 = internal.derive({PathElem("trial", static_cast<std::uint64_t>(t))});
    Stream o2 = internal.derive({PathElem("trial", static_cast<std::uint64_t>(t))});
    Stream d1 = samples1.derive({PathElem("trial", static_cast<std::uint64_t>(t))});
    Stream d2 = samples2.derive({PathElem("trial", static_cast<std::uint64_t>(t))});
    const std::uint64_t k1 = d1.binomial(n, p);
    const std::uint64_t k2 = d2.binomial(n, p);
    const std::vector<std::uint64_t> c1{n - k1, k1};
    const std::vector<std::uint64_t> c2{n - k2, k2};
    const auto r1 = rrl::rstat_weighted(c, values, c1, o1);
    const auto r2 = rrl::rstat_weighted(c, values, c2, o2);
    if (r1.value != r2.value) ++disagree;
    if (std::abs(r1.value - p) > c.tau) ++inaccurate;
    if (std::abs(r2.value - p) > c.tau) ++inaccurate;
  }
  // rho = 0.2 budget plus 4 sigma of 400 paired trials.
  const double rho_slack = 0.2 + 4.0 * std::sqrt(0.2 * 0.8 / trials);
  CHECK(static_cast<double>(disagree) / trials <= rho_slack);
  // delta = 0.05 accuracy budget plus 4 sigma of 800 runs.
  const double acc_slack = 0.05 + 4.0 * std::sqrt(0.05 * 0.95 / (2.0 * trials));
  CHECK(static_cast<double>(inaccurate) / (2.0 * trials) <= acc_slack);
}

TEST_CASE("sample requirements beyond 64 bits still run in practical mode") {
  const auto c = RStatConfig::from_statistical_tolerance(1e-12, 0.2, 0.01);
  CHECK(c.required_n_real() > 9e18);
  CHECK_THROWS_AS(c.required_n(), std::runtime_error);

  StreamTree internal(3, "internal");
  Stream offsets = internal.derive({PathElem("only", 0)});
  const std::vector<double> samples{0.0, 1.0, 1.0, 0.0};
  const auto res = rrl::rstat(c, samples, offsets, true);
  CHECK(res.empirical_only);
  CHECK(res.value >= 0.0);

  Stream offsets2 = internal.derive({PathElem("only", 0)});
  CHECK_THROWS_AS(rrl::rstat(c, samples, offsets2, false),
                  std::invalid_argument);
}

TEST_SUITE_END();
