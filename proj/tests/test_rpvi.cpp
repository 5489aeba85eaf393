#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "rrl/mdp.hpp"
#include "rrl/rand.hpp"
#include "rrl/rpvi.hpp"

namespace {

// Two states, two actions, gamma = 0.5. Action 1 dominates in both states
// by a margin of at least 0.64 in Q*, so estimation noise well below that
// margin cannot flip the greedy policy.
rrl::TabularMdp half_discount_fixture() {
  rrl::TabularMdp mdp;
  mdp.num_states = 2;
  mdp.num_actions = 2;
  mdp.gamma = 0.5;
  mdp.r_max = 1.0;
  mdp.rewards = {{0.05, 0.6}, {0.3, 0.95}};
  mdp.transitions = {{{0.8, 0.2}, {0.3, 0.7}}, {{0.6, 0.4}, {0.1, 0.9}}};
  mdp.initial_dist = {0.5, 0.5};
  return mdp;
}

// Closed-form optimum of the fixture: V*(0) = 53/36, V*(1) = 67/36.
constexpr double kQ00 = 0.825;
constexpr double kQ01 = 53.0 / 36.0;
constexpr double kQ10 = 40.1 / 36.0;
constexpr double kQ11 = 67.0 / 36.0;

rrl::PviParams fixture_params() {
  return rrl::PviParams::derive(half_discount_fixture(), 0.1, 0.2, 0.01);
}

}  // namespace

TEST_SUITE("rpvi") {

TEST_CASE("derived schedule and budgets match the closed forms") {
  const rrl::PviParams p = fixture_params();
  CHECK(p.horizon == 9);
  CHECK(p.tau == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(p.tau_norm == doctest::Approx(0.0125).epsilon(1e-12));
  CHECK(p.rho_sq == doctest::Approx(0.2 / 36.0).epsilon(1e-12));
  CHECK(p.delta_sq == doctest::Approx(0.01 / 36.0).epsilon(1e-12));
  CHECK(rrl::theoretical_m(p) == doctest::Approx(1136875048.0).epsilon(1e-12));
}

TEST_CASE("sample size formula scales as the analysis says") {
  const rrl::PviParams p = fixture_params();
  const double base = rrl::theoretical_m(p);

  rrl::PviParams wider = p;
  wider.tau *= 2.0;
  const double tau_ratio = base / rrl::theoretical_m(wider);
  CHECK(tau_ratio >= 4.0);
  CHECK(tau_ratio == doctest::Approx(4.0).epsilon(1e-8));

  rrl::PviParams bigger = p;
  bigger.num_states *= 2;
  const double sa_ratio = rrl::theoretical_m(bigger) / base;
  CHECK(sa_ratio > 4.0);
  CHECK(sa_ratio == doctest::Approx(4.312163903697533).epsilon(1e-9));
}

TEST_CASE("gridworld-scale parameters are astronomically large") {
  rrl::PviParams p;
  p.num_states = 46;
  p.num_actions = 4;
  p.gamma = 0.95;
  p.r_max = 1.0;
  p.eps = 0.02;
  p.rho = 0.2;
  p.delta = 0.001;
  const double g = 1.0 - p.gamma;
  p.horizon = static_cast<int>(std::ceil(std::log(2.0 / (g * g * p.eps)) / g));
  p.tau = g * p.eps / 2.0;
  p.tau_norm = p.tau * g;
  const double queries = 46.0 * 4.0 * p.horizon;
  p.rho_sq = p.rho / queries;
  p.delta_sq = p.delta / queries;
  p.validate();

  CHECK(p.horizon == 212);
  CHECK(rrl::theoretical_m(p) == doctest::Approx(5.64261e18).epsilon(1e-5));
  CHECK(rrl::theoretical_m(p) > 1e17);
}

TEST_CASE("validate rejects broken parameter sets") {
  const rrl::PviParams good = fixture_params();
  auto expect_reject = [](rrl::PviParams p) {
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  };

  { rrl::PviParams p = good; p.eps = 0.0; expect_reject(p); }
  { rrl::PviParams p = good; p.rho = 0.0; expect_reject(p); }
  { rrl::PviParams p = good; p.rho = 1.0; expect_reject(p); }
  { rrl::PviParams p = good; p.delta = 0.0; expect_reject(p); }
  { rrl::PviParams p = good; p.horizon = 0; expect_reject(p); }
  { rrl::PviParams p = good; p.tau = 0.0; expect_reject(p); }
  { rrl::PviParams p = good; p.tau = 1.0; expect_reject(p); }
  { rrl::PviParams p = good; p.rho_sq = 2.0 * p.delta_sq; expect_reject(p); }

  // delta >= rho/2 starves the per-query budgets at derivation time.
  CHECK_THROWS_AS(
      rrl::PviParams::derive(half_discount_fixture(), 0.1, 0.2, 0.1),
      std::invalid_argument);
}

TEST_CASE("params derived from a different MDP are refused") {
  rrl::TabularMdp other = half_discount_fixture();
  other.gamma = 0.9;
  const rrl::PviParams p = rrl::PviParams::derive(other, 0.1, 0.2, 0.01);

  rrl::RpviOptions opt;
  opt.m = 100;
  opt.practical = true;
  rrl::rand::StreamTree internal(7, "internal");
  rrl::rand::StreamTree sample(9, "sample");
  CHECK_THROWS_AS(
      rrl::run_rpvi(half_discount_fixture(), p, opt, internal, sample),
      std::invalid_argument);

  rrl::RpviOptions zero = opt;
  zero.m = 0;
  const rrl::PviParams ok = fixture_params();
  CHECK_THROWS_AS(
      rrl::run_rpvi(half_discount_fixture(), ok, zero, internal, sample),
      std::invalid_argument);
}

TEST_CASE("same trees give identical results and workers do not matter") {
  const rrl::TabularMdp mdp = half_discount_fixture();
  const rrl::PviParams p = fixture_params();
  rrl::RpviOptions opt;
  opt.m = 400;
  opt.practical = true;

  auto run = [&](int workers, std::uint64_t iseed, std::uint64_t sseed) {
    rrl::RpviOptions o = opt;
    o.workers = workers;
    rrl::rand::StreamTree internal(iseed, "internal");
    rrl::rand::StreamTree sample(sseed, "sample");
    return rrl::run_rpvi(mdp, p, o, internal, sample);
  };

  const rrl::RpviResult a = run(1, 7, 9);
  const rrl::RpviResult b = run(1, 7, 9);
  const rrl::RpviResult c = run(4, 7, 9);
  CHECK(a.q == b.q);
  CHECK(a.audit == b.audit);
  CHECK(a.q == c.q);
  CHECK(a.audit == c.audit);

  CHECK(a.audit.size() == 9u * 4u);
  CHECK(a.policy == rrl::greedy_policy(a.q));
  for (int s = 0; s < 2; ++s) {
    CHECK(a.v[s] == *std::max_element(a.q[s].begin(), a.q[s].end()));
  }

  const rrl::RpviResult other_internal = run(1, 8, 9);
  bool some_offset_differs = false;
  for (std::size_t i = 0; i < a.audit.size(); ++i) {
    if (a.audit[i].offset != other_internal.audit[i].offset) {
      some_offset_differs = true;
    }
  }
  CHECK(some_offset_differs);

  const rrl::RpviResult other_sample = run(1, 7, 10);
  bool some_mean_differs = false;
  for (std::size_t i = 0; i < a.audit.size(); ++i) {
    if (a.audit[i].empirical_mean != other_sample.audit[i].empirical_mean) {
      some_mean_differs = true;
    }
  }
  CHECK(some_mean_differs);
}

TEST_CASE("insufficient m is refused unless practical mode is chosen") {
  const rrl::TabularMdp mdp = half_discount_fixture();
  const rrl::PviParams p = fixture_params();
  rrl::rand::StreamTree internal(7, "internal");
  rrl::rand::StreamTree sample(9, "sample");

  rrl::RpviOptions strict;
  strict.m = 400;
  CHECK_THROWS_AS(rrl::run_rpvi(mdp, p, strict, internal, sample),
                  std::invalid_argument);

  rrl::RpviOptions loose = strict;
  loose.practical = true;
  const rrl::RpviResult res = rrl::run_rpvi(mdp, p, loose, internal, sample);
  CHECK(res.query_config.required_n() == 1148272220u);
  for (const auto& rec : res.audit) CHECK(rec.n == 400u);
}

TEST_CASE("estimates land on the offset grid") {
  const rrl::TabularMdp mdp = half_discount_fixture();
  const rrl::PviParams p = fixture_params();
  rrl::RpviOptions opt;
  opt.m = 400;
  opt.practical = true;
  rrl::rand::StreamTree internal(7, "internal");
  rrl::rand::StreamTree sample(9, "sample");
  const rrl::RpviResult res = rrl::run_rpvi(mdp, p, opt, internal, sample);

  const double alpha = res.query_config.alpha;
  CHECK(alpha == doctest::Approx(0.0248756218905473).epsilon(1e-12));
  CHECK(res.query_config.tau_prime ==
        doctest::Approx(6.21890547263682e-05).epsilon(1e-12));

  for (const auto& rec : res.audit) {
    CHECK(rec.offset >= 0.0);
    CHECK(rec.offset < alpha);
    CHECK(rec.empirical_mean >= 0.0);
    CHECK(rec.empirical_mean <= 1.0);
    if (rec.value == 0.0 || rec.value == 1.0) continue;
    const double steps = (rec.value - rec.offset) / alpha;
    CHECK(std::abs(steps - std::round(steps)) < 1e-9);
  }
}

TEST_CASE("offset draw discipline per mode") {
  const rrl::TabularMdp mdp = half_discount_fixture();
  const rrl::PviParams p = fixture_params();
  rrl::RpviOptions opt;
  opt.m = 400;
  opt.practical = true;
  rrl::rand::StreamTree internal(7, "internal");
  rrl::rand::StreamTree sample(9, "sample");

  opt.offset_mode = rrl::OffsetMode::per_pair;
  const rrl::RpviResult pinned = rrl::run_rpvi(mdp, p, opt, internal, sample);
  const std::size_t pairs = 4;
  for (std::size_t idx = 0; idx < pairs; ++idx) {
    rrl::rand::Stream twin = internal.derive({rrl::rand::PathElem("sa", idx)});
    const double expected = pinned.query_config.alpha * twin.uniform01();
    for (int t = 0; t < p.horizon; ++t) {
      CHECK(pinned.audit[static_cast<std::size_t>(t) * pairs + idx].offset ==
            expected);
    }
  }

  opt.offset_mode = rrl::OffsetMode::per_iteration;
  const rrl::RpviResult fresh = rrl::run_rpvi(mdp, p, opt, internal, sample);
  bool redrawn = false;
  for (std::size_t idx = 0; idx < pairs; ++idx) {
    for (int t = 1; t < p.horizon; ++t) {
      if (fresh.audit[static_cast<std::size_t>(t) * pairs + idx].offset !=
          fresh.audit[idx].offset) {
        redrawn = true;
      }
    }
  }
  CHECK(redrawn);
}

TEST_CASE("accuracy bound holds at the theoretical sample size") {
  const rrl::TabularMdp mdp = half_discount_fixture();
  const rrl::PviParams p = fixture_params();
  rrl::RpviOptions opt;
  opt.m = static_cast<std::uint64_t>(rrl::theoretical_m(p));
  opt.practical = true;  // required_n exceeds theoretical m by about 1%
  rrl::rand::StreamTree internal(7, "internal");
  rrl::rand::StreamTree sample(9, "sample");
  const rrl::RpviResult res = rrl::run_rpvi(mdp, p, opt, internal, sample);

  const double bound = p.tau * p.gamma / (1.0 - p.gamma) +
                       std::pow(p.gamma, p.horizon) * mdp.r_max /
                           (1.0 - p.gamma);
  CHECK(bound == doctest::Approx(0.02890625).epsilon(1e-12));

  const rrl::QTable exact = rrl::exact_q_values(mdp).q;
  CHECK(exact[0][0] == doctest::Approx(kQ00).epsilon(1e-9));
  CHECK(exact[0][1] == doctest::Approx(kQ01).epsilon(1e-9));
  CHECK(exact[1][0] == doctest::Approx(kQ10).epsilon(1e-9));
  CHECK(exact[1][1] == doctest::Approx(kQ11).epsilon(1e-9));
  CHECK(rrl::max_abs_diff(res.q, exact) <= bound);

  CHECK(res.policy == rrl::Policy{1, 1});
  const double best = rrl::policy_return(mdp, res.policy);
  CHECK(best == doctest::Approx(5.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("paired runs with a shared internal seed mostly agree") {
  const rrl::TabularMdp mdp = half_discount_fixture();
  const rrl::PviParams p = fixture_params();
  rrl::RpviOptions opt;
  opt.m = static_cast<std::uint64_t>(rrl::theoretical_m(p));
  opt.practical = true;
  opt.workers = 4;

  int agree = 0;
  const int pairs = 6;
  for (int k = 0; k < pairs; ++k) {
    rrl::rand::StreamTree internal(100 + static_cast<std::uint64_t>(k),
                                   "internal");
    rrl::rand::StreamTree s1(200 + 2 * static_cast<std::uint64_t>(k),
                             "sample");
    rrl::rand::StreamTree s2(201 + 2 * static_cast<std::uint64_t>(k),
                             "sample");
    const rrl::RpviResult a = rrl::run_rpvi(mdp, p, opt, internal, s1);
    const rrl::RpviResult b = rrl::run_rpvi(mdp, p, opt, internal, s2);
    if (a.q == b.q) ++agree;
  }
  CHECK(agree >= 4);
}

TEST_CASE("rho_sq override widens the grid as specified") {
  const rrl::TabularMdp mdp = half_discount_fixture();
  const rrl::PviParams p = fixture_params();
  rrl::RpviOptions opt;
  opt.m = 400;
  opt.practical = true;
  opt.rho_sq_override = 0.1;
  rrl::rand::StreamTree internal(7, "internal");
  rrl::rand::StreamTree sample(9, "sample");
  const rrl::RpviResult res = rrl::run_rpvi(mdp, p, opt, internal, sample);

  CHECK(res.query_config.tau_prime == doctest::Approx(p.tau_norm).epsilon(1e-12));
  CHECK(res.query_config.alpha ==
        doctest::Approx(0.25139664804469275).epsilon(1e-12));
  CHECK(res.query_config.tau ==
        doctest::Approx(0.13819832402234639).epsilon(1e-12));
  CHECK(res.query_config.required_n() == 28422u);
}

TEST_CASE("tiny discount collapses to the immediate rewards") {
  rrl::TabularMdp mdp = half_discount_fixture();
  mdp.gamma = 0.01;
  const rrl::PviParams p = rrl::PviParams::derive(mdp, 0.5, 0.2, 0.01);
  CHECK(p.horizon == 2);
  CHECK(p.tau == doctest::Approx(0.2475).epsilon(1e-12));

  rrl::RpviOptions opt;
  opt.m = 200;
  opt.practical = true;
  rrl::rand::StreamTree internal(7, "internal");
  rrl::rand::StreamTree sample(9, "sample");
  const rrl::RpviResult res = rrl::run_rpvi(mdp, p, opt, internal, sample);
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a) {
      CHECK(std::abs(res.q[s][a] - mdp.rewards[s][a]) <= 0.0102);
    }
  }
}

TEST_CASE("baseline tracks raw means and is sample-seed sensitive") {
  const rrl::TabularMdp mdp = half_discount_fixture();
  const rrl::PviParams p = fixture_params();
  rrl::RpviOptions opt;
  opt.m = 500;
  opt.practical = true;

  rrl::rand::StreamTree s1(11, "sample");
  rrl::rand::StreamTree s1_again(11, "sample");
  rrl::rand::StreamTree s2(12, "sample");
  const rrl::RpviResult a = rrl::run_pvi_baseline(mdp, p, opt, s1);
  const rrl::RpviResult b = rrl::run_pvi_baseline(mdp, p, opt, s1_again);
  const rrl::RpviResult c = rrl::run_pvi_baseline(mdp, p, opt, s2);

  CHECK(a.q == b.q);
  CHECK(a.audit == b.audit);
  CHECK(a.q != c.q);

  for (const auto& rec : a.audit) {
    CHECK(rec.offset == 0.0);
    CHECK(rec.value == rec.empirical_mean);
  }
}

}  // TEST_SUITE
