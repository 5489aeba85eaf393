#include "rrl/gridworld.hpp"

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "rrl/mdp.hpp"

using rrl::GridSpec;
using rrl::GridWorld;
using rrl::Policy;

TEST_SUITE_BEGIN("gridworld");

TEST_CASE("default arena compiles to 46 validated states") {
  const GridWorld gw = rrl::compile_grid(GridSpec::default_spec());
  CHECK(gw.mdp.num_states == 46);
  CHECK(gw.mdp.num_actions == 4);
  CHECK(gw.rows == 5);
  CHECK(gw.cols == 9);
  CHECK(gw.start_state == gw.state_at(2, 4));
  REQUIRE(gw.goal_states.size() == 2);
  CHECK(gw.goal_states[0] == gw.state_at(2, 0));
  CHECK(gw.goal_states[1] == gw.state_at(2, 8));
  CHECK(gw.mdp.initial_dist[static_cast<std::size_t>(gw.start_state)] == 1.0);
  for (int s = 0; s < gw.mdp.num_states; ++s) {
    for (int a = 0; a < 4; ++a) {
      double sum = 0.0;
      for (double v : gw.mdp.transitions[static_cast<std::size_t>(s)]
                                        [static_cast<std::size_t>(a)]) {
        sum += v;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-14);
    }
  }
}

TEST_CASE("interior moves follow the slip mixture") {
  const GridWorld gw = rrl::compile_grid(GridSpec::default_spec());
  const int s = gw.state_at(1, 2);
  const auto& row = gw.mdp.transitions[static_cast<std::size_t>(s)][0];  // up
  CHECK(row[static_cast<std::size_t>(gw.state_at(0, 2))] ==
        doctest::Approx(0.7).epsilon(1e-14));
  CHECK(row[static_cast<std::size_t>(gw.state_at(1, 1))] ==
        doctest::Approx(0.15).epsilon(1e-14));
  CHECK(row[static_cast<std::size_t>(gw.state_at(1, 3))] ==
        doctest::Approx(0.15).epsilon(1e-14));
  CHECK(row[static_cast<std::size_t>(s)] == doctest::Approx(0.0));
}

TEST_CASE("blocked moves stay in place") {
  const GridWorld gw = rrl::compile_grid(GridSpec::default_spec());
  const int corner = gw.state_at(0, 0);
  const auto& row = gw.mdp.transitions[static_cast<std::size_t>(corner)][0];  // up
  // Intended up and the west deviation both hit the boundary.
  CHECK(row[static_cast<std::size_t>(corner)] ==
        doctest::Approx(0.85).epsilon(1e-14));
  CHECK(row[static_cast<std::size_t>(gw.state_at(0, 1))] ==
        doctest::Approx(0.15).epsilon(1e-14));
}

TEST_CASE("goals pay once and drop into the absorbing sink") {
  const GridWorld gw = rrl::compile_grid(GridSpec::default_spec());
  for (int g : gw.goal_states) {
    for (int a = 0; a < 4; ++a) {
      CHECK(gw.mdp.rewards[static_cast<std::size_t>(g)][static_cast<std::size_t>(a)] == 1.0);
      CHECK(gw.mdp.transitions[static_cast<std::size_t>(g)][static_cast<std::size_t>(a)]
                              [static_cast<std::size_t>(gw.sink_state)] == 1.0);
    }
  }
  for (int a = 0; a < 4; ++a) {
    CHECK(gw.mdp.rewards[static_cast<std::size_t>(gw.sink_state)][static_cast<std::size_t>(a)] == 0.0);
    CHECK(gw.mdp.transitions[static_cast<std::size_t>(gw.sink_state)][static_cast<std::size_t>(a)]
                            [static_cast<std::size_t>(gw.sink_state)] == 1.0);
  }
}

TEST_CASE("optimal values match an independent solver") {
  const GridWorld gw = rrl::compile_grid(GridSpec::default_spec());
  const auto res = rrl::exact_q_values(gw.mdp, 1e-11);
  const int start = gw.start_state;
  CHECK(res.v[static_cast<std::size_t>(start)] ==
        doctest::Approx(0.700795361146).epsilon(1e-9));
  CHECK(res.q[static_cast<std::size_t>(start)][0] ==
        doctest::Approx(0.670956824180).epsilon(1e-9));
  CHECK(res.q[static_cast<std::size_t>(start)][2] ==
        doctest::Approx(0.700795361146).epsilon(1e-9));
  CHECK(res.q[static_cast<std::size_t>(start)][3] ==
        doctest::Approx(0.700795361146).epsilon(1e-9));
  CHECK(res.v[static_cast<std::size_t>(gw.state_at(0, 0))] ==
        doctest::Approx(0.843583232648).epsilon(1e-9));
  CHECK(res.v[static_cast<std::size_t>(gw.state_at(2, 1))] ==
        doctest::Approx(0.908038928242).epsilon(1e-9));
  for (int g : gw.goal_states) {
    CHECK(res.v[static_cast<std::size_t>(g)] == doctest::Approx(1.0).epsilon(1e-10));
  }
  // The start cell ties between left and right; greedy must take the lower
  // action index (left).
  const Policy pi = rrl::greedy_policy(res.q);
  CHECK(pi[static_cast<std::size_t>(start)] == 2);
}

TEST_CASE("optimal values are mirror symmetric") {
  const GridWorld gw = rrl::compile_grid(GridSpec::default_spec());
  const auto res = rrl::exact_q_values(gw.mdp, 1e-11);
  for (int r = 0; r < gw.rows; ++r) {
    for (int c = 0; c < gw.cols; ++c) {
      const auto s = static_cast<std::size_t>(gw.state_at(r, c));
      const auto sm = static_cast<std::size_t>(gw.state_at(r, gw.cols - 1 - c));
      const auto sv = static_cast<std::size_t>(gw.state_at(gw.rows - 1 - r, c));
      // Left-right flip swaps left/right and keeps up/down.
      CHECK(res.q[s][0] == doctest::Approx(res.q[sm][0]).epsilon(1e-8));
      CHECK(res.q[s][2] == doctest::Approx(res.q[sm][3]).epsilon(1e-8));
      // Top-bottom flip swaps up/down and keeps left/right.
      CHECK(res.q[s][0] == doctest::Approx(res.q[sv][1]).epsilon(1e-8));
      CHECK(res.q[s][2] == doctest::Approx(res.q[sv][2]).epsilon(1e-8));
    }
  }
}

TEST_CASE("policy rendering") {
  GridSpec spec;
  spec.map = {"S.#", ".G."};
  const GridWorld gw = rrl::compile_grid(spec);
  CHECK(gw.mdp.num_states == 6);  // 5 free cells + sink
  Policy pi(static_cast<std::size_t>(gw.mdp.num_states), 0);
  pi[static_cast<std::size_t>(gw.state_at(0, 0))] = 3;
  pi[static_cast<std::size_t>(gw.state_at(0, 1))] = 1;
  pi[static_cast<std::size_t>(gw.state_at(1, 0))] = 0;
  pi[static_cast<std::size_t>(gw.state_at(1, 2))] = 2;
  CHECK(rrl::render_policy(gw, pi) == ">v#\n^G<\n");
}

TEST_CASE("json parsing and validation") {
  const auto spec = rrl::grid_spec_from_json(
      R"({"map": ["S.G"], "slip": 0.2, "gamma": 0.9})");
  CHECK(spec.map.size() == 1);
  CHECK(spec.slip == 0.2);
  CHECK(spec.gamma == 0.9);
  const GridWorld gw = rrl::compile_grid(spec);
  CHECK(gw.mdp.num_states == 4);
  const auto& row = gw.mdp.transitions[static_cast<std::size_t>(gw.start_state)][3];
  CHECK(row[static_cast<std::size_t>(gw.state_at(0, 1))] ==
        doctest::Approx(0.8).epsilon(1e-14));
  CHECK(row[static_cast<std::size_t>(gw.start_state)] ==
        doctest::Approx(0.2).epsilon(1e-14));

  const auto defaults = rrl::grid_spec_from_json(R"({"map": ["S.G"]})");
  CHECK(defaults.slip == 0.3);
  CHECK(defaults.gamma == 0.95);

  CHECK_THROWS_AS(rrl::grid_spec_from_json(R"({"slip": 0.3})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(rrl::grid_spec_from_json(R"({"map": ["..", "..."]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(rrl::grid_spec_from_json(R"({"map": ["S.Q"]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(rrl::grid_spec_from_json(R"({"map": ["..G"]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(rrl::grid_spec_from_json(R"({"map": ["SSG"]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(rrl::grid_spec_from_json(R"({"map": ["S.G"], "slip": 1.0})"),
                  std::invalid_argument);
}

TEST_SUITE_END();
