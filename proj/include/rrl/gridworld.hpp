#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rrl/mdp.hpp"

namespace rrl {

/**
 * Slippery grid navigation task described by an ASCII map.
 *
 * Map characters: '.' free cell, '#' blocked cell, 'S' start (exactly one),
 * 'G' goal. Actions are 0=up, 1=down, 2=left, 3=right. A move goes in the
 * chosen direction with probability 1 - slip and deviates to each
 * perpendicular direction with probability slip / 2; moves that would leave
 * the grid or enter a blocked cell stay in place. Every action in a goal
 * cell earns reward 1 and drops into an absorbing zero-reward sink, so goal
 * reward is collected exactly once.
 */
struct GridSpec {
  std::vector<std::string> map;
  double slip = 0.3;
  double gamma = 0.95;

  /// 5 x 9 arena with goals at both ends of the middle row and a central start.
  static GridSpec default_spec();

  void validate() const;
};

/// Parses {"map": [...], "slip": .., "gamma": ..} (slip and gamma optional).
GridSpec grid_spec_from_json(const std::string& text);

struct GridWorld {
  GridSpec spec;
  TabularMdp mdp;
  int rows = 0;
  int cols = 0;
  std::vector<int> cell_state;                  // rows*cols, -1 where blocked
  std::vector<std::pair<int, int>> state_cell;  // free states only
  int start_state = -1;
  int sink_state = -1;
  std::vector<int> goal_states;

  int state_at(int row, int col) const { return cell_state[static_cast<std::size_t>(row * cols + col)]; }
};

/// Compiles the spec into a validated MDP (free cells plus one sink state).
GridWorld compile_grid(const GridSpec& spec);

/// ASCII rendering of a policy: arrows on free cells, 'G' on goals, '#' on
/// blocked cells. One map row per line, each line newline-terminated.
std::string render_policy(const GridWorld& grid, const Policy& policy);

}  // namespace rrl
