#include "rrl/gridworld.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>

#include "json.hpp"

namespace rrl {

namespace {

constexpr int kDeltaRow[4] = {-1, 1, 0, 0};
constexpr int kDeltaCol[4] = {0, 0, -1, 1};

// Perpendicular deviation directions for each action.
constexpr int kPerp[4][2] = {{2, 3}, {2, 3}, {0, 1}, {0, 1}};

}  // namespace

GridSpec GridSpec::default_spec() {
  GridSpec spec;
  spec.map = {
      ".........",
      ".........",
      "G...S...G",
      ".........",
      ".........",
  };
  spec.slip = 0.3;
  spec.gamma = 0.95;
  return spec;
}

void GridSpec::validate() const {
  if (map.empty()) throw std::invalid_argument("grid: empty map");
  const std::size_t width = map[0].size();
  if (width == 0) throw std::invalid_argument("grid: empty map row");
  int starts = 0;
  int free_cells = 0;
  for (const std::string& row : map) {
    if (row.size() != width) {
      throw std::invalid_argument("grid: ragged map rows");
    }
    for (char c : row) {
      if (c != '.' && c != '#' && c != 'S' && c != 'G') {
        throw std::invalid_argument(std::string("grid: unknown map character '") +
                                    c + "'");
      }
      if (c == 'S') ++starts;
      if (c != '#') ++free_cells;
    }
  }
  if (starts != 1) {
    throw std::invalid_argument("grid: map must contain exactly one 'S'");
  }
  if (free_cells == 0) throw std::invalid_argument("grid: no free cells");
  if (!(slip >= 0.0 && slip < 1.0)) {
    throw std::invalid_argument("grid: slip must lie in [0, 1)");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("grid: gamma must lie strictly inside (0,1)");
  }
}

GridSpec grid_spec_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  GridSpec spec;
  if (!j.contains("map") || !j["map"].is_array()) {
    throw std::invalid_argument("grid json: missing \"map\" array");
  }
  spec.map = j["map"].get<std::vector<std::string>>();
  spec.slip = j.value("slip", 0.3);
  spec.gamma = j.value("gamma", 0.95);
  spec.validate();
  return spec;
}

GridWorld compile_grid(const GridSpec& spec) {
  spec.validate();
  GridWorld gw;
  gw.spec = spec;
  gw.rows = static_cast<int>(spec.map.size());
  gw.cols = static_cast<int>(spec.map[0].size());
  gw.cell_state.assign(static_cast<std::size_t>(gw.rows * gw.cols), -1);

  for (int r = 0; r < gw.rows; ++r) {
    for (int c = 0; c < gw.cols; ++c) {
      const char ch = spec.map[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (ch == '#') continue;
      const int s = static_cast<int>(gw.state_cell.size());
      gw.cell_state[static_cast<std::size_t>(r * gw.cols + c)] = s;
      gw.state_cell.emplace_back(r, c);
      if (ch == 'S') gw.start_state = s;
      if (ch == 'G') gw.goal_states.push_back(s);
    }
  }
  const int num_free = static_cast<int>(gw.state_cell.size());
  gw.sink_state = num_free;

  TabularMdp& m = gw.mdp;
  m.num_states = num_free + 1;
  m.num_actions = 4;
  m.gamma = spec.gamma;
  m.r_max = 1.0;
  m.rewards.assign(static_cast<std::size_t>(m.num_states),
                   std::vector<double>(4, 0.0));
  m.transitions.assign(
      static_cast<std::size_t>(m.num_states),
      std::vector<std::vector<double>>(
          4, std::vector<double>(static_cast<std::size_t>(m.num_states), 0.0)));
  m.initial_dist.assign(static_cast<std::size_t>(m.num_states), 0.0);
  m.initial_dist[static_cast<std::size_t>(gw.start_state)] = 1.0;

  const auto in_bounds = [&](int r, int c) {
    return r >= 0 && r < gw.rows && c >= 0 && c < gw.cols;
  };

  for (int s = 0; s < num_free; ++s) {
    const auto [r, c] = gw.state_cell[static_cast<std::size_t>(s)];
    const bool is_goal =
        spec.map[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] == 'G';
    for (int a = 0; a < 4; ++a) {
      auto& row = m.transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
      if (is_goal) {
        m.rewards[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = 1.0;
        row[static_cast<std::size_t>(gw.sink_state)] = 1.0;
        continue;
      }
      const int dirs[3] = {a, kPerp[a][0], kPerp[a][1]};
      const double mass[3] = {1.0 - spec.slip, spec.slip / 2.0, spec.slip / 2.0};
      for (int d = 0; d < 3; ++d) {
        const int nr = r + kDeltaRow[dirs[d]];
        const int nc = c + kDeltaCol[dirs[d]];
        int target = s;
        if (in_bounds(nr, nc)) {
          const int t = gw.state_at(nr, nc);
          if (t >= 0) target = t;
        }
        row[static_cast<std::size_t>(target)] += mass[d];
      }
      // Pin the row sum to exactly one by folding the rounding residue into
      // the heaviest entry.
      double sum = 0.0;
      for (double v : row) sum += v;
      auto heaviest = std::max_element(row.begin(), row.end());
      *heaviest += 1.0 - sum;
    }
  }
  for (int a = 0; a < 4; ++a) {
    m.transitions[static_cast<std::size_t>(gw.sink_state)][static_cast<std::size_t>(a)]
                 [static_cast<std::size_t>(gw.sink_state)] = 1.0;
  }
  m.validate();
  return gw;
}

std::string render_policy(const GridWorld& grid, const Policy& policy) {
  if (policy.size() != static_cast<std::size_t>(grid.mdp.num_states)) {
    throw std::invalid_argument("render_policy: policy has wrong length");
  }
  static const char kArrow[4] = {'^', 'v', '<', '>'};
  std::string out;
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const char ch = grid.spec.map[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (ch == '#') {
        out.push_back('#');
        continue;
      }
      if (ch == 'G') {
        out.push_back('G');
        continue;
      }
      const int a = policy[static_cast<std::size_t>(grid.state_at(r, c))];
      if (a < 0 || a > 3) {
        throw std::invalid_argument("render_policy: action out of range");
      }
      out.push_back(kArrow[a]);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace rrl
