#include "rrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace rrl {

namespace {

constexpr double kDistTolerance = 1e-12;

void check_distribution(const std::vector<double>& p, const std::string& what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) {
      throw std::invalid_argument(what + " has a negative entry");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kDistTolerance) {
    throw std::invalid_argument(what + " does not sum to 1 (sum=" +
                                std::to_string(sum) + ")");
  }
}

std::vector<double> state_values(const QTable& q) {
  std::vector<double> v(q.size());
  for (std::size_t s = 0; s < q.size(); ++s) {
    v[s] = *std::max_element(q[s].begin(), q[s].end());
  }
  return v;
}

}  // namespace

void TabularMdp::validate() const {
  if (num_states < 1) throw std::invalid_argument("num_states must be >= 1");
  if (num_actions < 1) throw std::invalid_argument("num_actions must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gamma must lie strictly inside (0,1)");
  }
  if (!(r_max > 0.0)) throw std::invalid_argument("r_max must be positive");
  const auto ns = static_cast<std::size_t>(num_states);
  const auto na = static_cast<std::size_t>(num_actions);
  if (rewards.size() != ns) {
    throw std::invalid_argument("rewards has wrong number of states");
  }
  if (transitions.size() != ns) {
    throw std::invalid_argument("transitions has wrong number of states");
  }
  for (std::size_t s = 0; s < ns; ++s) {
    if (rewards[s].size() != na) {
      throw std::invalid_argument("rewards[" + std::to_string(s) +
                                  "] has wrong number of actions");
    }
    if (transitions[s].size() != na) {
      throw std::invalid_argument("transitions[" + std::to_string(s) +
                                  "] has wrong number of actions");
    }
    for (std::size_t a = 0; a < na; ++a) {
      const double r = rewards[s][a];
      if (!(r >= 0.0 && r <= r_max)) {
        throw std::invalid_argument("reward out of [0, r_max] at state " +
                                    std::to_string(s) + ", action " +
                                    std::to_string(a));
      }
      if (transitions[s][a].size() != ns) {
        throw std::invalid_argument("transition row has wrong length at state " +
                                    std::to_string(s) + ", action " +
                                    std::to_string(a));
      }
      check_distribution(transitions[s][a],
                         "transition row (state " + std::to_string(s) +
                             ", action " + std::to_string(a) + ")");
    }
  }
  if (!initial_dist.empty()) {
    if (initial_dist.size() != ns) {
      throw std::invalid_argument("initial_dist has wrong length");
    }
    check_distribution(initial_dist, "initial_dist");
  }
}

QTable bellman_backup(const TabularMdp& mdp, const QTable& q) {
  const auto v = state_values(q);
  QTable out(q.size(), std::vector<double>(q.empty() ? 0 : q[0].size()));
  for (std::size_t s = 0; s < q.size(); ++s) {
    for (std::size_t a = 0; a < q[s].size(); ++a) {
      double exp_v = 0.0;
      const auto& row = mdp.transitions[s][a];
      for (std::size_t sp = 0; sp < row.size(); ++sp) exp_v += row[sp] * v[sp];
      out[s][a] = mdp.rewards[s][a] + mdp.gamma * exp_v;
    }
  }
  return out;
}

ValueIterationResult exact_q_values(const TabularMdp& mdp, double tol,
                                    int max_iterations) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  ValueIterationResult res;
  res.q.assign(static_cast<std::size_t>(mdp.num_states),
               std::vector<double>(static_cast<std::size_t>(mdp.num_actions), 0.0));
  const double stop = tol * (1.0 - mdp.gamma) / mdp.gamma;
  for (int it = 0; it < max_iterations; ++it) {
    QTable next = bellman_backup(mdp, res.q);
    const double step = max_abs_diff(next, res.q);
    res.q = std::move(next);
    res.iterations = it + 1;
    if (step <= stop) break;
  }
  res.v = state_values(res.q);
  return res;
}

Policy greedy_policy(const QTable& q) {
  Policy policy(q.size(), 0);
  for (std::size_t s = 0; s < q.size(); ++s) {
    int best = 0;
    for (std::size_t a = 1; a < q[s].size(); ++a) {
      if (q[s][a] > q[s][static_cast<std::size_t>(best)]) {
        best = static_cast<int>(a);
      }
    }
    policy[s] = best;
  }
  return policy;
}

std::vector<double> policy_values(const TabularMdp& mdp, const Policy& policy,
                                  double tol) {
  if (policy.size() != static_cast<std::size_t>(mdp.num_states)) {
    throw std::invalid_argument("policy has wrong length");
  }
  for (int a : policy) {
    if (a < 0 || a >= mdp.num_actions) {
      throw std::invalid_argument("policy action out of range");
    }
  }
  std::vector<double> v(policy.size(), 0.0);
  std::vector<double> next(policy.size());
  const double stop = tol * (1.0 - mdp.gamma) / mdp.gamma;
  for (;;) {
    double step = 0.0;
    for (std::size_t s = 0; s < policy.size(); ++s) {
      const auto a = static_cast<std::size_t>(policy[s]);
      double exp_v = 0.0;
      const auto& row = mdp.transitions[s][a];
      for (std::size_t sp = 0; sp < row.size(); ++sp) exp_v += row[sp] * v[sp];
      next[s] = mdp.rewards[s][a] + mdp.gamma * exp_v;
      step = std::max(step, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (step <= stop) break;
  }
  return v;
}

double policy_return(const TabularMdp& mdp, const Policy& policy, double tol) {
  const auto v = policy_values(mdp, policy, tol);
  double ret = 0.0;
  if (mdp.initial_dist.empty()) {
    for (double x : v) ret += x;
    return ret / static_cast<double>(v.size());
  }
  for (std::size_t s = 0; s < v.size(); ++s) ret += mdp.initial_dist[s] * v[s];
  return ret;
}

double max_abs_diff(const QTable& a, const QTable& b) {
  if (a.size() != b.size()) throw std::invalid_argument("shape mismatch");
  double d = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (a[s].size() != b[s].size()) {
      throw std::invalid_argument("shape mismatch");
    }
    for (std::size_t i = 0; i < a[s].size(); ++i) {
      d = std::max(d, std::abs(a[s][i] - b[s][i]));
    }
  }
  return d;
}

double simulation_gap_bound(const TabularMdp& m1, const TabularMdp& m2) {
  if (m1.num_states != m2.num_states || m1.num_actions != m2.num_actions) {
    throw std::invalid_argument("models have different shapes");
  }
  if (m1.gamma != m2.gamma) {
    throw std::invalid_argument("models have different discounts");
  }
  double worst_l1 = 0.0;
  for (int s = 0; s < m1.num_states; ++s) {
    for (int a = 0; a < m1.num_actions; ++a) {
      double l1 = 0.0;
      const auto& p1 = m1.transitions[static_cast<std::size_t>(s)]
                                     [static_cast<std::size_t>(a)];
      const auto& p2 = m2.transitions[static_cast<std::size_t>(s)]
                                     [static_cast<std::size_t>(a)];
      for (std::size_t sp = 0; sp < p1.size(); ++sp) {
        l1 += std::abs(p1[sp] - p2[sp]);
      }
      worst_l1 = std::max(worst_l1, l1);
    }
  }
  const double g = 1.0 - m1.gamma;
  return m1.r_max / (2.0 * g * g) * worst_l1;
}

void normalize_transition_rows(
    std::vector<std::vector<std::vector<double>>>& transitions) {
  for (std::size_t s = 0; s < transitions.size(); ++s) {
    for (auto& row : transitions[s]) {
      double sum = 0.0;
      for (double& p : row) {
        p = std::clamp(p, 0.0, 1.0);
        sum += p;
      }
      if (sum > 0.0) {
        std::size_t heaviest = 0;
        double renormed = 0.0;
        for (std::size_t sp = 0; sp < row.size(); ++sp) {
          row[sp] /= sum;
          renormed += row[sp];
          if (row[sp] > row[heaviest]) heaviest = sp;
        }
        row[heaviest] += 1.0 - renormed;
      } else {
        row[s] = 1.0;
      }
    }
  }
}

}  // namespace rrl
