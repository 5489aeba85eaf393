#pragma once

#include <vector>

namespace rrl {

/// Action-value table indexed as q[state][action].
using QTable = std::vector<std::vector<double>>;

/// Deterministic stationary policy; policy[state] is the chosen action.
using Policy = std::vector<int>;

/**
 * Finite discounted MDP with dense reward and transition tables.
 *
 * rewards[s][a] is the deterministic immediate reward, transitions[s][a][s']
 * the next-state distribution, and initial_dist the start-state distribution
 * (may be left empty, in which case a uniform start is assumed where one is
 * needed).
 */
struct TabularMdp {
  int num_states = 0;
  int num_actions = 0;
  double gamma = 0.0;
  double r_max = 1.0;
  std::vector<std::vector<double>> rewards;
  std::vector<std::vector<std::vector<double>>> transitions;
  std::vector<double> initial_dist;

  /**
   * Checks structural and numeric invariants: positive state/action counts,
   * gamma in (0,1), rewards within [0, r_max], non-negative transition
   * probabilities with row sums within 1e-12 of one, and (when present) a
   * valid initial distribution. Throws std::invalid_argument on the first
   * violation.
   */
  void validate() const;
};

/// One synchronous Bellman optimality backup of the given Q-table.
QTable bellman_backup(const TabularMdp& mdp, const QTable& q);

struct ValueIterationResult {
  QTable q;
  std::vector<double> v;
  int iterations = 0;
};

/**
 * Value iteration from Q = 0 until the successive-iterate gap guarantees
 * ||Q - Q*||_inf <= tol (stop once the sup-norm step is at most
 * tol * (1 - gamma) / gamma).
 */
ValueIterationResult exact_q_values(const TabularMdp& mdp, double tol = 1e-10,
                                    int max_iterations = 1000000);

/// Greedy policy for a Q-table; ties resolve to the lowest action index.
Policy greedy_policy(const QTable& q);

/// State values of a fixed deterministic policy, to the same tolerance
/// contract as exact_q_values.
std::vector<double> policy_values(const TabularMdp& mdp, const Policy& policy,
                                  double tol = 1e-10);

/// Expected discounted return of the policy from the initial distribution.
double policy_return(const TabularMdp& mdp, const Policy& policy,
                     double tol = 1e-10);

/// Sup-norm distance between two equally shaped Q-tables.
double max_abs_diff(const QTable& a, const QTable& b);

/**
 * Upper bound on the difference in any policy's return between two MDPs that
 * share rewards and discount:
 *   r_max / (2 (1 - gamma)^2) * max_{s,a} ||P1(.|s,a) - P2(.|s,a)||_1.
 */
double simulation_gap_bound(const TabularMdp& m1, const TabularMdp& m2);

/**
 * Turns estimated transition rows into proper distributions in place: each
 * entry is clamped to [0,1], positive rows are divided by their sum with the
 * rounding residue pinned on the heaviest entry, and all-zero rows become a
 * self-loop on the row's own state.
 */
void normalize_transition_rows(
    std::vector<std::vector<std::vector<double>>>& transitions);

}  // namespace rrl
