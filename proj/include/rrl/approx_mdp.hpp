#pragma once

#include <cstdint>
#include <vector>

#include "rrl/mdp.hpp"
#include "rrl/rand.hpp"
#include "rrl/rstat.hpp"

namespace rrl {

/// How generative draws are shared between the indicator queries of one
/// state-action pair. `shared` answers all |S| next-state queries from the
/// same m draws; `per_entry` spends m fresh draws on every (s,a,s') entry.
enum class SampleReuse { shared, per_entry };

struct ApproxMdpOptions {
  std::uint64_t m = 0;  // generative draws per (s,a) pair, or per entry
  bool practical = false;
  SampleReuse reuse = SampleReuse::shared;
  int workers = 1;
};

/**
 * Entrywise transition-model estimate built from replicable mean queries.
 *
 * p_hat[s][a][s'] is the randomly-offset-grid estimate of P(s'|s,a), clamped
 * to [0,1]; offsets[s][a][s'] records the grid offset the internal stream
 * produced for that entry, so a row can be audited entry by entry. Rows are
 * estimates and need not sum to one; to_planning_mdp builds a proper MDP
 * view. Rewards are read off the generative model exactly.
 */
struct ApproxMdp {
  int num_states = 0;
  int num_actions = 0;
  double gamma = 0.0;
  double r_max = 1.0;
  double epsilon = 0.0;
  double rho = 0.0;
  double delta = 0.0;
  double rho_sq = 0.0;    // per-query replicability budget, rho / (S^2 A)
  double delta_sq = 0.0;  // per-query failure budget, delta / (S^2 A)
  std::uint64_t m = 0;
  SampleReuse reuse = SampleReuse::shared;
  RStatConfig query_config;
  std::vector<std::vector<std::vector<double>>> p_hat;
  std::vector<std::vector<std::vector<double>>> offsets;
  std::vector<std::vector<std::vector<double>>> means;  // pre-rounding, diagnostic
  std::vector<std::vector<double>> r_hat;
};

/// Per-query estimator configuration for an S-state, A-action model at
/// entrywise tolerance epsilon: total budgets rho and delta split evenly
/// over all S^2 A indicator queries.
RStatConfig approx_mdp_query_config(int num_states, int num_actions,
                                    double epsilon, double rho, double delta);

/**
 * Total generative-draw count that makes a greedy policy computed from the
 * estimated model epsilon-optimal while keeping whole-model replicability
 * rho: every one of the S^2 A entries is estimated to the planning-grade
 * tolerance tau = epsilon (1-gamma)^2 / S with budgets rho/(S^2 A) and
 * delta/(S^2 A), i.e.
 *   S^2 A * ceil(2 (S^2 A)^2 / (tau^2 (rho - 2 delta)^2) * ln(2 S^2 A / delta)).
 * Returned as a double because the value can be astronomically large.
 */
double theoretical_m_mdp(int num_states, int num_actions, double gamma,
                         double epsilon, double rho, double delta);

/**
 * Estimates every transition entry of the MDP with a replicable mean query.
 *
 * Sample streams: mode `shared` draws m next states per (s,a) at path
 * ("sa", s*A+a) and answers each indicator query phi_{s'} from those
 * tallies; mode `per_entry` draws m fresh next states per entry at
 * ("sas", (s*A+a)*S+s'). Grid offsets always come from the internal tree at
 * ("sas", (s*A+a)*S+s'), one uniform draw per entry, so both modes round on
 * identical grids. Strict mode requires m >= query_config.required_n();
 * `practical` lifts that check. The result does not depend on `workers`.
 *
 * Two runs sharing the internal tree produce bit-identical p_hat whenever
 * every paired empirical mean lands in the same grid cell; the per-query
 * budgets make that hold with probability at least 1 - rho at strict m.
 */
ApproxMdp approximate_mdp(const TabularMdp& mdp, double epsilon, double rho,
                          double delta, const ApproxMdpOptions& options,
                          const rand::StreamTree& internal_tree,
                          const rand::StreamTree& sample_tree);

/// Proper MDP over the estimated model: rows clamped, renormalized, and
/// zero rows replaced by self-loops, same gamma and rewards.
TabularMdp to_planning_mdp(const ApproxMdp& approx);

}  // namespace rrl
