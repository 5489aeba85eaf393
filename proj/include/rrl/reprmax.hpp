#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rrl/mdp.hpp"
#include "rrl/rand.hpp"
#include "rrl/rstat.hpp"
#include "rrl/sampling.hpp"

namespace rrl {

/**
 * Model-based learner state: while a pair (s,a) is unknown it is modeled as
 * a self-loop paying r_max (which makes the planner seek it out); once known
 * its row holds grid-rounded transition estimates and its true reward.
 */
struct RMaxModel {
  int num_states = 0;
  int num_actions = 0;
  double r_max = 1.0;
  std::vector<std::vector<std::vector<double>>> p_hat;  // [s][a][s']
  std::vector<std::vector<double>> r_hat;               // [s][a]
  std::vector<std::vector<std::uint8_t>> known;         // [s][a]

  static RMaxModel optimistic(int num_states, int num_actions, double r_max);

  bool is_known(int s, int a) const;
  bool all_known() const;
};

std::uint64_t hash_model(const RMaxModel& model);

/**
 * Real-valued visit counters together with the randomized promotion
 * threshold window [k, k+w]. A pair becomes (permanently) known once its
 * accumulated average visit count reaches the threshold drawn that round.
 */
struct KnownSet {
  double k = 0.0;
  double w = 0.0;
  std::vector<std::vector<double>> n;            // accumulated averages
  std::vector<std::vector<std::uint8_t>> known;  // promotion flags
  std::vector<double> k_prime_history;           // one entry per update call

  KnownSet() = default;
  KnownSet(int num_states, int num_actions, double k, double w);

  bool is_known(int s, int a) const;
  bool all_known() const;
  int known_count() const;
};

/**
 * Derived budgets for the episodic model-based learner.
 *
 * rounds T = ceil(H|S||A|/eps + H^2 ln(1/delta)/eps^2). theoretical_m is the
 * per-round trajectory count the analysis asks for,
 * ceil(|S|^2|A|^2 T^4 ln(1/rho) / rho^2) - usually astronomically large, so
 * m must be set explicitly (practical mode) before running. The per-query
 * budgets split rho and delta over the |S|^2|A| transition-entry queries,
 * and each query carries tolerance tau_sq = eps (1-gamma)^2 / |S|.
 */
struct RMaxParams {
  int num_states = 0;
  int num_actions = 0;
  double gamma = 0.0;
  double r_max = 1.0;
  double epsilon = 0.0;
  double rho = 0.0;
  double delta = 0.0;
  int horizon = 0;            // H, episode length
  std::int64_t rounds = 0;    // T
  std::uint64_t m = 0;        // episodes per round; must be set before running
  double theoretical_m = 0.0;
  double k = 0.0;             // promotion threshold floor, = H
  double w = 0.0;             // window width, default = k
  double rho_k = 0.0;         // per-round-per-pair replicability budget
  double rho_sq = 0.0;
  double tau_sq = 0.0;
  double delta_sq = 0.0;
  double t_gap = 0.0;         // tolerated paired-run counter drift
  bool practical = false;

  static RMaxParams derive(const TabularMdp& mdp, double epsilon, double rho,
                           double delta, int horizon);

  void validate() const;

  /// Discount/horizon compatibility condition behind the convergence
  /// guarantee: 1-gamma > sqrt(eps) ln^{1/4}(1/delta) / (H|A| ln^{1/4}(1/rho)).
  /// Violations are reported as warnings, not errors.
  bool convergence_precondition_holds() const;
};

/// Pooled next-state tallies over every episode collected so far; sufficient
/// statistics for both the visit averages and the indicator mean queries.
struct TransitionCounts {
  std::vector<std::vector<std::vector<std::uint64_t>>> counts;  // [s][a][s']

  TransitionCounts(int num_states, int num_actions);

  void add(const Episode& episode);
  std::uint64_t total(int s, int a) const;
};

struct ThresholdUpdate {
  double k_prime = 0.0;
  std::vector<std::pair<int, int>> newly_known;  // s-major, a-minor order
};

/// Promotes every unknown pair whose counter has reached k_prime; returns
/// the promoted pairs in s-major order.
std::vector<std::pair<int, int>> apply_threshold(KnownSet& ks, double k_prime);

/**
 * One counting round: adds each pair's average visit count over the given
 * episodes to its counter, draws a single threshold k' uniformly from
 * [k, k+w] (exactly one draw per call, shared by all pairs), and promotes
 * the pairs that crossed it. Episodes must all have exactly `horizon` steps.
 */
ThresholdUpdate rep_update_k(const std::vector<Episode>& episodes, int horizon,
                             KnownSet& ks, rand::Stream& threshold_stream);

/**
 * Fills in the rows of the newly promoted pairs. Each transition entry is
 * one indicator mean query over the pooled tallies, answered on a randomly
 * offset grid with offsets drawn at internal paths
 * ("known-round", round, "sas", (s*A + a)*S + s'), so paired runs sharing
 * the internal tree share them. Rewards are copied from the MDP. Re-promoting
 * an already known pair is an error: known rows never change.
 */
void update_model(RMaxModel& model,
                  const std::vector<std::pair<int, int>>& newly_known,
                  const TransitionCounts& pooled, const TabularMdp& mdp,
                  const RStatConfig& config, const rand::StreamTree& internal,
                  int round, bool practical);

/**
 * Deterministic planning view of the model: rows are clamped entrywise to
 * [0,1] and renormalized by their sum (a pure function of the row, so equal
 * models give bit-equal planning inputs); an all-zero row degenerates to a
 * self-loop.
 */
TabularMdp to_planning_mdp(const RMaxModel& model, double gamma);

/// Exact value iteration on the planning view of the model, greedy policy,
/// lowest action index on ties. Identical models give identical policies.
Policy plan(const RMaxModel& model, double gamma, double tol = 1e-10);

struct RoundAudit {
  int round = 0;
  double k_prime = 0.0;
  std::vector<std::pair<int, int>> newly_known;
  std::uint64_t n_counts_digest = 0;
  std::uint64_t model_hash = 0;
  std::uint64_t policy_hash = 0;

  friend bool operator==(const RoundAudit&, const RoundAudit&) = default;
};

/// JSON-lines rendering of a round-by-round audit trail.
std::string audit_to_jsonl(const std::vector<RoundAudit>& audit);

struct RMaxResult {
  Policy policy;
  RMaxModel model;
  KnownSet counters;
  RStatConfig query_config;
  std::vector<RoundAudit> audit;
  std::int64_t rounds_run = 0;
};

/**
 * Episodic model-based loop with the randomized promotion threshold and
 * grid-rounded model estimates.
 *
 * The initial policy is drawn uniformly per state from the internal tree at
 * ("init-policy", 0). Each round collects params.m episodes under the
 * current policy (sample tree, paths ("round", i, "episode", j)), updates
 * counters and promotions, fills in newly known rows, and replans. Runs for
 * at most params.rounds rounds, stopping early once every pair is known.
 */
RMaxResult run_reprmax(const TabularMdp& mdp, const RMaxParams& params,
                       const rand::StreamTree& internal,
                       const rand::StreamTree& sample, int workers = 1);

struct BaselineResult {
  Policy policy;
  RMaxModel model;
  std::vector<RoundAudit> audit;
  std::int64_t rounds_run = 0;
};

/**
 * Classical counterpart used for contrast: fixed integer visit-count
 * threshold, raw empirical transition estimates (no grid rounding), no
 * internal randomness. Same episode collection scheme and round cap.
 */
BaselineResult run_rmax_baseline(const TabularMdp& mdp, double epsilon,
                                 double delta, int horizon, std::uint64_t m,
                                 std::uint64_t threshold,
                                 const rand::StreamTree& sample,
                                 int workers = 1);

}  // namespace rrl
