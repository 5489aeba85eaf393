#pragma once

#include <cstdint>
#include <vector>

#include "rrl/mdp.hpp"
#include "rrl/rand.hpp"
#include "rrl/rstat.hpp"

namespace rrl {

/**
 * Derived schedule and per-query budgets for phased value iteration with
 * replicable mean estimates.
 *
 * horizon T = ceil(ln(2 / ((1-gamma)^2 eps)) / (1-gamma)) iterations suffice
 * for the bootstrap error gamma^T/(1-gamma) to drop below eps/2, and each
 * iteration's expectation estimates carry tolerance tau = (1-gamma) eps / 2.
 * The per-query replicability and failure budgets split the totals evenly
 * over all |S||A|T queries.
 */
struct PviParams {
  int num_states = 0;
  int num_actions = 0;
  double gamma = 0.0;
  double r_max = 1.0;
  double eps = 0.0;
  double rho = 0.0;
  double delta = 0.0;
  int horizon = 0;
  double tau = 0.0;       // per-query tolerance in reward-scaled units
  double tau_norm = 0.0;  // same tolerance after mapping values into [0,1]
  double rho_sq = 0.0;
  double delta_sq = 0.0;

  static PviParams derive(const TabularMdp& mdp, double eps, double rho,
                          double delta);

  void validate() const;
};

/**
 * Per-iteration generative-draw count that the accuracy/replicability
 * analysis asks for: 2 (|S||A|T)^2 / (tau^2 (rho - 2 delta)^2)
 * * ln(2 |S||A|T / delta), rounded up. Returned as a double because the
 * value can be astronomically large.
 */
double theoretical_m(const PviParams& params);

/// Whether query grid offsets are redrawn each iteration (the default) or
/// fixed per state-action pair across iterations.
enum class OffsetMode { per_iteration, per_pair };

struct RpviOptions {
  std::uint64_t m = 0;  // generative draws per (s,a) per iteration
  bool practical = false;
  OffsetMode offset_mode = OffsetMode::per_iteration;
  // When positive, pins the per-query replicability budget directly: the
  // whole accuracy tolerance becomes the statistical part and the rounding
  // grid widens to 2*tau_norm/(rho_sq_override - 2*delta_sq).
  double rho_sq_override = 0.0;
  int workers = 1;
};

/// One replicable-mean query, recorded in normalized query units.
struct QueryAudit {
  int iteration = 0;
  int state = 0;
  int action = 0;
  std::uint64_t n = 0;
  double offset = 0.0;
  double empirical_mean = 0.0;
  double value = 0.0;
  double q = 0.0;  // resulting action-value entry in reward units

  friend bool operator==(const QueryAudit&, const QueryAudit&) = default;
};

struct RpviResult {
  PviParams params;
  RStatConfig query_config;
  QTable q;
  std::vector<double> v;
  Policy policy;
  std::vector<QueryAudit> audit;  // horizon * |S| * |A| records, fixed order
};

/**
 * Phased value iteration with replicable value estimates.
 *
 * Starts from Q = 0 and runs `horizon` iterations. Each iteration draws m
 * fresh generative samples per (s,a) (sample tree, paths
 * ("iter", t, "sa", s*A+a)), maps bootstrapped values through
 * phi(s') = (1-gamma)/r_max * max_a Q(s',a) into [0,1], answers the mean
 * query with the randomly offset grid estimator (offsets from the internal
 * tree at the same path), and writes back
 * Q(s,a) = r(s,a) + gamma * r_max/(1-gamma) * estimate.
 *
 * Two runs given the same internal tree agree exactly on any query whose
 * empirical means land in the same grid cell; the per-query budgets make
 * that hold with probability 1 - rho overall at theoretical_m samples.
 */
RpviResult run_rpvi(const TabularMdp& mdp, const PviParams& params,
                    const RpviOptions& options,
                    const rand::StreamTree& internal_tree,
                    const rand::StreamTree& sample_tree);

/// Same loop with plain empirical means (no rounding, no internal
/// randomness); the non-replicable reference point.
RpviResult run_pvi_baseline(const TabularMdp& mdp, const PviParams& params,
                            const RpviOptions& options,
                            const rand::StreamTree& sample_tree);

}  // namespace rrl
