#pragma once

#include <cstdint>
#include <vector>

#include "rrl/mdp.hpp"
#include "rrl/rand.hpp"

namespace rrl {

/// counts[s][a][s'] - next-state tallies per state-action pair.
using CountTensor = std::vector<std::vector<std::vector<std::uint64_t>>>;

/// One draw from the generative model: next state after taking a in s.
int generative_step(const TabularMdp& mdp, int s, int a, rand::Stream& stream);

/**
 * Next-state tallies of m generative draws for every state-action pair.
 *
 * Each pair uses its own stream derived at prefix + ("sa", s*A + a), so the
 * result does not depend on how pairs are split across workers. By default
 * the tally is drawn in one multinomial step, which follows exactly the law
 * of m independent draws; `literal` switches to m per-draw categorical calls
 * (slower, same distribution, different stream consumption).
 */
CountTensor gather_counts(const TabularMdp& mdp, std::uint64_t m,
                          const rand::StreamTree& sample_tree,
                          const rand::StreamPath& prefix, int workers = 1,
                          bool literal = false);

/// Tallies for a single state-action pair, multinomial route.
std::vector<std::uint64_t> sample_next_state_counts(const TabularMdp& mdp,
                                                    int s, int a,
                                                    std::uint64_t m,
                                                    rand::Stream& stream);

/// Tallies for a single state-action pair, one categorical draw at a time.
std::vector<std::uint64_t> sample_next_state_counts_literal(
    const TabularMdp& mdp, int s, int a, std::uint64_t m,
    rand::Stream& stream);

struct Episode {
  std::vector<int> states;      // horizon + 1 entries
  std::vector<int> actions;     // horizon entries
  std::vector<double> rewards;  // horizon entries
};

/**
 * Rolls out a deterministic policy for `horizon` steps from a start state
 * drawn from the MDP's initial distribution (which must be present).
 */
Episode sample_episode(const TabularMdp& mdp, const Policy& policy,
                       int horizon, rand::Stream& stream);

}  // namespace rrl
