#include "rrl/sampling.hpp"

#include <stdexcept>

#include "rrl/parallel.hpp"

namespace rrl {

namespace {

void check_pair(const TabularMdp& mdp, int s, int a) {
  if (s < 0 || s >= mdp.num_states) {
    throw std::invalid_argument("state index out of range");
  }
  if (a < 0 || a >= mdp.num_actions) {
    throw std::invalid_argument("action index out of range");
  }
}

}  // namespace

int generative_step(const TabularMdp& mdp, int s, int a,
                    rand::Stream& stream) {
  check_pair(mdp, s, a);
  const auto& row = mdp.transitions[static_cast<std::size_t>(s)]
                                   [static_cast<std::size_t>(a)];
  return static_cast<int>(stream.categorical(row));
}

std::vector<std::uint64_t> sample_next_state_counts(const TabularMdp& mdp,
                                                    int s, int a,
                                                    std::uint64_t m,
                                                    rand::Stream& stream) {
  check_pair(mdp, s, a);
  const auto& row = mdp.transitions[static_cast<std::size_t>(s)]
                                   [static_cast<std::size_t>(a)];
  std::vector<std::uint64_t> counts(row.size(), 0);
  stream.multinomial(m, row, counts);
  return counts;
}

std::vector<std::uint64_t> sample_next_state_counts_literal(
    const TabularMdp& mdp, int s, int a, std::uint64_t m,
    rand::Stream& stream) {
  check_pair(mdp, s, a);
  const auto& row = mdp.transitions[static_cast<std::size_t>(s)]
                                   [static_cast<std::size_t>(a)];
  std::vector<std::uint64_t> counts(row.size(), 0);
  for (std::uint64_t i = 0; i < m; ++i) ++counts[stream.categorical(row)];
  return counts;
}

CountTensor gather_counts(const TabularMdp& mdp, std::uint64_t m,
                          const rand::StreamTree& sample_tree,
                          const rand::StreamPath& prefix, int workers,
                          bool literal) {
  const auto ns = static_cast<std::size_t>(mdp.num_states);
  const auto na = static_cast<std::size_t>(mdp.num_actions);
  CountTensor counts(
      ns, std::vector<std::vector<std::uint64_t>>(
              na, std::vector<std::uint64_t>(ns, 0)));
  parallel_for(ns * na, workers, [&](std::size_t idx) {
    const auto s = static_cast<int>(idx / na);
    const auto a = static_cast<int>(idx % na);
    rand::StreamPath path = prefix;
    path.emplace_back("sa", idx);
    rand::Stream stream = sample_tree.derive(path);
    counts[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] =
        literal ? sample_next_state_counts_literal(mdp, s, a, m, stream)
                : sample_next_state_counts(mdp, s, a, m, stream);
  });
  return counts;
}

Episode sample_episode(const TabularMdp& mdp, const Policy& policy,
                       int horizon, rand::Stream& stream) {
  if (mdp.initial_dist.empty()) {
    throw std::invalid_argument("sample_episode: MDP has no initial distribution");
  }
  if (policy.size() != static_cast<std::size_t>(mdp.num_states)) {
    throw std::invalid_argument("sample_episode: policy has wrong length");
  }
  for (int a : policy) {
    if (a < 0 || a >= mdp.num_actions) {
      throw std::invalid_argument("sample_episode: policy action out of range");
    }
  }
  if (horizon < 0) throw std::invalid_argument("sample_episode: negative horizon");
  Episode ep;
  ep.states.reserve(static_cast<std::size_t>(horizon) + 1);
  ep.actions.reserve(static_cast<std::size_t>(horizon));
  ep.rewards.reserve(static_cast<std::size_t>(horizon));
  int s = static_cast<int>(stream.categorical(mdp.initial_dist));
  ep.states.push_back(s);
  for (int h = 0; h < horizon; ++h) {
    const int a = policy[static_cast<std::size_t>(s)];
    ep.actions.push_back(a);
    ep.rewards.push_back(mdp.rewards[static_cast<std::size_t>(s)]
                                    [static_cast<std::size_t>(a)]);
    s = generative_step(mdp, s, a, stream);
    ep.states.push_back(s);
  }
  return ep;
}

}  // namespace rrl
