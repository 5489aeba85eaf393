#include "rrl/approx_mdp.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "rrl/parallel.hpp"
#include "rrl/sampling.hpp"

namespace rrl {

namespace {

std::uint64_t entry_index(int s, int a, int sp, int num_actions,
                          int num_states) {
  return (static_cast<std::uint64_t>(s) *
              static_cast<std::uint64_t>(num_actions) +
          static_cast<std::uint64_t>(a)) *
             static_cast<std::uint64_t>(num_states) +
         static_cast<std::uint64_t>(sp);
}

}  // namespace

RStatConfig approx_mdp_query_config(int num_states, int num_actions,
                                    double epsilon, double rho, double delta) {
  if (num_states < 1 || num_actions < 1) {
    throw std::invalid_argument(
        "model estimation: needs at least one state and action");
  }
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw std::invalid_argument(
        "model estimation: entry tolerance must lie in (0,1)");
  }
  const double queries = static_cast<double>(num_states) *
                         static_cast<double>(num_states) *
                         static_cast<double>(num_actions);
  return RStatConfig::from_total_tolerance(epsilon, rho / queries,
                                           delta / queries);
}

double theoretical_m_mdp(int num_states, int num_actions, double gamma,
                         double epsilon, double rho, double delta) {
  if (num_states < 1 || num_actions < 1) {
    throw std::invalid_argument(
        "model estimation: needs at least one state and action");
  }
  if (!(gamma > 0.0) || !(gamma < 1.0)) {
    throw std::invalid_argument("model estimation: gamma must lie in (0,1)");
  }
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw std::invalid_argument(
        "model estimation: tolerance must lie in (0,1)");
  }
  if (!(rho > 0.0) || !(rho < 1.0) || !(delta > 0.0) || !(delta < rho / 2.0)) {
    throw std::invalid_argument(
        "model estimation: needs 0 < delta < rho/2 and rho in (0,1)");
  }
  const double queries = static_cast<double>(num_states) *
                         static_cast<double>(num_states) *
                         static_cast<double>(num_actions);
  const double tau =
      epsilon * (1.0 - gamma) * (1.0 - gamma) / static_cast<double>(num_states);
  const double spread = rho - 2.0 * delta;
  const double per_entry = 2.0 * queries * queries / (tau * tau * spread * spread) *
                           std::log(2.0 * queries / delta);
  return queries * std::ceil(per_entry);
}

ApproxMdp approximate_mdp(const TabularMdp& mdp, double epsilon, double rho,
                          double delta, const ApproxMdpOptions& options,
                          const rand::StreamTree& internal_tree,
                          const rand::StreamTree& sample_tree) {
  mdp.validate();
  if (options.m == 0) {
    throw std::invalid_argument("model estimation: m must be positive");
  }
  const int S = mdp.num_states;
  const int A = mdp.num_actions;

  ApproxMdp out;
  out.num_states = S;
  out.num_actions = A;
  out.gamma = mdp.gamma;
  out.r_max = mdp.r_max;
  out.epsilon = epsilon;
  out.rho = rho;
  out.delta = delta;
  const double queries = static_cast<double>(S) * static_cast<double>(S) *
                         static_cast<double>(A);
  out.rho_sq = rho / queries;
  out.delta_sq = delta / queries;
  out.m = options.m;
  out.reuse = options.reuse;
  out.query_config = approx_mdp_query_config(S, A, epsilon, rho, delta);
  out.p_hat.assign(
      static_cast<std::size_t>(S),
      std::vector<std::vector<double>>(
          static_cast<std::size_t>(A),
          std::vector<double>(static_cast<std::size_t>(S), 0.0)));
  out.offsets = out.p_hat;
  out.means = out.p_hat;
  out.r_hat = mdp.rewards;

  const RStatConfig& config = out.query_config;
  const bool practical = options.practical;

  if (options.reuse == SampleReuse::shared) {
    parallel_for(
        static_cast<std::size_t>(S) * static_cast<std::size_t>(A),
        options.workers, [&](std::size_t pair) {
          const int s = static_cast<int>(pair) / A;
          const int a = static_cast<int>(pair) % A;
          rand::Stream draw_stream = sample_tree.derive(
              {{"sa", static_cast<std::uint64_t>(pair)}});
          const std::vector<std::uint64_t> counts =
              sample_next_state_counts(mdp, s, a, options.m, draw_stream);
          std::vector<double> indicator(static_cast<std::size_t>(S), 0.0);
          for (int sp = 0; sp < S; ++sp) {
            indicator[static_cast<std::size_t>(sp)] = 1.0;
            rand::Stream offset_stream =
                internal_tree.derive({{"sas", entry_index(s, a, sp, A, S)}});
            const RStatResult est = rstat_weighted(
                config, indicator, counts, offset_stream, practical);
            out.p_hat[static_cast<std::size_t>(s)][static_cast<std::size_t>(
                a)][static_cast<std::size_t>(sp)] = est.value;
            out.offsets[static_cast<std::size_t>(s)][static_cast<std::size_t>(
                a)][static_cast<std::size_t>(sp)] = est.offset;
            out.means[static_cast<std::size_t>(s)][static_cast<std::size_t>(
                a)][static_cast<std::size_t>(sp)] = est.empirical_mean;
            indicator[static_cast<std::size_t>(sp)] = 0.0;
          }
        });
  } else {
    parallel_for(
        static_cast<std::size_t>(S) * static_cast<std::size_t>(A) *
            static_cast<std::size_t>(S),
        options.workers, [&](std::size_t flat) {
          const int sp = static_cast<int>(flat % static_cast<std::size_t>(S));
          const std::size_t pair = flat / static_cast<std::size_t>(S);
          const int s = static_cast<int>(pair) / A;
          const int a = static_cast<int>(pair) % A;
          rand::Stream draw_stream = sample_tree.derive(
              {{"sas", static_cast<std::uint64_t>(flat)}});
          const std::vector<std::uint64_t> counts =
              sample_next_state_counts(mdp, s, a, options.m, draw_stream);
          std::vector<double> indicator(static_cast<std::size_t>(S), 0.0);
          indicator[static_cast<std::size_t>(sp)] = 1.0;
          rand::Stream offset_stream = internal_tree.derive(
              {{"sas", static_cast<std::uint64_t>(flat)}});
          const RStatResult est = rstat_weighted(config, indicator, counts,
                                                 offset_stream, practical);
          out.p_hat[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]
                   [static_cast<std::size_t>(sp)] = est.value;
          out.offsets[static_cast<std::size_t>(s)][static_cast<std::size_t>(
              a)][static_cast<std::size_t>(sp)] = est.offset;
          out.means[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]
                   [static_cast<std::size_t>(sp)] = est.empirical_mean;
        });
  }
  return out;
}

TabularMdp to_planning_mdp(const ApproxMdp& approx) {
  TabularMdp mdp;
  mdp.num_states = approx.num_states;
  mdp.num_actions = approx.num_actions;
  mdp.gamma = approx.gamma;
  mdp.r_max = approx.r_max;
  mdp.rewards = approx.r_hat;
  mdp.transitions = approx.p_hat;
  normalize_transition_rows(mdp.transitions);
  mdp.validate();
  return mdp;
}

}  // namespace rrl
