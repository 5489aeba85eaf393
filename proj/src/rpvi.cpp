#include "rrl/rpvi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rrl/parallel.hpp"
#include "rrl/sampling.hpp"

namespace rrl {

PviParams PviParams::derive(const TabularMdp& mdp, double eps, double rho,
                            double delta) {
  mdp.validate();
  PviParams p;
  p.num_states = mdp.num_states;
  p.num_actions = mdp.num_actions;
  p.gamma = mdp.gamma;
  p.r_max = mdp.r_max;
  p.eps = eps;
  p.rho = rho;
  p.delta = delta;
  const double g = 1.0 - mdp.gamma;
  p.horizon = static_cast<int>(std::ceil(std::log(2.0 / (g * g * eps)) / g));
  p.tau = g * eps / 2.0;
  p.tau_norm = p.tau * g / mdp.r_max;
  const double queries = static_cast<double>(p.num_states) * p.num_actions *
                         p.horizon;
  p.rho_sq = rho / queries;
  p.delta_sq = delta / queries;
  p.validate();
  return p;
}

void PviParams::validate() const {
  if (!(eps > 0.0)) throw std::invalid_argument("pvi params: eps must be positive");
  if (!(rho > 0.0 && rho < 1.0)) {
    throw std::invalid_argument("pvi params: rho must lie in (0, 1)");
  }
  if (!(delta > 0.0)) {
    throw std::invalid_argument("pvi params: delta must be positive");
  }
  if (horizon < 1) throw std::invalid_argument("pvi params: horizon must be >= 1");
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("pvi params: tau must lie in (0, 1)");
  }
  if (!(rho_sq > 2.0 * delta_sq)) {
    throw std::invalid_argument(
        "pvi params: per-query budgets need rho_sq > 2*delta_sq "
        "(i.e. rho > 2*delta)");
  }
}

double theoretical_m(const PviParams& params) {
  const double sat = static_cast<double>(params.num_states) *
                     params.num_actions * params.horizon;
  const double spread = params.rho - 2.0 * params.delta;
  return std::ceil(2.0 * sat * sat /
                   (params.tau * params.tau * spread * spread) *
                   std::log(2.0 * sat / params.delta));
}

namespace {

RpviResult run_loop(const TabularMdp& mdp, const PviParams& params,
                    const RpviOptions& options,
                    const rand::StreamTree* internal_tree,
                    const rand::StreamTree& sample_tree) {
  mdp.validate();
  params.validate();
  if (mdp.num_states != params.num_states ||
      mdp.num_actions != params.num_actions || mdp.gamma != params.gamma) {
    throw std::invalid_argument("rpvi: params derived from a different MDP");
  }
  if (options.m == 0) {
    throw std::invalid_argument("rpvi: m must be >= 1");
  }
  const bool replicable = internal_tree != nullptr;

  RpviResult res;
  res.params = params;
  if (replicable) {
    res.query_config =
        options.rho_sq_override > 0.0
            ? RStatConfig::from_statistical_tolerance(
                  params.tau_norm, options.rho_sq_override, params.delta_sq)
            : RStatConfig::from_total_tolerance(params.tau_norm, params.rho_sq,
                                                params.delta_sq);
  }

  const auto ns = static_cast<std::size_t>(mdp.num_states);
  const auto na = static_cast<std::size_t>(mdp.num_actions);
  const std::size_t pairs = ns * na;
  const double scale = mdp.r_max / (1.0 - mdp.gamma);
  const double inv_scale = 1.0 / scale;
  const int workers = resolve_workers(options.workers);

  res.q.assign(ns, std::vector<double>(na, 0.0));
  res.audit.resize(static_cast<std::size_t>(params.horizon) * pairs);

  std::vector<double> phi(ns, 0.0);
  QTable next(ns, std::vector<double>(na, 0.0));

  for (int t = 0; t < params.horizon; ++t) {
    for (std::size_t sp = 0; sp < ns; ++sp) {
      const double v = *std::max_element(res.q[sp].begin(), res.q[sp].end());
      phi[sp] = std::clamp(v * inv_scale, 0.0, 1.0);
    }
    parallel_for(pairs, workers, [&](std::size_t idx) {
      const auto s = static_cast<int>(idx / na);
      const auto a = static_cast<int>(idx % na);
      rand::Stream draws = sample_tree.derive(
          {rand::PathElem("iter", static_cast<std::uint64_t>(t)),
           rand::PathElem("sa", idx)});
      const auto counts =
          sample_next_state_counts(mdp, s, a, options.m, draws);

      QueryAudit& rec = res.audit[static_cast<std::size_t>(t) * pairs + idx];
      rec.iteration = t;
      rec.state = s;
      rec.action = a;
      rec.n = options.m;
      if (replicable) {
        rand::Stream offsets =
            options.offset_mode == OffsetMode::per_iteration
                ? internal_tree->derive(
                      {rand::PathElem("iter", static_cast<std::uint64_t>(t)),
                       rand::PathElem("sa", idx)})
                : internal_tree->derive({rand::PathElem("sa", idx)});
        const RStatResult est = rstat_weighted(res.query_config, phi, counts,
                                               offsets, options.practical);
        rec.offset = est.offset;
        rec.empirical_mean = est.empirical_mean;
        rec.value = est.value;
      } else {
        double sum = 0.0;
        for (std::size_t sp = 0; sp < ns; ++sp) {
          sum += static_cast<double>(counts[sp]) * phi[sp];
        }
        rec.empirical_mean = sum / static_cast<double>(options.m);
        rec.value = rec.empirical_mean;
      }
      rec.q = mdp.rewards[static_cast<std::size_t>(s)]
                         [static_cast<std::size_t>(a)] +
              mdp.gamma * scale * rec.value;
      next[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = rec.q;
    });
    res.q = next;
  }

  res.v.resize(ns);
  for (std::size_t sp = 0; sp < ns; ++sp) {
    res.v[sp] = *std::max_element(res.q[sp].begin(), res.q[sp].end());
  }
  res.policy = greedy_policy(res.q);
  return res;
}

}  // namespace

RpviResult run_rpvi(const TabularMdp& mdp, const PviParams& params,
                    const RpviOptions& options,
                    const rand::StreamTree& internal_tree,
                    const rand::StreamTree& sample_tree) {
  return run_loop(mdp, params, options, &internal_tree, sample_tree);
}

RpviResult run_pvi_baseline(const TabularMdp& mdp, const PviParams& params,
                            const RpviOptions& options,
                            const rand::StreamTree& sample_tree) {
  return run_loop(mdp, params, options, nullptr, sample_tree);
}

}  // namespace rrl
