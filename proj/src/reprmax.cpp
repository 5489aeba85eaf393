#include "rrl/reprmax.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "json.hpp"
#include "rrl/hash.hpp"
#include "rrl/parallel.hpp"

namespace rrl {

namespace {

void check_pair(int s, int a, int num_states, int num_actions,
                const char* who) {
  if (s < 0 || s >= num_states || a < 0 || a >= num_actions) {
    throw std::invalid_argument(std::string(who) +
                                ": state-action pair out of range");
  }
}

std::uint64_t hash_counters(const std::vector<std::vector<double>>& n) {
  ContentHash h;
  h.mix_u64(n.size());
  for (const auto& row : n) h.mix_doubles(row);
  return h.digest();
}

std::uint64_t hash_counters(
    const std::vector<std::vector<std::uint64_t>>& n) {
  ContentHash h;
  h.mix_u64(n.size());
  for (const auto& row : n) {
    h.mix_u64(row.size());
    for (std::uint64_t v : row) h.mix_u64(v);
  }
  return h.digest();
}

}  // namespace

RMaxModel RMaxModel::optimistic(int num_states, int num_actions,
                                double r_max) {
  if (num_states < 1 || num_actions < 1) {
    throw std::invalid_argument("model: needs at least one state and action");
  }
  if (!(r_max > 0.0)) {
    throw std::invalid_argument("model: r_max must be positive");
  }
  RMaxModel m;
  m.num_states = num_states;
  m.num_actions = num_actions;
  m.r_max = r_max;
  m.p_hat.assign(
      static_cast<std::size_t>(num_states),
      std::vector<std::vector<double>>(
          static_cast<std::size_t>(num_actions),
          std::vector<double>(static_cast<std::size_t>(num_states), 0.0)));
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      m.p_hat[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]
             [static_cast<std::size_t>(s)] = 1.0;
    }
  }
  m.r_hat.assign(static_cast<std::size_t>(num_states),
                 std::vector<double>(static_cast<std::size_t>(num_actions),
                                     r_max));
  m.known.assign(static_cast<std::size_t>(num_states),
                 std::vector<std::uint8_t>(
                     static_cast<std::size_t>(num_actions), 0));
  return m;
}

bool RMaxModel::is_known(int s, int a) const {
  check_pair(s, a, num_states, num_actions, "model");
  return known[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] != 0;
}

bool RMaxModel::all_known() const {
  for (const auto& row : known) {
    for (std::uint8_t f : row) {
      if (!f) return false;
    }
  }
  return true;
}

std::uint64_t hash_model(const RMaxModel& model) {
  ContentHash h;
  h.mix_u64(static_cast<std::uint64_t>(model.num_states));
  h.mix_u64(static_cast<std::uint64_t>(model.num_actions));
  h.mix_double(model.r_max);
  for (const auto& mat : model.p_hat) {
    for (const auto& row : mat) h.mix_doubles(row);
  }
  for (const auto& row : model.r_hat) h.mix_doubles(row);
  for (const auto& row : model.known) {
    for (std::uint8_t f : row) h.mix_u64(f);
  }
  return h.digest();
}

KnownSet::KnownSet(int num_states, int num_actions, double k, double w)
    : k(k), w(w) {
  if (num_states < 1 || num_actions < 1) {
    throw std::invalid_argument(
        "known set: needs at least one state and action");
  }
  if (!(k > 0.0) || !(w >= 0.0)) {
    throw std::invalid_argument(
        "known set: need threshold floor k > 0 and window w >= 0");
  }
  n.assign(static_cast<std::size_t>(num_states),
           std::vector<double>(static_cast<std::size_t>(num_actions), 0.0));
  known.assign(static_cast<std::size_t>(num_states),
               std::vector<std::uint8_t>(
                   static_cast<std::size_t>(num_actions), 0));
}

bool KnownSet::is_known(int s, int a) const {
  check_pair(s, a, static_cast<int>(n.size()),
             static_cast<int>(n.empty() ? 0 : n[0].size()), "known set");
  return known[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] != 0;
}

bool KnownSet::all_known() const {
  for (const auto& row : known) {
    for (std::uint8_t f : row) {
      if (!f) return false;
    }
  }
  return true;
}

int KnownSet::known_count() const {
  int c = 0;
  for (const auto& row : known) {
    for (std::uint8_t f : row) c += f ? 1 : 0;
  }
  return c;
}

RMaxParams RMaxParams::derive(const TabularMdp& mdp, double epsilon,
                              double rho, double delta, int horizon) {
  mdp.validate();
  RMaxParams p;
  p.num_states = mdp.num_states;
  p.num_actions = mdp.num_actions;
  p.gamma = mdp.gamma;
  p.r_max = mdp.r_max;
  p.epsilon = epsilon;
  p.rho = rho;
  p.delta = delta;
  p.horizon = horizon;

  const double S = mdp.num_states;
  const double A = mdp.num_actions;
  const double H = horizon;
  if (horizon >= 1 && epsilon > 0.0 && delta > 0.0 && delta < 1.0) {
    p.rounds = static_cast<std::int64_t>(
        std::ceil(H * S * A / epsilon +
                  H * H * std::log(1.0 / delta) / (epsilon * epsilon)));
    const double t = static_cast<double>(p.rounds);
    p.theoretical_m =
        std::ceil(S * S * A * A * t * t * t * t * std::log(1.0 / rho) /
                  (rho * rho));
    p.rho_k = rho / (t * S * A);
    p.t_gap = H * rho / (S * A * t * t);
  }
  p.k = H;
  p.w = p.k;
  p.rho_sq = rho / (S * S * A);
  p.tau_sq = epsilon * (1.0 - mdp.gamma) * (1.0 - mdp.gamma) / S;
  p.delta_sq = delta / (S * S * A);
  p.validate();
  return p;
}

void RMaxParams::validate() const {
  if (num_states < 1 || num_actions < 1) {
    throw std::invalid_argument("rmax params: empty state or action space");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("rmax params: gamma must lie in (0, 1)");
  }
  if (!(r_max > 0.0)) {
    throw std::invalid_argument("rmax params: r_max must be positive");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("rmax params: epsilon must lie in (0, 1)");
  }
  if (!(rho > 0.0 && rho < 1.0)) {
    throw std::invalid_argument("rmax params: rho must lie in (0, 1)");
  }
  if (!(delta > 0.0 && delta < rho / 4.0)) {
    throw std::invalid_argument("rmax params: need 0 < delta < rho/4");
  }
  if (horizon < 1) {
    throw std::invalid_argument("rmax params: horizon must be >= 1");
  }
  if (rounds < 0) {
    throw std::invalid_argument("rmax params: rounds must be >= 0");
  }
  if (!(k > 0.0) || !(w >= 0.0)) {
    throw std::invalid_argument("rmax params: need k > 0 and w >= 0");
  }
  if (!(tau_sq > 0.0 && tau_sq < 1.0)) {
    throw std::invalid_argument("rmax params: tau_sq must lie in (0, 1)");
  }
  if (!(rho_sq > 2.0 * delta_sq)) {
    throw std::invalid_argument("rmax params: need rho_sq > 2*delta_sq");
  }
}

bool RMaxParams::convergence_precondition_holds() const {
  const double lhs = 1.0 - gamma;
  const double rhs = std::sqrt(epsilon) *
                     std::pow(std::log(1.0 / delta), 0.25) /
                     (static_cast<double>(horizon) * num_actions *
                      std::pow(std::log(1.0 / rho), 0.25));
  return lhs > rhs;
}

TransitionCounts::TransitionCounts(int num_states, int num_actions) {
  if (num_states < 1 || num_actions < 1) {
    throw std::invalid_argument("counts: needs at least one state and action");
  }
  counts.assign(
      static_cast<std::size_t>(num_states),
      std::vector<std::vector<std::uint64_t>>(
          static_cast<std::size_t>(num_actions),
          std::vector<std::uint64_t>(static_cast<std::size_t>(num_states),
                                     0)));
}

void TransitionCounts::add(const Episode& episode) {
  const int S = static_cast<int>(counts.size());
  const int A = static_cast<int>(counts[0].size());
  if (episode.states.size() != episode.actions.size() + 1) {
    throw std::invalid_argument("counts: malformed episode");
  }
  for (std::size_t h = 0; h < episode.actions.size(); ++h) {
    const int s = episode.states[h];
    const int a = episode.actions[h];
    const int sp = episode.states[h + 1];
    check_pair(s, a, S, A, "counts");
    if (sp < 0 || sp >= S) {
      throw std::invalid_argument("counts: next state out of range");
    }
    ++counts[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]
            [static_cast<std::size_t>(sp)];
  }
}

std::uint64_t TransitionCounts::total(int s, int a) const {
  check_pair(s, a, static_cast<int>(counts.size()),
             static_cast<int>(counts[0].size()), "counts");
  std::uint64_t sum = 0;
  for (std::uint64_t c :
       counts[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]) {
    sum += c;
  }
  return sum;
}

std::vector<std::pair<int, int>> apply_threshold(KnownSet& ks,
                                                 double k_prime) {
  std::vector<std::pair<int, int>> newly;
  for (std::size_t s = 0; s < ks.n.size(); ++s) {
    for (std::size_t a = 0; a < ks.n[s].size(); ++a) {
      if (!ks.known[s][a] && ks.n[s][a] >= k_prime) {
        ks.known[s][a] = 1;
        newly.emplace_back(static_cast<int>(s), static_cast<int>(a));
      }
    }
  }
  return newly;
}

ThresholdUpdate rep_update_k(const std::vector<Episode>& episodes,
                             int horizon, KnownSet& ks,
                             rand::Stream& threshold_stream) {
  if (episodes.empty()) {
    throw std::invalid_argument("rep_update_k: needs at least one episode");
  }
  const int S = static_cast<int>(ks.n.size());
  const int A = static_cast<int>(ks.n[0].size());
  for (const Episode& e : episodes) {
    if (static_cast<int>(e.actions.size()) != horizon ||
        e.states.size() != e.actions.size() + 1) {
      throw std::invalid_argument(
          "rep_update_k: every episode must have exactly `horizon` steps");
    }
  }

  ThresholdUpdate upd;
  upd.k_prime = ks.k + ks.w * threshold_stream.uniform01();

  std::vector<std::vector<double>> visits(
      static_cast<std::size_t>(S),
      std::vector<double>(static_cast<std::size_t>(A), 0.0));
  for (const Episode& e : episodes) {
    for (std::size_t h = 0; h < e.actions.size(); ++h) {
      check_pair(e.states[h], e.actions[h], S, A, "rep_update_k");
      visits[static_cast<std::size_t>(e.states[h])]
            [static_cast<std::size_t>(e.actions[h])] += 1.0;
    }
  }
  const double inv = 1.0 / static_cast<double>(episodes.size());
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      ks.n[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] +=
          visits[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] *
          inv;
    }
  }

  ks.k_prime_history.push_back(upd.k_prime);
  upd.newly_known = apply_threshold(ks, upd.k_prime);
  return upd;
}

void update_model(RMaxModel& model,
                  const std::vector<std::pair<int, int>>& newly_known,
                  const TransitionCounts& pooled, const TabularMdp& mdp,
                  const RStatConfig& config, const rand::StreamTree& internal,
                  int round, bool practical) {
  const int S = model.num_states;
  const int A = model.num_actions;
  if (mdp.num_states != S || mdp.num_actions != A) {
    throw std::invalid_argument("update_model: MDP and model shapes differ");
  }
  std::vector<double> indicator(static_cast<std::size_t>(S), 0.0);
  for (const auto& [s, a] : newly_known) {
    check_pair(s, a, S, A, "update_model");
    if (model.is_known(s, a)) {
      throw std::invalid_argument(
          "update_model: pair already known; known rows never change");
    }
    const auto& row =
        pooled.counts[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
    if (pooled.total(s, a) == 0) {
      throw std::invalid_argument(
          "update_model: no pooled samples for a newly known pair");
    }
    for (int sp = 0; sp < S; ++sp) {
      indicator[static_cast<std::size_t>(sp)] = 1.0;
      const std::uint64_t idx =
          (static_cast<std::uint64_t>(s) * static_cast<std::uint64_t>(A) +
           static_cast<std::uint64_t>(a)) *
              static_cast<std::uint64_t>(S) +
          static_cast<std::uint64_t>(sp);
      rand::Stream offsets = internal.derive(
          {rand::PathElem("known-round", static_cast<std::uint64_t>(round)),
           rand::PathElem("sas", idx)});
      const RStatResult est =
          rstat_weighted(config, indicator, row, offsets, practical);
      model.p_hat[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]
                 [static_cast<std::size_t>(sp)] = est.value;
      indicator[static_cast<std::size_t>(sp)] = 0.0;
    }
    model.r_hat[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] =
        mdp.rewards[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
    model.known[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = 1;
  }
}

TabularMdp to_planning_mdp(const RMaxModel& model, double gamma) {
  TabularMdp mdp;
  mdp.num_states = model.num_states;
  mdp.num_actions = model.num_actions;
  mdp.gamma = gamma;
  mdp.r_max = model.r_max;
  mdp.rewards = model.r_hat;
  mdp.transitions = model.p_hat;
  normalize_transition_rows(mdp.transitions);
  mdp.validate();
  return mdp;
}

Policy plan(const RMaxModel& model, double gamma, double tol) {
  return greedy_policy(exact_q_values(to_planning_mdp(model, gamma), tol).q);
}

std::string audit_to_jsonl(const std::vector<RoundAudit>& audit) {
  std::string out;
  for (const RoundAudit& rec : audit) {
    nlohmann::ordered_json j;
    j["round"] = rec.round;
    j["k_prime"] = rec.k_prime;
    auto pairs = nlohmann::ordered_json::array();
    for (const auto& [s, a] : rec.newly_known) {
      pairs.push_back(nlohmann::ordered_json::array({s, a}));
    }
    j["newly_known"] = pairs;
    j["n_counts_digest"] = hex64(rec.n_counts_digest);
    j["model_hash"] = hex64(rec.model_hash);
    j["policy_hash"] = hex64(rec.policy_hash);
    out += j.dump();
    out += '\n';
  }
  return out;
}

RMaxResult run_reprmax(const TabularMdp& mdp, const RMaxParams& params,
                       const rand::StreamTree& internal,
                       const rand::StreamTree& sample, int workers) {
  mdp.validate();
  params.validate();
  if (mdp.num_states != params.num_states ||
      mdp.num_actions != params.num_actions || mdp.gamma != params.gamma) {
    throw std::invalid_argument(
        "run_reprmax: params derived from a different MDP");
  }
  if (params.m == 0) {
    throw std::invalid_argument(
        "run_reprmax: set m explicitly (the analysis-grade trajectory count "
        "is impractically large)");
  }
  if (!params.convergence_precondition_holds()) {
    std::cerr << "warning: discount/horizon precondition violated; the "
                 "convergence guarantee does not apply at these parameters\n";
  }

  RMaxResult res;
  res.query_config = RStatConfig::from_total_tolerance(
      params.tau_sq, params.rho_sq, params.delta_sq);
  res.model =
      RMaxModel::optimistic(params.num_states, params.num_actions,
                            params.r_max);
  res.counters = KnownSet(params.num_states, params.num_actions, params.k,
                          params.w);
  TransitionCounts pooled(params.num_states, params.num_actions);

  rand::Stream init = internal.derive({rand::PathElem("init-policy", 0)});
  res.policy.resize(static_cast<std::size_t>(params.num_states));
  for (int s = 0; s < params.num_states; ++s) {
    res.policy[static_cast<std::size_t>(s)] =
        static_cast<int>(init.uniform_int(
            static_cast<std::uint64_t>(params.num_actions)));
  }

  const int nworkers = resolve_workers(workers);
  std::vector<Episode> episodes(params.m);
  for (std::int64_t i = 0; i < params.rounds; ++i) {
    if (res.counters.all_known()) break;

    parallel_for(params.m, nworkers, [&](std::size_t j) {
      rand::Stream stream = sample.derive(
          {rand::PathElem("round", static_cast<std::uint64_t>(i)),
           rand::PathElem("episode", static_cast<std::uint64_t>(j))});
      episodes[j] = sample_episode(mdp, res.policy, params.horizon, stream);
    });
    for (const Episode& e : episodes) pooled.add(e);

    rand::Stream thr = internal.derive(
        {rand::PathElem("round", static_cast<std::uint64_t>(i)),
         rand::PathElem("kprime", 0)});
    const ThresholdUpdate upd =
        rep_update_k(episodes, params.horizon, res.counters, thr);

    update_model(res.model, upd.newly_known, pooled, mdp, res.query_config,
                 internal, static_cast<int>(i), params.practical);
    res.policy = plan(res.model, params.gamma);

    RoundAudit rec;
    rec.round = static_cast<int>(i);
    rec.k_prime = upd.k_prime;
    rec.newly_known = upd.newly_known;
    rec.n_counts_digest = hash_counters(res.counters.n);
    rec.model_hash = hash_model(res.model);
    rec.policy_hash = hash_policy(res.policy);
    res.audit.push_back(std::move(rec));
    ++res.rounds_run;
  }
  return res;
}

BaselineResult run_rmax_baseline(const TabularMdp& mdp, double epsilon,
                                 double delta, int horizon, std::uint64_t m,
                                 std::uint64_t threshold,
                                 const rand::StreamTree& sample,
                                 int workers) {
  mdp.validate();
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("baseline: epsilon must lie in (0, 1)");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("baseline: delta must lie in (0, 1)");
  }
  if (horizon < 1) throw std::invalid_argument("baseline: horizon must be >= 1");
  if (m == 0) throw std::invalid_argument("baseline: m must be >= 1");
  if (threshold == 0) {
    throw std::invalid_argument("baseline: threshold must be >= 1");
  }

  const double S = mdp.num_states;
  const double A = mdp.num_actions;
  const double H = horizon;
  const auto rounds = static_cast<std::int64_t>(
      std::ceil(H * S * A / epsilon +
                H * H * std::log(1.0 / delta) / (epsilon * epsilon)));

  BaselineResult res;
  res.model =
      RMaxModel::optimistic(mdp.num_states, mdp.num_actions, mdp.r_max);
  res.policy = plan(res.model, mdp.gamma);
  TransitionCounts pooled(mdp.num_states, mdp.num_actions);
  std::vector<std::vector<std::uint64_t>> visits(
      static_cast<std::size_t>(mdp.num_states),
      std::vector<std::uint64_t>(static_cast<std::size_t>(mdp.num_actions),
                                 0));

  const int nworkers = resolve_workers(workers);
  std::vector<Episode> episodes(m);
  for (std::int64_t i = 0; i < rounds; ++i) {
    if (res.model.all_known()) break;

    parallel_for(m, nworkers, [&](std::size_t j) {
      rand::Stream stream = sample.derive(
          {rand::PathElem("round", static_cast<std::uint64_t>(i)),
           rand::PathElem("episode", static_cast<std::uint64_t>(j))});
      episodes[j] = sample_episode(mdp, res.policy, horizon, stream);
    });

    RoundAudit rec;
    rec.round = static_cast<int>(i);
    rec.k_prime = static_cast<double>(threshold);
    for (const Episode& e : episodes) {
      pooled.add(e);
      for (std::size_t h = 0; h < e.actions.size(); ++h) {
        ++visits[static_cast<std::size_t>(e.states[h])]
                [static_cast<std::size_t>(e.actions[h])];
      }
    }
    for (int s = 0; s < mdp.num_states; ++s) {
      for (int a = 0; a < mdp.num_actions; ++a) {
        if (res.model.is_known(s, a)) continue;
        if (visits[static_cast<std::size_t>(s)]
                  [static_cast<std::size_t>(a)] < threshold) {
          continue;
        }
        const double total = static_cast<double>(pooled.total(s, a));
        for (int sp = 0; sp < mdp.num_states; ++sp) {
          res.model.p_hat[static_cast<std::size_t>(s)]
                         [static_cast<std::size_t>(a)]
                         [static_cast<std::size_t>(sp)] =
              static_cast<double>(
                  pooled.counts[static_cast<std::size_t>(s)]
                               [static_cast<std::size_t>(a)]
                               [static_cast<std::size_t>(sp)]) /
              total;
        }
        res.model.r_hat[static_cast<std::size_t>(s)]
                       [static_cast<std::size_t>(a)] =
            mdp.rewards[static_cast<std::size_t>(s)]
                       [static_cast<std::size_t>(a)];
        res.model.known[static_cast<std::size_t>(s)]
                       [static_cast<std::size_t>(a)] = 1;
        rec.newly_known.emplace_back(s, a);
      }
    }
    res.policy = plan(res.model, mdp.gamma);

    rec.n_counts_digest = hash_counters(visits);
    rec.model_hash = hash_model(res.model);
    rec.policy_hash = hash_policy(res.policy);
    res.audit.push_back(std::move(rec));
    ++res.rounds_run;
  }
  return res;
}

}  // namespace rrl
