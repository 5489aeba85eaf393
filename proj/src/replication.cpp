#include "rrl/replication.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

#include "rrl/hash.hpp"
#include "rrl/parallel.hpp"
#include "rrl/reprmax.hpp"
#include "rrl/serialize.hpp"

namespace rrl {

namespace {

std::string fmt_double(double v) { return nlohmann::json(v).dump(); }

std::uint64_t hash_tensor(
    const std::vector<std::vector<std::vector<double>>>& t) {
  ContentHash h;
  h.mix_u64(t.size());
  for (const auto& plane : t) {
    h.mix_u64(plane.size());
    for (const auto& row : plane) h.mix_doubles(row);
  }
  return h.digest();
}

std::uint64_t hash_query_audit(const std::vector<QueryAudit>& audit) {
  ContentHash h;
  h.mix_u64(audit.size());
  for (const QueryAudit& rec : audit) {
    h.mix_u64(static_cast<std::uint64_t>(rec.iteration));
    h.mix_u64(static_cast<std::uint64_t>(rec.state));
    h.mix_u64(static_cast<std::uint64_t>(rec.action));
    h.mix_u64(rec.n);
    h.mix_double(rec.offset);
    h.mix_double(rec.empirical_mean);
    h.mix_double(rec.value);
    h.mix_double(rec.q);
  }
  return h.digest();
}

std::uint64_t hash_round_audit(const std::vector<RoundAudit>& audit) {
  ContentHash h;
  h.mix_string(audit_to_jsonl(audit));
  return h.digest();
}

std::uint64_t resolve_m(const RunParams& params, double derived,
                        const std::string& what) {
  const double base =
      params.m > 0 ? static_cast<double>(params.m) : derived;
  if (!(base >= 1.0)) {
    throw std::invalid_argument(
        what + ": no usable sample size; pass m explicitly");
  }
  if (!(params.m_multiplier > 0.0)) {
    throw std::invalid_argument(what + ": m multiplier must be positive");
  }
  const double total = std::floor(base * params.m_multiplier + 0.5);
  if (!(total >= 1.0) || total > 9e18) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", total);
    throw std::invalid_argument(what + ": resolved sample size " + buf +
                                " is outside the runnable range");
  }
  return static_cast<std::uint64_t>(total);
}

double oracle_gap(const TabularMdp& mdp, const Policy& policy) {
  const Policy best = greedy_policy(exact_q_values(mdp).q);
  return policy_return(mdp, best) - policy_return(mdp, policy);
}

nlohmann::ordered_json params_json(const RunParams& p,
                                   std::uint64_t resolved_m) {
  nlohmann::ordered_json j;
  j["eps"] = p.eps;
  j["rho"] = p.rho;
  j["delta"] = p.delta;
  j["horizon"] = p.horizon;
  j["m"] = resolved_m;
  j["m_multiplier"] = p.m_multiplier;
  j["rho_sq_override"] = p.rho_sq_override;
  j["practical"] = p.practical;
  j["offset_mode"] = p.offset_mode == OffsetMode::per_iteration
                         ? "per_iteration"
                         : "per_pair";
  j["baseline_threshold"] = p.baseline_threshold;
  j["sample_reuse"] =
      p.reuse == SampleReuse::shared ? "shared" : "per_entry";
  return j;
}

EqualityStats stats_from(const std::vector<std::uint64_t>& hashes) {
  std::map<std::uint64_t, int> classes;
  for (std::uint64_t h : hashes) ++classes[h];
  const double n = static_cast<double>(hashes.size());
  int largest = 0;
  double equal_pairs = 0.0;
  for (const auto& [h, count] : classes) {
    largest = std::max(largest, count);
    equal_pairs += static_cast<double>(count) * (count - 1) / 2.0;
  }
  const double total_pairs = n * (n - 1.0) / 2.0;
  EqualityStats s;
  s.pairwise_rate = total_pairs > 0.0 ? equal_pairs / total_pairs : 1.0;
  s.largest_identical_frac = largest / n;
  s.unique_frac = static_cast<double>(classes.size()) / n;
  return s;
}

}  // namespace

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "rpvi") return Algorithm::rpvi;
  if (name == "pvi_baseline") return Algorithm::pvi_baseline;
  if (name == "reprmax") return Algorithm::reprmax;
  if (name == "rmax_baseline") return Algorithm::rmax_baseline;
  if (name == "approx_mdp") return Algorithm::approx_mdp;
  throw std::invalid_argument(
      "unknown algorithm \"" + name +
      "\" (expected rpvi, pvi_baseline, reprmax, rmax_baseline, or "
      "approx_mdp)");
}

std::string algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::rpvi: return "rpvi";
    case Algorithm::pvi_baseline: return "pvi_baseline";
    case Algorithm::reprmax: return "reprmax";
    case Algorithm::rmax_baseline: return "rmax_baseline";
    case Algorithm::approx_mdp: return "approx_mdp";
  }
  throw std::invalid_argument("unknown algorithm enum value");
}

RunOutput run_one(Algorithm algorithm, const TabularMdp& mdp,
                  const RunParams& params, std::uint64_t internal_seed,
                  std::uint64_t sample_seed, int workers, bool timed) {
  mdp.validate();
  if (params.rho_sq_override > 0.0 && algorithm != Algorithm::rpvi) {
    throw std::invalid_argument(
        "the per-query budget override applies to rpvi only");
  }
  const auto start = std::chrono::steady_clock::now();
  const rand::StreamTree internal(internal_seed, "internal");
  const rand::StreamTree sample(sample_seed, "sample");

  RunOutput out;
  nlohmann::ordered_json derived;
  nlohmann::ordered_json outputs;
  std::uint64_t resolved = 0;

  switch (algorithm) {
    case Algorithm::rpvi:
    case Algorithm::pvi_baseline: {
      const PviParams p =
          PviParams::derive(mdp, params.eps, params.rho, params.delta);
      resolved = resolve_m(params, theoretical_m(p), "phased value iteration");
      RpviOptions opt;
      opt.m = resolved;
      opt.practical = params.practical;
      opt.offset_mode = params.offset_mode;
      opt.rho_sq_override = params.rho_sq_override;
      opt.workers = workers;
      const RpviResult res =
          algorithm == Algorithm::rpvi
              ? run_rpvi(mdp, p, opt, internal, sample)
              : run_pvi_baseline(mdp, p, opt, sample);
      out.value_hash = hash_qtable(res.q);
      out.policy = res.policy;
      out.model_hash = out.value_hash;  // no separate model output
      out.audit_hash = hash_query_audit(res.audit);
      derived["horizon"] = p.horizon;
      derived["tau"] = p.tau;
      derived["tau_norm"] = p.tau_norm;
      derived["rho_sq"] = res.query_config.rho;
      derived["delta_sq"] = p.delta_sq;
      derived["alpha"] = res.query_config.alpha;
      derived["required_n"] = res.query_config.required_n_real();
      derived["theoretical_m"] = theoretical_m(p);
      outputs["q"] = res.q;
      outputs["v"] = res.v;
      break;
    }
    case Algorithm::reprmax: {
      RMaxParams p = RMaxParams::derive(mdp, params.eps, params.rho,
                                        params.delta, params.horizon);
      p.m = resolve_m(params, 0.0, "episodic r-max");
      p.practical = params.practical;
      resolved = p.m;
      const RMaxResult res = run_reprmax(mdp, p, internal, sample, workers);
      out.model_hash = hash_model(res.model);
      const TabularMdp view = to_planning_mdp(res.model, mdp.gamma);
      out.value_hash = hash_qtable(exact_q_values(view).q);
      out.policy = res.policy;
      out.audit_hash = hash_round_audit(res.audit);
      derived["rounds"] = p.rounds;
      derived["theoretical_m"] = p.theoretical_m;
      derived["k"] = p.k;
      derived["w"] = p.w;
      derived["rho_k"] = p.rho_k;
      derived["rho_sq"] = p.rho_sq;
      derived["tau_sq"] = p.tau_sq;
      derived["delta_sq"] = p.delta_sq;
      derived["t_gap"] = p.t_gap;
      outputs["model"] = {{"p_hat", res.model.p_hat},
                          {"r_hat", res.model.r_hat},
                          {"known", res.model.known}};
      outputs["rounds_run"] = res.rounds_run;
      outputs["known_count"] = res.counters.known_count();
      break;
    }
    case Algorithm::rmax_baseline: {
      const std::uint64_t m = resolve_m(params, 0.0, "r-max baseline");
      resolved = m;
      if (params.baseline_threshold < 1) {
        throw std::invalid_argument(
            "r-max baseline: promotion threshold must be at least 1");
      }
      const BaselineResult res = run_rmax_baseline(
          mdp, params.eps, params.delta, params.horizon, m,
          params.baseline_threshold, sample, workers);
      out.model_hash = hash_model(res.model);
      const TabularMdp view = to_planning_mdp(res.model, mdp.gamma);
      out.value_hash = hash_qtable(exact_q_values(view).q);
      out.policy = res.policy;
      out.audit_hash = hash_round_audit(res.audit);
      outputs["model"] = {{"p_hat", res.model.p_hat},
                          {"r_hat", res.model.r_hat},
                          {"known", res.model.known}};
      outputs["rounds_run"] = res.rounds_run;
      break;
    }
    case Algorithm::approx_mdp: {
      const RStatConfig config = approx_mdp_query_config(
          mdp.num_states, mdp.num_actions, params.eps, params.rho,
          params.delta);
      resolved =
          resolve_m(params, config.required_n_real(), "model estimation");
      ApproxMdpOptions opt;
      opt.m = resolved;
      opt.practical = params.practical;
      opt.reuse = params.reuse;
      opt.workers = workers;
      const ApproxMdp est =
          approximate_mdp(mdp, params.eps, params.rho, params.delta, opt,
                          internal, sample);
      out.model_hash = hash_tensor(est.p_hat);
      const TabularMdp view = to_planning_mdp(est);
      out.value_hash = hash_qtable(exact_q_values(view).q);
      out.policy = greedy_policy(exact_q_values(view).q);
      ContentHash audit;
      audit.mix_u64(hash_tensor(est.offsets));
      audit.mix_u64(hash_tensor(est.means));
      out.audit_hash = audit.digest();
      derived["rho_sq"] = est.rho_sq;
      derived["delta_sq"] = est.delta_sq;
      derived["alpha"] = est.query_config.alpha;
      derived["tau_prime"] = est.query_config.tau_prime;
      derived["required_n"] = est.query_config.required_n_real();
      derived["theoretical_m_total"] =
          theoretical_m_mdp(mdp.num_states, mdp.num_actions, mdp.gamma,
                            params.eps, params.rho, params.delta);
      outputs["model"] = approx_mdp_to_json(est);
      break;
    }
  }

  out.policy_hash = hash_policy(out.policy);
  out.eps_gap = oracle_gap(mdp, out.policy);

  nlohmann::ordered_json result;
  result["algorithm"] = algorithm_name(algorithm);
  result["internal_seed"] = internal_seed;
  result["sample_seed"] = sample_seed;
  result["mdp_hash"] = hex64(hash_json(mdp_to_json(mdp)));
  result["params"] = params_json(params, resolved);
  result["derived"] = derived;
  outputs["policy"] = out.policy;
  outputs["policy_hash"] = hex64(out.policy_hash);
  outputs["value_hash"] = hex64(out.value_hash);
  outputs["model_hash"] = hex64(out.model_hash);
  outputs["audit_digest"] = hex64(out.audit_hash);
  outputs["eps_gap"] = out.eps_gap;
  result["outputs"] = outputs;
  if (timed) {
    const std::chrono::duration<double> secs =
        std::chrono::steady_clock::now() - start;
    result["wallclock_s"] = secs.count();
  } else {
    result["wallclock_s"] = "na";
  }
  out.result = result;
  return out;
}

ReplicationReport run_cohort(const PairedRunSpec& spec) {
  if (spec.sample_seeds.size() < 2) {
    throw std::invalid_argument("a cohort needs at least two sample seeds");
  }
  spec.mdp.validate();

  ReplicationReport rep;
  rep.algorithm = algorithm_name(spec.algorithm);
  rep.internal_seed = spec.internal_seed;
  rep.sample_seeds = spec.sample_seeds;
  rep.mdp_hash = hash_json(mdp_to_json(spec.mdp));
  const std::size_t n = spec.sample_seeds.size();
  rep.runs.resize(n);

  parallel_for(n, spec.workers, [&](std::size_t i) {
    const std::uint64_t seed = spec.sample_seeds[i];
    try {
      rep.runs[i] = run_one(spec.algorithm, spec.mdp, spec.params,
                            spec.internal_seed, seed, 1);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("cohort run failed (sample seed " +
                                  std::to_string(seed) + "): " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error("cohort run failed (sample seed " +
                               std::to_string(seed) + "): " + e.what());
    }
  });

  rep.params = rep.runs[0].result.at("params");
  std::vector<std::uint64_t> value_hashes(n), policy_hashes(n),
      model_hashes(n);
  double gap_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    value_hashes[i] = rep.runs[i].value_hash;
    policy_hashes[i] = rep.runs[i].policy_hash;
    model_hashes[i] = rep.runs[i].model_hash;
    gap_sum += rep.runs[i].eps_gap;
    rep.max_eps_gap = std::max(rep.max_eps_gap, rep.runs[i].eps_gap);
  }
  rep.value = stats_from(value_hashes);
  rep.policy = stats_from(policy_hashes);
  rep.model = stats_from(model_hashes);
  rep.mean_eps_gap = gap_sum / static_cast<double>(n);
  rep.agreement.assign(n, std::vector<int>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      rep.agreement[i][j] = value_hashes[i] == value_hashes[j] ? 1 : 0;
    }
  }
  return rep;
}

nlohmann::ordered_json report_to_json(const ReplicationReport& rep) {
  nlohmann::ordered_json j;
  j["algorithm"] = rep.algorithm;
  j["internal_seed"] = rep.internal_seed;
  j["sample_seeds"] = rep.sample_seeds;
  j["mdp_hash"] = hex64(rep.mdp_hash);
  j["params"] = rep.params;
  j["num_runs"] = rep.runs.size();
  auto stats = [](const EqualityStats& s) {
    nlohmann::ordered_json e;
    e["pairwise_rate"] = s.pairwise_rate;
    e["largest_identical_frac"] = s.largest_identical_frac;
    e["unique_frac"] = s.unique_frac;
    return e;
  };
  j["value"] = stats(rep.value);
  j["policy"] = stats(rep.policy);
  j["model"] = stats(rep.model);
  j["mean_eps_gap"] = rep.mean_eps_gap;
  j["max_eps_gap"] = rep.max_eps_gap;
  j["agreement"] = rep.agreement;
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    nlohmann::ordered_json r;
    r["sample_seed"] = rep.sample_seeds[i];
    r["value_hash"] = hex64(rep.runs[i].value_hash);
    r["policy_hash"] = hex64(rep.runs[i].policy_hash);
    r["model_hash"] = hex64(rep.runs[i].model_hash);
    r["audit_digest"] = hex64(rep.runs[i].audit_hash);
    r["eps_gap"] = rep.runs[i].eps_gap;
    runs.push_back(r);
  }
  j["runs"] = runs;
  return j;
}

namespace {

double derived_rho_sq(Algorithm algorithm, const TabularMdp& mdp,
                      const RunParams& p) {
  switch (algorithm) {
    case Algorithm::rpvi:
    case Algorithm::pvi_baseline:
      return PviParams::derive(mdp, p.eps, p.rho, p.delta).rho_sq;
    case Algorithm::reprmax:
    case Algorithm::rmax_baseline:
      return RMaxParams::derive(mdp, p.eps, p.rho, p.delta, p.horizon).rho_sq;
    case Algorithm::approx_mdp:
      return p.rho / (static_cast<double>(mdp.num_states) * mdp.num_states *
                      mdp.num_actions);
  }
  return 0.0;
}

}  // namespace

void sweep(const SweepSpec& spec, std::ostream& out,
           std::vector<SweepRow>* rows) {
  if (spec.num_runs < 2) {
    throw std::invalid_argument("sweep needs at least two runs per cell");
  }
  out << "algorithm,m_multiplier,rho_sq,internal_seed,largest_identical_frac,"
         "unique_frac,mean_eps_gap,wallclock_s\n";
  out.flush();

  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(spec.num_runs));
  for (std::size_t j = 0; j < seeds.size(); ++j) {
    seeds[j] = spec.sample_seed_base + j;
  }

  for (double rho_sq : spec.rho_sq_values) {
    for (double mult : spec.multipliers) {
      PairedRunSpec cell;
      cell.algorithm = spec.algorithm;
      cell.mdp = spec.mdp;
      cell.params = spec.base_params;
      cell.params.m_multiplier = spec.base_params.m_multiplier * mult;
      if (rho_sq > 0.0) cell.params.rho_sq_override = rho_sq;
      cell.internal_seed = spec.internal_seed;
      cell.sample_seeds = seeds;
      cell.workers = spec.workers;

      const auto start = std::chrono::steady_clock::now();
      const ReplicationReport rep = run_cohort(cell);
      const std::chrono::duration<double> secs =
          std::chrono::steady_clock::now() - start;

      SweepRow row;
      row.algorithm = rep.algorithm;
      row.m_multiplier = mult;
      row.rho_sq = rho_sq > 0.0
                       ? rho_sq
                       : derived_rho_sq(spec.algorithm, spec.mdp,
                                        spec.base_params);
      row.internal_seed = spec.internal_seed;
      row.largest_identical_frac = rep.value.largest_identical_frac;
      row.unique_frac = rep.value.unique_frac;
      row.mean_eps_gap = rep.mean_eps_gap;
      if (spec.timings) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", secs.count());
        row.wallclock_s = buf;
      }
      out << row.algorithm << ',' << fmt_double(row.m_multiplier) << ','
          << fmt_double(row.rho_sq) << ',' << row.internal_seed << ','
          << fmt_double(row.largest_identical_frac) << ','
          << fmt_double(row.unique_frac) << ','
          << fmt_double(row.mean_eps_gap) << ',' << row.wallclock_s << '\n';
      out.flush();
      if (rows != nullptr) rows->push_back(row);
    }
  }
}

std::string sweep_svg(const std::vector<SweepRow>& rows) {
  // Categorical x axis over the distinct multipliers in appearance order;
  // one polyline per rho_sq per panel.
  std::vector<double> mults;
  std::vector<double> groups;
  for (const SweepRow& r : rows) {
    bool seen = false;
    for (double m : mults) seen = seen || m == r.m_multiplier;
    if (!seen) mults.push_back(r.m_multiplier);
    seen = false;
    for (double g : groups) seen = seen || g == r.rho_sq;
    if (!seen) groups.push_back(r.rho_sq);
  }
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};
  const double panel_w = 360.0, panel_h = 260.0, pad = 50.0;
  auto x_of = [&](std::size_t panel, double mult) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < mults.size(); ++i) {
      if (mults[i] == mult) idx = i;
    }
    const double step =
        mults.size() > 1 ? panel_w / static_cast<double>(mults.size() - 1)
                         : 0.0;
    return pad + static_cast<double>(panel) * (panel_w + 2.0 * pad) +
           static_cast<double>(idx) * step;
  };
  auto y_of = [&](double frac) { return pad + (1.0 - frac) * panel_h; };

  char buf[256];
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"920\" "
      "height=\"380\" viewBox=\"0 0 920 380\">\n"
      "<rect width=\"920\" height=\"380\" fill=\"white\"/>\n";
  const char* titles[2] = {"largest identical fraction", "unique fraction"};
  for (std::size_t panel = 0; panel < 2; ++panel) {
    const double x0 = pad + static_cast<double>(panel) * (panel_w + 2.0 * pad);
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" "
                  "fill=\"none\" stroke=\"black\"/>\n",
                  x0, pad, panel_w, panel_h);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"14\" "
                  "text-anchor=\"middle\">%s vs m multiplier</text>\n",
                  x0 + panel_w / 2.0, pad - 15.0, titles[panel]);
    svg += buf;
    for (double tick : {0.0, 0.5, 1.0}) {
      std::snprintf(buf, sizeof(buf),
                    "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" "
                    "text-anchor=\"end\">%.1f</text>\n",
                    x0 - 6.0, y_of(tick) + 4.0, tick);
      svg += buf;
    }
    for (double m : mults) {
      std::snprintf(buf, sizeof(buf),
                    "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" "
                    "text-anchor=\"middle\">%s</text>\n",
                    x_of(panel, m), pad + panel_h + 16.0,
                    fmt_double(m).c_str());
      svg += buf;
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      std::string points;
      for (const SweepRow& r : rows) {
        if (r.rho_sq != groups[g]) continue;
        const double y = panel == 0 ? r.largest_identical_frac : r.unique_frac;
        std::snprintf(buf, sizeof(buf), "%.1f,%.1f ",
                      x_of(panel, r.m_multiplier), y_of(y));
        points += buf;
      }
      std::snprintf(buf, sizeof(buf),
                    "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"2\" "
                    "points=\"%s\"/>\n",
                    colors[g % 6], points.c_str());
      svg += buf;
    }
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" "
                  "fill=\"%s\">rho_sq = %s</text>\n",
                  pad, 340.0 + 14.0 * static_cast<double>(g), colors[g % 6],
                  fmt_double(groups[g]).c_str());
    svg += buf;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace rrl
