#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rrl/gridworld.hpp"
#include "rrl/hash.hpp"
#include "rrl/parallel.hpp"
#include "rrl/rand.hpp"
#include "rrl/replication.hpp"
#include "rrl/serialize.hpp"

namespace {

struct InputFlags {
  std::string mdp_path;
  std::string grid_path;
  bool default_grid = false;
  double gamma = 0.0;  // 0 = keep the input's discount
};

struct ResolvedInput {
  rrl::TabularMdp mdp;
  std::optional<rrl::GridWorld> grid;
};

void add_input_flags(CLI::App* cmd, InputFlags& in) {
  auto* mdp = cmd->add_option("--mdp", in.mdp_path, "MDP JSON file");
  auto* grid = cmd->add_option("--grid", in.grid_path, "grid spec JSON file");
  auto* dflt = cmd->add_flag("--default-grid", in.default_grid,
                             "use the built-in 5x9 two-goal grid");
  mdp->excludes(grid)->excludes(dflt);
  grid->excludes(dflt);
  cmd->add_option("--gamma", in.gamma,
                  "override the problem's discount factor");
}

ResolvedInput resolve_input(const InputFlags& in) {
  ResolvedInput r;
  if (!in.mdp_path.empty()) {
    r.mdp = rrl::load_mdp(in.mdp_path);
  } else if (!in.grid_path.empty() || in.default_grid) {
    const rrl::GridSpec spec =
        in.default_grid
            ? rrl::GridSpec::default_spec()
            : rrl::grid_spec_from_json(rrl::read_text_file(in.grid_path));
    r.grid = rrl::compile_grid(spec);
    r.mdp = r.grid->mdp;
  } else {
    throw std::invalid_argument(
        "no problem given: pass --mdp, --grid, or --default-grid");
  }
  if (in.gamma != 0.0) {
    r.mdp.gamma = in.gamma;
    r.mdp.validate();
    if (r.grid) r.grid->mdp.gamma = in.gamma;
  }
  return r;
}

struct ParamFlags {
  rrl::RunParams params;
  std::string offset_mode = "per_iteration";
  std::string reuse = "shared";
};

void add_param_flags(CLI::App* cmd, ParamFlags& p) {
  cmd->add_option("--eps", p.params.eps, "accuracy target")
      ->capture_default_str();
  cmd->add_option("--rho", p.params.rho, "replicability budget")
      ->capture_default_str();
  cmd->add_option("--delta", p.params.delta, "failure budget")
      ->capture_default_str();
  cmd->add_option("-H,--horizon", p.params.horizon,
                  "episode length for the episodic learners")
      ->capture_default_str();
  cmd->add_option("-m", p.params.m,
                  "generative draws per query unit (0 = derived where "
                  "feasible)");
  cmd->add_option("--m-multiplier", p.params.m_multiplier,
                  "scales the resolved sample size")
      ->capture_default_str();
  cmd->add_option("--rho-sq", p.params.rho_sq_override,
                  "pin the per-query replicability budget (phased VI only)");
  cmd->add_flag("--practical", p.params.practical,
                "accept sample sizes below the analysis requirement");
  cmd->add_option("--offset-mode", p.offset_mode,
                  "per_iteration or per_pair grid offsets")
      ->check(CLI::IsMember({"per_iteration", "per_pair"}));
  cmd->add_option("--baseline-threshold", p.params.baseline_threshold,
                  "visit count that promotes a pair in the classical "
                  "baseline")
      ->capture_default_str();
  cmd->add_option("--sample-reuse", p.reuse,
                  "model estimation: shared or per_entry draws")
      ->check(CLI::IsMember({"shared", "per_entry"}));
}

rrl::RunParams finish_params(const ParamFlags& p) {
  rrl::RunParams out = p.params;
  out.offset_mode = p.offset_mode == "per_pair"
                        ? rrl::OffsetMode::per_pair
                        : rrl::OffsetMode::per_iteration;
  out.reuse = p.reuse == "per_entry" ? rrl::SampleReuse::per_entry
                                     : rrl::SampleReuse::shared;
  return out;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    rrl::write_text_file(out_path, text);
  }
}

std::string ascii_policy(const ResolvedInput& input, const rrl::Policy& pi) {
  if (!input.grid) return {};
  return rrl::render_policy(*input.grid, pi);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"replicable tabular reinforcement learning toolkit"};
  app.require_subcommand(1);

  std::string algo = "rpvi";
  std::string internal_seed_text = "0";
  std::string sample_seed_text = "1";
  std::vector<std::string> sample_seeds_text;
  std::string seed_base_text = "1";
  std::string out_path;
  std::string svg_path;
  std::string format = "csv";
  int threads = 0;
  bool timings = false;
  int num_runs = 30;

  InputFlags solve_in, cohort_in, sweep_in, oracle_in, validate_in;
  ParamFlags solve_p, cohort_p, sweep_p;

  auto* solve = app.add_subcommand(
      "solve", "run one algorithm once and emit its result document");
  solve->add_option("--algo", algo,
                    "rpvi, pvi_baseline, reprmax, rmax_baseline, approx_mdp")
      ->required();
  add_input_flags(solve, solve_in);
  add_param_flags(solve, solve_p);
  solve->add_option("--internal-seed", internal_seed_text,
                    "shared-randomness seed (decimal or 0x hex)")
      ->capture_default_str();
  solve->add_option("--sample-seed", sample_seed_text, "sampling seed")
      ->capture_default_str();
  solve->add_option("--out", out_path, "write the result JSON here");
  solve->add_option("--threads", threads, "worker threads");
  solve->add_flag("--timings", timings,
                  "record real wallclock (breaks byte-identical reruns)");

  auto* cohort = app.add_subcommand(
      "cohort", "run many seeds against one shared internal seed");
  cohort->add_option("--algo", algo)->required();
  add_input_flags(cohort, cohort_in);
  add_param_flags(cohort, cohort_p);
  cohort->add_option("--internal-seed", internal_seed_text)
      ->capture_default_str();
  cohort->add_option("--sample-seeds", sample_seeds_text,
                     "explicit sample seeds")
      ->delimiter(',');
  cohort->add_option("--sample-seed-base", seed_base_text,
                     "first of runs consecutive sample seeds")
      ->capture_default_str();
  cohort->add_option("--runs", num_runs, "cohort size")
      ->capture_default_str();
  cohort->add_option("--out", out_path, "write the report JSON here");
  cohort->add_option("--threads", threads, "worker threads");

  auto* sweep_cmd = app.add_subcommand(
      "sweep", "cohort grid over m multipliers and per-query budgets");
  sweep_cmd->add_option("--algo", algo)->required();
  add_input_flags(sweep_cmd, sweep_in);
  add_param_flags(sweep_cmd, sweep_p);
  std::vector<double> multipliers{1.0, 2.0, 4.0, 8.0, 16.0};
  std::vector<double> rho_sq_values{0.0};
  sweep_cmd->add_option("--base-m", sweep_p.params.m,
                        "base sample size scaled by each multiplier");
  sweep_cmd->add_option("--multipliers", multipliers, "m multipliers")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd
      ->add_option("--rho-sq-values", rho_sq_values,
                   "per-query budgets; 0 keeps the derived one")
      ->delimiter(',');
  sweep_cmd->add_option("--internal-seed", internal_seed_text)
      ->capture_default_str();
  sweep_cmd->add_option("--sample-seed-base", seed_base_text)
      ->capture_default_str();
  sweep_cmd->add_option("--runs", num_runs, "runs per cell")
      ->capture_default_str();
  sweep_cmd->add_option("--out", out_path, "write the CSV here");
  sweep_cmd->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  sweep_cmd->add_option("--svg", svg_path, "also write a two-panel chart");
  sweep_cmd->add_option("--threads", threads, "worker threads");
  sweep_cmd->add_flag("--timings", timings, "record real wallclock");

  auto* oracle = app.add_subcommand(
      "oracle", "exact value iteration and policy evaluation");
  add_input_flags(oracle, oracle_in);
  std::vector<int> oracle_policy;
  double oracle_tol = 1e-10;
  oracle->add_option("--policy", oracle_policy,
                     "evaluate this policy instead of the optimal one")
      ->delimiter(',');
  oracle->add_option("--tol", oracle_tol, "value-iteration tolerance")
      ->capture_default_str();
  oracle->add_option("--out", out_path, "write the oracle JSON here");

  auto* validate = app.add_subcommand("validate", "check an MDP JSON file");
  add_input_flags(validate, validate_in);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // help text
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  const int workers = rrl::resolve_workers(threads);

  if (*solve) {
    const ResolvedInput input = resolve_input(solve_in);
    const rrl::RunOutput run = rrl::run_one(
        rrl::algorithm_from_name(algo), input.mdp, finish_params(solve_p),
        rrl::rand::parse_seed(internal_seed_text),
        rrl::rand::parse_seed(sample_seed_text), workers, timings);
    emit(rrl::dump_json(run.result), out_path);
    const std::string art = ascii_policy(input, run.policy);
    if (!art.empty()) (out_path.empty() ? std::cerr : std::cout) << art;
    return 0;
  }

  if (*cohort) {
    const ResolvedInput input = resolve_input(cohort_in);
    rrl::PairedRunSpec spec;
    spec.algorithm = rrl::algorithm_from_name(algo);
    spec.mdp = input.mdp;
    spec.params = finish_params(cohort_p);
    spec.internal_seed = rrl::rand::parse_seed(internal_seed_text);
    if (!sample_seeds_text.empty()) {
      for (const std::string& s : sample_seeds_text) {
        spec.sample_seeds.push_back(rrl::rand::parse_seed(s));
      }
    } else {
      const std::uint64_t base = rrl::rand::parse_seed(seed_base_text);
      for (int i = 0; i < num_runs; ++i) {
        spec.sample_seeds.push_back(base + static_cast<std::uint64_t>(i));
      }
    }
    spec.workers = workers;
    emit(rrl::dump_json(rrl::report_to_json(rrl::run_cohort(spec))),
         out_path);
    return 0;
  }

  if (*sweep_cmd) {
    const ResolvedInput input = resolve_input(sweep_in);
    rrl::SweepSpec spec;
    spec.algorithm = rrl::algorithm_from_name(algo);
    spec.mdp = input.mdp;
    spec.base_params = finish_params(sweep_p);
    spec.multipliers = multipliers;
    spec.rho_sq_values = rho_sq_values;
    spec.num_runs = num_runs;
    spec.internal_seed = rrl::rand::parse_seed(internal_seed_text);
    spec.sample_seed_base = rrl::rand::parse_seed(seed_base_text);
    spec.timings = timings;
    spec.workers = workers;

    std::vector<rrl::SweepRow> rows;
    if (format == "csv") {
      if (out_path.empty()) {
        rrl::sweep(spec, std::cout, &rows);
      } else {
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) {
          throw std::runtime_error("cannot open for writing: " + out_path);
        }
        rrl::sweep(spec, out, &rows);
      }
    } else {
      std::ostringstream sink;
      rrl::sweep(spec, sink, &rows);
      nlohmann::ordered_json j = nlohmann::ordered_json::array();
      for (const rrl::SweepRow& r : rows) {
        nlohmann::ordered_json row;
        row["algorithm"] = r.algorithm;
        row["m_multiplier"] = r.m_multiplier;
        row["rho_sq"] = r.rho_sq;
        row["internal_seed"] = r.internal_seed;
        row["largest_identical_frac"] = r.largest_identical_frac;
        row["unique_frac"] = r.unique_frac;
        row["mean_eps_gap"] = r.mean_eps_gap;
        row["wallclock_s"] = r.wallclock_s;
        j.push_back(row);
      }
      emit(rrl::dump_json(j), out_path);
    }
    if (!svg_path.empty()) {
      rrl::write_text_file(svg_path, rrl::sweep_svg(rows));
    }
    return 0;
  }

  if (*oracle) {
    const ResolvedInput input = resolve_input(oracle_in);
    const rrl::ValueIterationResult sol =
        rrl::exact_q_values(input.mdp, oracle_tol);
    const rrl::Policy best = rrl::greedy_policy(sol.q);
    nlohmann::ordered_json j;
    j["mdp_hash"] = rrl::hex64(rrl::hash_json(rrl::mdp_to_json(input.mdp)));
    j["iterations"] = sol.iterations;
    j["q"] = sol.q;
    j["v"] = sol.v;
    j["policy"] = best;
    j["optimal_return"] = rrl::policy_return(input.mdp, best, oracle_tol);
    if (!oracle_policy.empty()) {
      j["evaluated_policy"] = oracle_policy;
      j["evaluated_values"] =
          rrl::policy_values(input.mdp, oracle_policy, oracle_tol);
      const double ret =
          rrl::policy_return(input.mdp, oracle_policy, oracle_tol);
      j["evaluated_return"] = ret;
      j["eps_gap"] = j["optimal_return"].get<double>() - ret;
    }
    emit(rrl::dump_json(j), out_path);
    const std::string art = ascii_policy(
        input, oracle_policy.empty() ? best : rrl::Policy(oracle_policy));
    if (!art.empty()) (out_path.empty() ? std::cerr : std::cout) << art;
    return 0;
  }

  if (*validate) {
    const ResolvedInput input = resolve_input(validate_in);
    std::cout << "ok: " << input.mdp.num_states << " states, "
              << input.mdp.num_actions << " actions, gamma "
              << input.mdp.gamma << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
}
