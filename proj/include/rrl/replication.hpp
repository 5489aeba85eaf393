#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "rrl/approx_mdp.hpp"
#include "rrl/mdp.hpp"
#include "rrl/rpvi.hpp"

namespace rrl {

enum class Algorithm { rpvi, pvi_baseline, reprmax, rmax_baseline, approx_mdp };

/// Parses one of "rpvi", "pvi_baseline", "reprmax", "rmax_baseline",
/// "approx_mdp"; throws std::invalid_argument otherwise.
Algorithm algorithm_from_name(const std::string& name);
std::string algorithm_name(Algorithm algorithm);

/**
 * Algorithm-independent knob set used by the lab and the CLI. Fields that an
 * algorithm does not consume are ignored by it; fields that make no sense
 * for it (an offset-grid override outside phased VI) are rejected.
 *
 * m = 0 asks for the derived sample size: the analysis count for phased VI,
 * the per-query requirement for model estimation. The episodic learners
 * refuse m = 0 because their analysis count does not fit machine integers.
 */
struct RunParams {
  double eps = 0.1;
  double rho = 0.2;
  double delta = 0.01;
  int horizon = 4;            // episode length for the episodic learners
  std::uint64_t m = 0;        // per-query generative draws; 0 = derived
  double m_multiplier = 1.0;  // scales m after resolution
  double rho_sq_override = 0.0;  // phased VI: pin the per-query budget
  bool practical = false;
  OffsetMode offset_mode = OffsetMode::per_iteration;
  std::uint64_t baseline_threshold = 8;  // classical visit-count promotion
  SampleReuse reuse = SampleReuse::shared;
};

/// One finished run: content hashes of each output granularity, the greedy
/// policy, its exact-oracle optimality gap, and the full result document.
struct RunOutput {
  std::uint64_t value_hash = 0;
  std::uint64_t policy_hash = 0;
  std::uint64_t model_hash = 0;
  std::uint64_t audit_hash = 0;
  Policy policy;
  double eps_gap = 0.0;
  nlohmann::ordered_json result;
};

/**
 * Runs one algorithm once. Internal randomness comes from the tree seeded
 * by (internal_seed, "internal"), samples from (sample_seed, "sample"). The
 * result document is a pure function of (algorithm, mdp, params, seeds);
 * the optional wallclock field stays "na" unless timed is set, so untimed
 * reruns are byte-identical.
 */
RunOutput run_one(Algorithm algorithm, const TabularMdp& mdp,
                  const RunParams& params, std::uint64_t internal_seed,
                  std::uint64_t sample_seed, int workers = 1,
                  bool timed = false);

/// A cohort: num_runs = sample_seeds.size() runs of one algorithm that all
/// share the internal seed but draw samples from per-run seeds.
struct PairedRunSpec {
  Algorithm algorithm = Algorithm::rpvi;
  TabularMdp mdp;
  RunParams params;
  std::uint64_t internal_seed = 0;
  std::vector<std::uint64_t> sample_seeds;
  int workers = 1;
};

/// Exact-equality statistics of one output granularity over a cohort.
struct EqualityStats {
  double pairwise_rate = 1.0;           // equal unordered pairs / all pairs
  double largest_identical_frac = 1.0;  // modal class size / runs
  double unique_frac = 1.0;             // distinct outputs / runs
};

struct ReplicationReport {
  std::string algorithm;
  std::uint64_t internal_seed = 0;
  std::vector<std::uint64_t> sample_seeds;
  std::uint64_t mdp_hash = 0;
  nlohmann::ordered_json params;     // resolved parameter echo
  std::vector<RunOutput> runs;
  EqualityStats value;               // headline granularity
  EqualityStats policy;
  EqualityStats model;
  std::vector<std::vector<int>> agreement;  // value-level pairwise equality
  double mean_eps_gap = 0.0;
  double max_eps_gap = 0.0;
};

/**
 * Executes every run of the spec (in parallel when spec.workers > 1; each
 * run is deterministic from its seed pair, so scheduling cannot change the
 * report) and groups outputs by exact hash equality at model, value, and
 * policy granularity. Any failing run aborts the cohort with the failing
 * sample seed named in the exception message.
 */
ReplicationReport run_cohort(const PairedRunSpec& spec);

nlohmann::ordered_json report_to_json(const ReplicationReport& report);

struct SweepRow {
  std::string algorithm;
  double m_multiplier = 1.0;
  double rho_sq = 0.0;
  std::uint64_t internal_seed = 0;
  double largest_identical_frac = 0.0;
  double unique_frac = 0.0;
  double mean_eps_gap = 0.0;
  std::string wallclock_s = "na";
};

struct SweepSpec {
  Algorithm algorithm = Algorithm::rpvi;
  TabularMdp mdp;
  RunParams base_params;             // base_params.m is the base sample size
  std::vector<double> multipliers{1.0, 2.0, 4.0, 8.0, 16.0};
  std::vector<double> rho_sq_values{0.0};  // 0 = derived budget, no override
  int num_runs = 30;
  std::uint64_t internal_seed = 0;
  std::uint64_t sample_seed_base = 1;  // run j draws from seed base + j
  bool timings = false;                // real wallclock instead of "na"
  int workers = 1;
};

/**
 * Cohort grid over multipliers x rho_sq values. Writes the CSV header and
 * one row per cell to `out`, flushing after every row so partial results
 * survive a failing cell (the error then propagates). Collects rows into
 * `rows` when given.
 */
void sweep(const SweepSpec& spec, std::ostream& out,
           std::vector<SweepRow>* rows = nullptr);

/// Self-contained two-panel SVG line chart of a sweep: largest-identical
/// and unique fractions against the multiplier, one polyline per rho_sq.
std::string sweep_svg(const std::vector<SweepRow>& rows);

}  // namespace rrl
