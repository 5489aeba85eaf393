#include "rrl/replication.hpp"

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "rrl/hash.hpp"
#include "rrl/serialize.hpp"

namespace {

rrl::TabularMdp half_discount_fixture() {
  rrl::TabularMdp mdp;
  mdp.num_states = 2;
  mdp.num_actions = 2;
  mdp.gamma = 0.5;
  mdp.r_max = 1.0;
  mdp.rewards = {{0.05, 0.6}, {0.3, 0.95}};
  mdp.transitions = {{{0.8, 0.2}, {0.3, 0.7}}, {{0.6, 0.4}, {0.1, 0.9}}};
  mdp.initial_dist = {0.5, 0.5};
  mdp.validate();
  return mdp;
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, int count) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(base + i);
  return seeds;
}

void check_report_invariants(const rrl::ReplicationReport& rep) {
  CHECK(rep.policy.pairwise_rate >= rep.value.pairwise_rate);
  CHECK(rep.value.pairwise_rate >= rep.model.pairwise_rate);
  CHECK(rep.value.largest_identical_frac > 0.0);
  CHECK(rep.value.largest_identical_frac <= 1.0);
  CHECK(rep.value.unique_frac > 0.0);
  CHECK(rep.value.unique_frac <= 1.0);
  const std::size_t n = rep.runs.size();
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(rep.agreement[i][i] == 1);
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(rep.agreement[i][j] == rep.agreement[j][i]);
    }
  }
}

}  // namespace

TEST_SUITE("replication") {

TEST_CASE("algorithm names round-trip and junk is rejected") {
  for (const char* name :
       {"rpvi", "pvi_baseline", "reprmax", "rmax_baseline", "approx_mdp"}) {
    CHECK(rrl::algorithm_name(rrl::algorithm_from_name(name)) == name);
  }
  CHECK_THROWS_AS(rrl::algorithm_from_name("qlearning"),
                  std::invalid_argument);
}

TEST_CASE("identical sample seeds collapse the cohort to one class") {
  rrl::PairedRunSpec spec;
  spec.algorithm = rrl::Algorithm::rpvi;
  spec.mdp = half_discount_fixture();
  spec.params.m = 2000;
  spec.params.practical = true;
  spec.internal_seed = 3;
  spec.sample_seeds = {5, 5};
  const rrl::ReplicationReport rep = rrl::run_cohort(spec);
  CHECK(rep.value.largest_identical_frac == 1.0);
  CHECK(rep.value.unique_frac == 0.5);
  CHECK(rep.value.pairwise_rate == 1.0);
  CHECK(rep.agreement == std::vector<std::vector<int>>{{1, 1}, {1, 1}});
  CHECK(rep.runs[0].result.at("outputs") == rep.runs[1].result.at("outputs"));
  check_report_invariants(rep);
}

TEST_CASE("plain-mean baseline scatters while the gridded run concentrates") {
  rrl::PairedRunSpec spec;
  spec.mdp = half_discount_fixture();
  spec.params.m = 50000;
  spec.params.practical = true;
  spec.internal_seed = 9;
  spec.sample_seeds = seed_range(100, 8);
  spec.workers = 2;

  spec.algorithm = rrl::Algorithm::rpvi;
  const rrl::ReplicationReport gridded = rrl::run_cohort(spec);
  CHECK(gridded.value.largest_identical_frac >= 0.6);
  check_report_invariants(gridded);

  spec.algorithm = rrl::Algorithm::pvi_baseline;
  const rrl::ReplicationReport baseline = rrl::run_cohort(spec);
  CHECK(baseline.value.unique_frac == 1.0);
  CHECK(baseline.value.largest_identical_frac == doctest::Approx(1.0 / 8.0));
  CHECK(gridded.value.largest_identical_frac >
        baseline.value.largest_identical_frac);
  check_report_invariants(baseline);

  // Untuned small-sample cohorts scatter too.
  spec.params.m = 300;
  const rrl::ReplicationReport tiny = rrl::run_cohort(spec);
  CHECK(tiny.value.unique_frac >= 0.9);
}

TEST_CASE("per-type ordering holds for the episodic and model learners") {
  const rrl::TabularMdp mdp = half_discount_fixture();

  rrl::PairedRunSpec spec;
  spec.mdp = mdp;
  spec.internal_seed = 17;

  spec.algorithm = rrl::Algorithm::reprmax;
  spec.params.eps = 0.4;
  spec.params.delta = 0.04;
  spec.params.horizon = 4;
  spec.params.m = 20000;
  spec.params.practical = true;
  spec.sample_seeds = seed_range(300, 5);
  const rrl::ReplicationReport rmax = rrl::run_cohort(spec);
  check_report_invariants(rmax);
  CHECK(rmax.runs[0].result.at("outputs").contains("known_count"));

  spec.algorithm = rrl::Algorithm::rmax_baseline;
  spec.params.m = 200;
  spec.params.baseline_threshold = 8;
  spec.sample_seeds = seed_range(400, 4);
  const rrl::ReplicationReport classical = rrl::run_cohort(spec);
  check_report_invariants(classical);

  spec.algorithm = rrl::Algorithm::approx_mdp;
  spec.params = rrl::RunParams{};
  spec.params.m = 4000;
  spec.params.practical = true;
  spec.sample_seeds = seed_range(500, 6);
  const rrl::ReplicationReport approx = rrl::run_cohort(spec);
  check_report_invariants(approx);
  CHECK(approx.runs[0].result.at("outputs").at("model").contains("metadata"));
}

TEST_CASE("failing runs abort the cohort with the seed named") {
  rrl::PairedRunSpec spec;
  spec.algorithm = rrl::Algorithm::reprmax;
  spec.mdp = half_discount_fixture();
  spec.params.eps = 0.4;
  spec.params.delta = 0.04;
  spec.params.m = 0;
  spec.internal_seed = 1;
  spec.sample_seeds = {77, 78};
  CHECK_THROWS_WITH_AS(
      rrl::run_cohort(spec),
      "cohort run failed (sample seed 77): episodic r-max: no usable sample "
      "size; pass m explicitly",
      std::invalid_argument);

  spec.sample_seeds = {77};
  CHECK_THROWS_AS(rrl::run_cohort(spec), std::invalid_argument);
}

TEST_CASE("sweep emits the pinned header and one flushed row per cell") {
  rrl::SweepSpec spec;
  spec.algorithm = rrl::Algorithm::rpvi;
  spec.mdp = half_discount_fixture();
  spec.base_params.m = 2000;
  spec.base_params.practical = true;
  spec.multipliers = {1.0, 2.0};
  spec.rho_sq_values = {0.0, 0.05};
  spec.num_runs = 3;
  spec.internal_seed = 11;
  spec.sample_seed_base = 600;

  std::ostringstream csv;
  std::vector<rrl::SweepRow> rows;
  rrl::sweep(spec, csv, &rows);

  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line ==
        "algorithm,m_multiplier,rho_sq,internal_seed,largest_identical_frac,"
        "unique_frac,mean_eps_gap,wallclock_s");
  int count = 0;
  while (std::getline(lines, line)) {
    ++count;
    CHECK(line.substr(0, 5) == "rpvi,");
    CHECK(line.find(",11,") != std::string::npos);
    CHECK(line.substr(line.size() - 3) == ",na");
  }
  CHECK(count == 4);
  CHECK(rows.size() == 4);
  // Unset budget column reports the derived per-query budget rho/(S A T).
  CHECK(rows[0].rho_sq == doctest::Approx(0.2 / 36.0).epsilon(1e-12));
  CHECK(rows[2].rho_sq == 0.05);
  CHECK(rows[0].m_multiplier == 1.0);
  CHECK(rows[1].m_multiplier == 2.0);

  // A failing cell still leaves the earlier rows flushed.
  spec.multipliers = {1.0, -1.0};
  std::ostringstream partial;
  CHECK_THROWS_AS(rrl::sweep(spec, partial), std::invalid_argument);
  std::istringstream check(partial.str());
  int flushed = 0;
  while (std::getline(check, line)) ++flushed;
  CHECK(flushed == 2);
}

TEST_CASE("sweep chart is self-contained deterministic svg") {
  rrl::SweepRow a{"rpvi", 1.0, 0.05, 7, 0.4, 0.8, 0.01, "na"};
  rrl::SweepRow b{"rpvi", 2.0, 0.05, 7, 0.7, 0.5, 0.01, "na"};
  rrl::SweepRow c{"rpvi", 1.0, 0.005, 7, 0.5, 0.9, 0.02, "na"};
  rrl::SweepRow d{"rpvi", 2.0, 0.005, 7, 0.9, 0.3, 0.02, "na"};
  const std::vector<rrl::SweepRow> rows{a, b, c, d};
  const std::string svg = rrl::sweep_svg(rows);
  CHECK(svg == rrl::sweep_svg(rows));
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("rho_sq = 0.05") != std::string::npos);
  CHECK(svg.find("rho_sq = 0.005") != std::string::npos);
  CHECK(std::count(svg.begin(), svg.end(), '\n') > 10);
  size_t polylines = 0;
  for (size_t pos = svg.find("<polyline"); pos != std::string::npos;
       pos = svg.find("<polyline", pos + 1)) {
    ++polylines;
  }
  CHECK(polylines == 4);  // two groups x two panels
}

TEST_CASE("run documents are deterministic and carry full provenance") {
  const rrl::TabularMdp mdp = half_discount_fixture();
  rrl::RunParams params;
  params.m = 2000;
  params.practical = true;

  const rrl::RunOutput first =
      rrl::run_one(rrl::Algorithm::rpvi, mdp, params, 21, 22);
  const rrl::RunOutput second =
      rrl::run_one(rrl::Algorithm::rpvi, mdp, params, 21, 22);
  CHECK(rrl::dump_json(first.result) == rrl::dump_json(second.result));
  CHECK(first.result.at("wallclock_s") == "na");
  CHECK(first.result.at("mdp_hash") ==
        rrl::hex64(rrl::hash_json(rrl::mdp_to_json(mdp))));
  CHECK(first.result.at("outputs").at("policy_hash") ==
        rrl::hex64(rrl::hash_policy(first.policy)));
  CHECK(first.result.at("params").at("m") == 2000);
  CHECK(first.result.at("derived").at("theoretical_m").get<double>() ==
        doctest::Approx(1136875048.0));
  CHECK(first.eps_gap >= 0.0);

  const rrl::RunOutput timed =
      rrl::run_one(rrl::Algorithm::rpvi, mdp, params, 21, 22, 1, true);
  CHECK(timed.result.at("wallclock_s").is_number());

  rrl::RunParams unset = params;
  unset.m = 0;
  CHECK_THROWS_AS(rrl::run_one(rrl::Algorithm::reprmax, mdp, unset, 1, 2),
                  std::invalid_argument);
  rrl::RunParams bad = params;
  bad.rho_sq_override = 0.1;
  CHECK_THROWS_AS(
      rrl::run_one(rrl::Algorithm::approx_mdp, mdp, bad, 1, 2),
      std::invalid_argument);
}

}  // TEST_SUITE
