#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rrl/rand.hpp"

namespace rrl {

/**
 * Parameters of a replicable mean estimator for [0,1]-valued observations.
 *
 * The estimator splits its total tolerance tau into a statistical part
 * tau_prime (how far the empirical mean may sit from the true mean) and a
 * rounding part alpha/2 (how far snapping to a randomly offset grid of pitch
 * alpha can move the answer). Two runs on independent samples agree whenever
 * both empirical means fall in the same grid cell, which happens with
 * probability at least 1 - rho when each mean is tau_prime-accurate with
 * probability 1 - delta and 2*tau_prime/alpha <= rho - 2*delta.
 */
struct RStatConfig {
  double tau = 0.0;
  double rho = 0.0;
  double delta = 0.0;
  double tau_prime = 0.0;
  double alpha = 0.0;

  /// Budgets a total tolerance tau: tau_prime = tau(rho-2delta)/(rho+1-2delta)
  /// and alpha = 2tau/(rho+1-2delta), so tau_prime + alpha/2 = tau.
  static RStatConfig from_total_tolerance(double tau, double rho, double delta);

  /// Pins the statistical tolerance directly and widens the grid to match:
  /// alpha = 2*tau_prime/(rho-2delta), tau = tau_prime + alpha/2.
  static RStatConfig from_statistical_tolerance(double tau_prime, double rho,
                                                double delta);

  /// Samples needed so the empirical mean is tau_prime-accurate with
  /// probability 1 - delta (Hoeffding): ceil(ln(2/delta) / (2 tau_prime^2)).
  /// Throws std::runtime_error if the count does not fit in 64 bits; the
  /// _real variant returns the same quantity as a double and never throws,
  /// which is what the estimator itself uses for its sufficiency check.
  std::uint64_t required_n() const;
  double required_n_real() const;

  void validate() const;
};

struct RStatResult {
  double value = 0.0;           // grid value clamped to [0,1]
  double grid_value = 0.0;      // grid value before clamping
  double empirical_mean = 0.0;
  double offset = 0.0;          // grid offset drawn from the internal stream
  std::uint64_t n = 0;
  bool empirical_only = false;  // ran with fewer samples than required_n
};

/// Nearest point of the grid {offset + k*alpha : k integer}; midpoints round
/// toward minus infinity.
double round_to_grid(double mean, double alpha, double offset);

/**
 * Replicable mean of explicit samples (each in [0,1]). Consumes exactly one
 * uniform draw from offset_stream, which must come from the internal
 * (shared) randomness tree. Throws if fewer than required_n samples are
 * given, unless `practical` is set, in which case the result is computed
 * anyway and flagged empirical_only.
 */
RStatResult rstat(const RStatConfig& config, std::span<const double> samples,
                  rand::Stream& offset_stream, bool practical = false);

/// Same estimator when the sample multiset is given as distinct values with
/// multiplicities. Equivalent to expanding the counts into a flat sample list.
RStatResult rstat_weighted(const RStatConfig& config,
                           std::span<const double> values,
                           std::span<const std::uint64_t> counts,
                           rand::Stream& offset_stream, bool practical = false);

/// Maps raw observations through a [0,1]-valued query and runs the estimator.
template <class Range, class Query>
RStatResult apply_query(const RStatConfig& config, const Range& observations,
                        Query&& query, rand::Stream& offset_stream,
                        bool practical = false) {
  std::vector<double> values;
  values.reserve(observations.size());
  for (const auto& x : observations) values.push_back(query(x));
  return rstat(config, values, offset_stream, practical);
}

}  // namespace rrl
