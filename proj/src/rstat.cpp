#include "rrl/rstat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rrl {

namespace {

void check_unit_interval(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " outside [0, 1]");
  }
}

RStatResult finish(const RStatConfig& config, double mean, std::uint64_t n,
                   rand::Stream& offset_stream, bool practical) {
  RStatResult res;
  res.n = n;
  res.empirical_mean = mean;
  res.empirical_only = static_cast<double>(n) < config.required_n_real();
  if (res.empirical_only && !practical) {
    char need[32];
    std::snprintf(need, sizeof(need), "%.0f", config.required_n_real());
    throw std::invalid_argument(
        "rstat: " + std::to_string(n) + " samples given but " + need +
        " required; pass practical=true to accept weaker guarantees");
  }
  res.offset = config.alpha * offset_stream.uniform01();
  res.grid_value = round_to_grid(mean, config.alpha, res.offset);
  res.value = std::clamp(res.grid_value, 0.0, 1.0);
  return res;
}

}  // namespace

RStatConfig RStatConfig::from_total_tolerance(double tau, double rho,
                                              double delta) {
  RStatConfig c;
  c.tau = tau;
  c.rho = rho;
  c.delta = delta;
  c.tau_prime = tau * (rho - 2.0 * delta) / (rho + 1.0 - 2.0 * delta);
  c.alpha = 2.0 * tau / (rho + 1.0 - 2.0 * delta);
  c.validate();
  return c;
}

RStatConfig RStatConfig::from_statistical_tolerance(double tau_prime,
                                                    double rho, double delta) {
  RStatConfig c;
  c.rho = rho;
  c.delta = delta;
  c.tau_prime = tau_prime;
  c.alpha = 2.0 * tau_prime / (rho - 2.0 * delta);
  c.tau = tau_prime + c.alpha / 2.0;
  c.validate();
  return c;
}

void RStatConfig::validate() const {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw std::invalid_argument("rstat config: rho must lie in (0, 1)");
  }
  if (!(delta > 0.0)) {
    throw std::invalid_argument("rstat config: delta must be positive");
  }
  if (!(delta < rho / 2.0)) {
    throw std::invalid_argument(
        "rstat config: delta must be below rho/2 (got delta=" +
        std::to_string(delta) + ", rho=" + std::to_string(rho) + ")");
  }
  if (!(tau > 0.0) || !(tau_prime > 0.0) || !(alpha > 0.0)) {
    throw std::invalid_argument("rstat config: tolerances must be positive");
  }
}

double RStatConfig::required_n_real() const {
  return std::ceil(std::log(2.0 / delta) / (2.0 * tau_prime * tau_prime));
}

std::uint64_t RStatConfig::required_n() const {
  const double n = required_n_real();
  if (!(n >= 0.0) || n > 9e18) {
    throw std::runtime_error("rstat config: required sample count overflows");
  }
  return static_cast<std::uint64_t>(n);
}

double round_to_grid(double mean, double alpha, double offset) {
  const double x = (mean - offset) / alpha;
  const double k = std::ceil(x - 0.5);
  return offset + k * alpha;
}

RStatResult rstat(const RStatConfig& config, std::span<const double> samples,
                  rand::Stream& offset_stream, bool practical) {
  config.validate();
  if (samples.empty()) throw std::invalid_argument("rstat: no samples");
  double sum = 0.0;
  for (double v : samples) {
    check_unit_interval(v, "rstat: sample");
    sum += v;
  }
  const auto n = static_cast<std::uint64_t>(samples.size());
  return finish(config, sum / static_cast<double>(n), n, offset_stream,
                practical);
}

RStatResult rstat_weighted(const RStatConfig& config,
                           std::span<const double> values,
                           std::span<const std::uint64_t> counts,
                           rand::Stream& offset_stream, bool practical) {
  config.validate();
  if (values.size() != counts.size()) {
    throw std::invalid_argument("rstat: values/counts size mismatch");
  }
  double sum = 0.0;
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    check_unit_interval(values[i], "rstat: value");
    sum += static_cast<double>(counts[i]) * values[i];
    n += counts[i];
  }
  if (n == 0) throw std::invalid_argument("rstat: no samples");
  return finish(config, sum / static_cast<double>(n), n, offset_stream,
                practical);
}

}  // namespace rrl
