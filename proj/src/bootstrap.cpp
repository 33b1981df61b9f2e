#include "cadeval/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cadeval/errors.hpp"

namespace cadeval {

void validate(const BootstrapConfig& cfg) {
  if (cfg.replicates < 1) {
    throw ConfigError("bootstrap replicates must be >= 1, got " + std::to_string(cfg.replicates));
  }
  if (!(cfg.interval > 0.0 && cfg.interval < 100.0)) {
    throw ConfigError("bootstrap interval must be in (0, 100), got " +
                      std::to_string(cfg.interval));
  }
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw InputError("percentile of an empty sample");
  if (!(p >= 0.0 && p <= 100.0)) {
    throw ConfigError("percentile must be in [0, 100], got " + std::to_string(p));
  }
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p / 100.0;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::pair<double, double> central_interval(const std::vector<double>& values, double interval) {
  const double tail = (100.0 - interval) / 2.0;
  return {percentile(values, tail), percentile(values, 100.0 - tail)};
}

void draw_multiplicities(rng::Stream& stream, std::size_t n, std::vector<std::uint32_t>& out) {
  out.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) ++out[stream.next_index(n)];
}

}  // namespace cadeval
