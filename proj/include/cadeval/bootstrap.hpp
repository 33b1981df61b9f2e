#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cadeval/rng.hpp"

namespace cadeval {

struct BootstrapConfig {
  int replicates = 10000;
  double interval = 95.0;  // central percentile width
  std::uint64_t seed = 0;
};

/// Throws ConfigError unless replicates >= 1 and 0 < interval < 100.
void validate(const BootstrapConfig& cfg);

/// Percentile by linear interpolation between order statistics:
/// h = (n - 1) * p / 100, result = v[floor(h)] + frac(h) * (v[floor(h)+1] - v[floor(h)]).
/// Sorts a copy of the input; p in [0, 100].
double percentile(std::vector<double> values, double p);

/// (lo, hi) percentiles delimiting the central `interval` percent.
std::pair<double, double> central_interval(const std::vector<double>& values, double interval);

/// Draws n samples with replacement from [0, n) and records per-index
/// multiplicities into `out` (resized to n).
void draw_multiplicities(rng::Stream& stream, std::size_t n, std::vector<std::uint32_t>& out);

}  // namespace cadeval
