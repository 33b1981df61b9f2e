#include "cadeval/roc.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "cadeval/errors.hpp"

namespace cadeval {

namespace {

void validate_cases(std::span<const ScoredCase> cases) {
  long n_pos = 0;
  long n_neg = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const ScoredCase& c = cases[i];
    if (!(c.score >= 0.0 && c.score <= 1.0)) {
      throw InputError("case " + std::to_string(i) + ": score must be in [0, 1]");
    }
    if (c.label == 1) {
      ++n_pos;
    } else if (c.label == 0) {
      ++n_neg;
    } else {
      throw InputError("case " + std::to_string(i) + ": label must be 0 or 1");
    }
  }
  if (n_pos == 0) throw DegenerateInputError("roc input has no positive cases (label 1)");
  if (n_neg == 0) throw DegenerateInputError("roc input has no negative cases (label 0)");
}

// Parallel arrays sorted by score descending; the bootstrap sweeps reuse
// this ordering for every replicate.
struct SortedCases {
  std::vector<double> scores;
  std::vector<int> labels;
  double n_pos = 0.0;
  double n_neg = 0.0;
};

SortedCases sort_cases(std::span<const ScoredCase> cases) {
  std::vector<std::size_t> order(cases.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cases[a].score > cases[b].score;
  });
  SortedCases s;
  s.scores.reserve(cases.size());
  s.labels.reserve(cases.size());
  for (std::size_t idx : order) {
    s.scores.push_back(cases[idx].score);
    s.labels.push_back(cases[idx].label);
    (cases[idx].label == 1 ? s.n_pos : s.n_neg) += 1.0;
  }
  return s;
}

}  // namespace

RocCurve roc_curve(std::span<const ScoredCase> cases) {
  validate_cases(cases);
  const SortedCases s = sort_cases(cases);

  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  double tp = 0.0;
  double fp = 0.0;
  std::size_t i = 0;
  while (i < s.scores.size()) {
    const double t = s.scores[i];
    std::size_t j = i;
    while (j < s.scores.size() && s.scores[j] == t) {
      (s.labels[j] == 1 ? tp : fp) += 1.0;
      ++j;
    }
    curve.points.push_back({t, fp / s.n_neg, tp / s.n_pos});
    i = j;
  }

  curve.auc = trapezoid_auc(curve.points);
  return curve;
}

double trapezoid_auc(std::span<const RocPoint> points) {
  double auc = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    const RocPoint& a = points[k - 1];
    const RocPoint& b = points[k];
    auc += (b.fpr - a.fpr) * (b.tpr + a.tpr) * 0.5;
  }
  return auc;
}

RocBootstrapResult roc_bootstrap(std::span<const ScoredCase> cases, const BootstrapConfig& cfg,
                                 std::span<const double> grid) {
  validate(cfg);
  const RocCurve full = roc_curve(cases);  // also validates the sample
  const SortedCases s = sort_cases(cases);
  const std::size_t n = s.scores.size();
  const int replicates = cfg.replicates;

  std::vector<double> sorted_grid(grid.begin(), grid.end());
  std::sort(sorted_grid.begin(), sorted_grid.end());

  std::vector<double> rep_auc(static_cast<std::size_t>(replicates));
  // grid_vals[g * replicates + r]
  std::vector<double> grid_vals(sorted_grid.size() * static_cast<std::size_t>(replicates));
  std::int64_t redraws = 0;

  std::vector<std::uint32_t> mult;
  for (int r = 0; r < replicates; ++r) {
    rng::Stream stream(cfg.seed, static_cast<std::uint64_t>(r));
    double pos_total = 0.0;
    double neg_total = 0.0;
    for (;;) {
      draw_multiplicities(stream, n, mult);
      pos_total = neg_total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        (s.labels[i] == 1 ? pos_total : neg_total) += mult[i];
      }
      if (pos_total > 0.0 && neg_total > 0.0) break;
      ++redraws;
    }

    double auc = 0.0;
    double tp = 0.0;
    double fp = 0.0;
    double prev_fpr = 0.0;
    double prev_tpr = 0.0;
    std::size_t g = 0;
    double last_leq_tpr = 0.0;  // tpr of the last point with fpr <= grid[g]
    // Consume grid values covered by the initial (0,0) point.
    std::size_t i = 0;
    while (i < n) {
      const double t = s.scores[i];
      std::size_t j = i;
      while (j < n && s.scores[j] == t) {
        (s.labels[j] == 1 ? tp : fp) += mult[j];
        ++j;
      }
      const double fpr = fp / neg_total;
      const double tpr = tp / pos_total;
      while (g < sorted_grid.size() && sorted_grid[g] < fpr) {
        grid_vals[g * replicates + r] = last_leq_tpr;
        ++g;
      }
      last_leq_tpr = tpr;
      auc += (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5;
      prev_fpr = fpr;
      prev_tpr = tpr;
      i = j;
    }
    while (g < sorted_grid.size()) {
      grid_vals[g * replicates + r] = last_leq_tpr;
      ++g;
    }
    rep_auc[static_cast<std::size_t>(r)] = auc;
  }

  RocBootstrapResult result;
  const auto [lo, hi] = central_interval(rep_auc, cfg.interval);
  result.auc = {full.auc, lo, hi, replicates, cfg.interval, cfg.seed, redraws};
  result.band.grid = sorted_grid;
  result.band.degenerate_redraws = redraws;
  result.band.bounds.reserve(sorted_grid.size());
  std::vector<double> column(static_cast<std::size_t>(replicates));
  for (std::size_t g = 0; g < sorted_grid.size(); ++g) {
    std::copy_n(grid_vals.begin() + static_cast<std::ptrdiff_t>(g * replicates), replicates,
                column.begin());
    result.band.bounds.push_back(central_interval(column, cfg.interval));
  }
  return result;
}

AucSummary auc_bootstrap(std::span<const ScoredCase> cases, const BootstrapConfig& cfg) {
  return roc_bootstrap(cases, cfg, {}).auc;
}

std::vector<double> default_fpr_grid() {
  std::vector<double> grid;
  grid.reserve(101);
  for (int i = 0; i <= 100; ++i) grid.push_back(static_cast<double>(i) / 100.0);
  return grid;
}

}  // namespace cadeval
