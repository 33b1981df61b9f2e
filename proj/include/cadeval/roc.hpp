#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cadeval/bootstrap.hpp"

namespace cadeval {

/// One case for breast-level classification: a score in [0, 1] and a binary
/// label (1 = malignant).
struct ScoredCase {
  double score = 0.0;
  int label = 0;
};

struct RocPoint {
  double threshold;  // predict positive iff score >= threshold; +inf for (0,0)
  double fpr;
  double tpr;
};

/// Operating points from (0,0) to (1,1), one per distinct score threshold
/// with ties grouped, plus the trapezoidal area under them.
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Builds the ROC curve. Throws DegenerateInputError when a class is missing
/// (the message names it) and InputError for scores outside [0, 1] or labels
/// outside {0, 1}.
RocCurve roc_curve(std::span<const ScoredCase> cases);

/// Trapezoidal area under an operating-point sequence.
double trapezoid_auc(std::span<const RocPoint> points);

struct AucSummary {
  double auc = 0.0;  // full-sample trapezoidal AUC
  double lo = 0.0;
  double hi = 0.0;
  int replicates = 0;
  double interval = 95.0;
  std::uint64_t seed = 0;
  std::int64_t degenerate_redraws = 0;  // single-class replicates redrawn
};

/// Pointwise TPR band on a fixed FPR grid.
struct RocBand {
  std::vector<double> grid;
  std::vector<std::pair<double, double>> bounds;  // (lo, hi) per grid value
  std::int64_t degenerate_redraws = 0;
};

/// Percentile bootstrap over cases resampled with replacement. Replicates
/// that lose one class are redrawn within the same replicate stream and
/// counted. Deterministic given cfg.seed; each replicate draws from its own
/// rng::Stream(seed, replicate_index), so evaluation order cannot change the
/// result.
AucSummary auc_bootstrap(std::span<const ScoredCase> cases, const BootstrapConfig& cfg);

struct RocBootstrapResult {
  AucSummary auc;
  RocBand band;
};

/// Single-pass bootstrap producing both the AUC interval and the TPR band
/// read at `grid` (step interpolation: highest TPR at FPR <= grid value).
/// Uses the same per-replicate streams as auc_bootstrap, so the AUC summary
/// is identical.
RocBootstrapResult roc_bootstrap(std::span<const ScoredCase> cases, const BootstrapConfig& cfg,
                                 std::span<const double> grid);

/// The documented band grid: 0.00, 0.01, ..., 1.00.
std::vector<double> default_fpr_grid();

}  // namespace cadeval
