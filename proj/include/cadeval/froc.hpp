#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cadeval/bootstrap.hpp"
#include "cadeval/geometry.hpp"

namespace cadeval {

// Ground-truth lesion. Only malignant lesions take part in FROC analysis;
// benign annotations are dropped at ingestion and never reach this type.
struct LesionAnnotation {
  std::string lesion_id;
  std::string image_id;
  BoundingBox box;
};

struct DetectionRef {
  std::size_t index = 0;  // position in the detection span passed to match_detections
  double score = 0.0;
};

struct FalsePositiveRef {
  std::string image_id;
  std::size_t index = 0;
  double score = 0.0;
};

// Partition of one image's detections into lesion credits and false
// positives. Every lesion of the image has an entry; uncredited lesions map
// to an empty list. A detection whose center lies inside several lesion
// boxes credits all of them, so it may appear under more than one lesion,
// but a credited detection is never also a false positive.
struct MatchResult {
  std::map<std::string, std::vector<DetectionRef>> matched_lesions;
  std::vector<FalsePositiveRef> false_positives;
};

// Matching criterion: a detection is correct when its box center falls
// inside a ground-truth box (boundary inclusive). All detections and
// lesions must belong to the same image, and detections must be
// malignant-class (run NMS and class filtering first).
MatchResult match_detections(std::span<const Detection> detections,
                             std::span<const LesionAnnotation> lesions);

// One image's worth of FROC input: post-NMS malignant detections plus the
// image's malignant lesions. Lesion-free images are legal and contribute to
// the false-positive denominator.
struct FrocImage {
  std::string image_id;
  std::vector<Detection> detections;
  std::vector<LesionAnnotation> lesions;
};

struct FrocPoint {
  double fp_per_image = 0.0;
  double sensitivity = 0.0;
  double threshold = 0.0;
};

// Pointwise confidence band: bounds[i] is the (lo, hi) central interval of
// sensitivity at fp_per_image = grid[i], read by step interpolation.
struct FrocBand {
  std::vector<double> grid;
  std::vector<std::pair<double, double>> bounds;
  std::int64_t degenerate_redraws = 0;
};

// Points are ordered by descending threshold; both fp_per_image and
// sensitivity are nondecreasing along the list.
struct FrocCurve {
  std::vector<FrocPoint> points;
  std::optional<FrocBand> band;
};

// Sweeps every distinct detection score as a threshold. At threshold t,
// sensitivity is the fraction of all lesions credited by a detection with
// score >= t and fp_per_image is the count of false-positive detections
// with score >= t divided by the total image count.
FrocCurve froc_curve(std::span<const FrocImage> images);

// Bootstrap over images: each replicate resamples images with replacement
// (lesions travel with their image) and reads sensitivity at each grid
// value as the largest sensitivity achieved with fp_per_image <= value
// (0 when no point qualifies). Replicates with zero lesions are redrawn and
// counted. Deterministic for a given seed, independent of evaluation order.
FrocBand froc_bootstrap_band(std::span<const FrocImage> images, const BootstrapConfig& cfg,
                             std::span<const double> grid);

// Default band grid: the curve's distinct achieved fp_per_image values plus
// the requested operating targets, ascending.
std::vector<double> froc_band_grid(const FrocCurve& curve, std::span<const double> targets);

// Highest sensitivity achievable at fp_per_image <= target, with the
// threshold that first reaches it. Returns (0.0, 1.0) when even the top
// threshold exceeds the target rate.
std::pair<double, double> operating_point(const FrocCurve& curve, double target_fp_per_image);

}  // namespace cadeval
