#pragma once

#include <span>
#include <string>
#include <vector>

#include "cadeval/geometry.hpp"

namespace cadeval {

struct ImageScore {
  std::string image_id;
  double score = 0.0;  // in [0, 1]
};

/// One laterality of one patient: its images and the binary cancer label.
struct BreastCase {
  std::string breast_id;  // "<patient>_L" or "<patient>_R"
  std::vector<std::string> image_ids;
  int label = 0;  // 0 negative, 1 malignant
};

/// True iff breast_id ends in "_L" or "_R" with a nonempty patient part.
bool breast_id_well_formed(const std::string& breast_id);

/// Collapses one image's (post-NMS) detections to a single score: the
/// maximum over malignant detections. Benign detections are ignored; an
/// image with no malignant detection scores 0.0, which ranks it below any
/// image with a positive malignant detection.
///
/// Throws InputError if a detection carries a different image_id.
ImageScore image_score(const std::string& image_id, std::span<const Detection> detections);

/// Arithmetic mean of the image scores of one breast. Throws InputError on
/// an empty list.
double breast_score(std::span<const ImageScore> image_scores);

/// Arithmetic mean over per-model scores of the same image. Throws
/// InputError on an empty list.
double ensemble_score(std::span<const double> per_model_scores);

}  // namespace cadeval
