#include "cadeval/scoring.hpp"

#include <algorithm>

namespace cadeval {

bool breast_id_well_formed(const std::string& breast_id) {
  if (breast_id.size() < 3) return false;
  const char side = breast_id.back();
  return (side == 'L' || side == 'R') && breast_id[breast_id.size() - 2] == '_';
}

ImageScore image_score(const std::string& image_id, std::span<const Detection> detections) {
  double best = 0.0;
  for (const Detection& d : detections) {
    if (d.image_id != image_id) {
      throw InputError("image_score for '" + image_id + "' received a detection for '" +
                       d.image_id + "'");
    }
    if (d.cls == DetectionClass::malignant) best = std::max(best, d.score);
  }
  return {image_id, best};
}

double breast_score(std::span<const ImageScore> image_scores) {
  if (image_scores.empty()) throw InputError("breast_score requires at least one image score");
  double sum = 0.0;
  for (const ImageScore& s : image_scores) sum += s.score;
  return sum / static_cast<double>(image_scores.size());
}

double ensemble_score(std::span<const double> per_model_scores) {
  if (per_model_scores.empty()) {
    throw InputError("ensemble_score requires at least one model score");
  }
  double sum = 0.0;
  for (double s : per_model_scores) sum += s;
  return sum / static_cast<double>(per_model_scores.size());
}

}  // namespace cadeval
