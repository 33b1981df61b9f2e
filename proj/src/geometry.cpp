#include "cadeval/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace cadeval {

BoundingBox::BoundingBox(double x0, double y0, double x1, double y1)
    : x_min(x0), y_min(y0), x_max(x1), y_max(y1) {
  if (!(std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
        std::isfinite(y_max))) {
    throw InputError("bounding box has non-finite coordinates");
  }
  if (!(x_min < x_max && y_min < y_max)) {
    throw InputError("bounding box is empty or inverted: [" + std::to_string(x_min) + ", " +
                     std::to_string(y_min) + ", " + std::to_string(x_max) + ", " +
                     std::to_string(y_max) + "]");
  }
}

const char* to_string(DetectionClass cls) {
  return cls == DetectionClass::malignant ? "malignant" : "benign";
}

DetectionClass detection_class_from_string(const std::string& name) {
  if (name == "malignant") return DetectionClass::malignant;
  if (name == "benign") return DetectionClass::benign;
  throw InputError("unknown detection class '" + name + "' (expected 'malignant' or 'benign')");
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

bool center_in_box(const Detection& d, const BoundingBox& g) {
  return g.contains(d.box.center_x(), d.box.center_y());
}

namespace {

// Score descending, then box coordinates, then class.
bool ranks_before(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  return std::tie(a.box, a.cls) < std::tie(b.box, b.cls);
}

}  // namespace

std::vector<Detection> nms(std::vector<Detection> detections, const NmsConfig& cfg) {
  if (!(cfg.iou_threshold >= 0.0 && cfg.iou_threshold <= 1.0)) {
    throw ConfigError("nms iou_threshold must be in [0, 1], got " +
                      std::to_string(cfg.iou_threshold));
  }
  for (const Detection& d : detections) {
    if (d.image_id != detections.front().image_id) {
      throw InputError("nms input mixes image_ids '" + detections.front().image_id + "' and '" +
                       d.image_id + "'");
    }
  }

  std::sort(detections.begin(), detections.end(), ranks_before);

  std::vector<char> suppressed(detections.size(), 0);
  std::vector<Detection> kept;
  kept.reserve(detections.size());
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (suppressed[i]) continue;
    kept.push_back(detections[i]);
    for (std::size_t j = i + 1; j < detections.size(); ++j) {
      if (suppressed[j] || detections[j].cls != detections[i].cls) continue;
      if (iou(detections[i].box, detections[j].box) > cfg.iou_threshold) suppressed[j] = 1;
    }
  }
  return kept;
}

}  // namespace cadeval
