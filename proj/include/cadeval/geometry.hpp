#pragma once

#include <compare>
#include <span>
#include <string>
#include <vector>

#include "cadeval/errors.hpp"

namespace cadeval {

/// Axis-aligned rectangle in continuous pixel coordinates, origin top-left.
/// Construction rejects zero-area and non-finite boxes. Area uses the
/// continuous convention (no +1 pixel term).
struct BoundingBox {
  double x_min;
  double y_min;
  double x_max;
  double y_max;

  BoundingBox(double x0, double y0, double x1, double y1);

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }

  /// Boundary-inclusive point containment.
  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }

  friend auto operator<=>(const BoundingBox&, const BoundingBox&) = default;
};

enum class DetectionClass { benign, malignant };

const char* to_string(DetectionClass cls);
DetectionClass detection_class_from_string(const std::string& name);

/// One scored, classed box emitted by a detector for one image.
struct Detection {
  BoundingBox box;
  double score = 0.0;  // confidence in [0, 1]
  DetectionClass cls = DetectionClass::malignant;
  std::string image_id;
};

/// Intersection over union; symmetric, 0 for disjoint boxes, 1 iff equal.
double iou(const BoundingBox& a, const BoundingBox& b);

/// True iff the center of d.box lies inside g, boundary inclusive.
bool center_in_box(const Detection& d, const BoundingBox& g);

struct NmsConfig {
  double iou_threshold = 0.1;
};

/// Greedy per-class non-maximum suppression. Detections are ranked by score
/// descending; equal scores are ordered by box coordinates
/// (x_min, y_min, x_max, y_max), then class, so the output does not depend
/// on input order. A kept detection suppresses every lower-ranked detection
/// of the same class with IoU strictly above cfg.iou_threshold. The output
/// preserves detection fields and is sorted in the ranking order.
///
/// Throws InputError if the detections span more than one image_id and
/// ConfigError if the threshold is outside [0, 1].
std::vector<Detection> nms(std::vector<Detection> detections, const NmsConfig& cfg = {});

}  // namespace cadeval
