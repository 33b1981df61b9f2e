#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <vector>

#include "cadeval/geometry.hpp"
#include "cadeval/rng.hpp"
#include "oracles.hpp"

using namespace cadeval;

namespace {

Detection det(double x0, double y0, double x1, double y1, double score,
              DetectionClass cls = DetectionClass::malignant, std::string image = "img0") {
  return Detection{BoundingBox(x0, y0, x1, y1), score, cls, std::move(image)};
}

// Random integer-coordinate box inside a small field, so overlaps and exact
// ties are common.
BoundingBox random_box(rng::Stream& rng, int field = 60, int max_side = 30) {
  const double x0 = static_cast<double>(rng.next_index(static_cast<std::uint64_t>(field)));
  const double y0 = static_cast<double>(rng.next_index(static_cast<std::uint64_t>(field)));
  const double w = 1.0 + static_cast<double>(rng.next_index(static_cast<std::uint64_t>(max_side)));
  const double h = 1.0 + static_cast<double>(rng.next_index(static_cast<std::uint64_t>(max_side)));
  return BoundingBox(x0, y0, x0 + w, y0 + h);
}

}  // namespace

TEST_CASE("bounding box rejects degenerate extents") {
  CHECK_THROWS_AS(BoundingBox(0, 0, 0, 10), InputError);
  CHECK_THROWS_AS(BoundingBox(0, 0, 10, 0), InputError);
  CHECK_THROWS_AS(BoundingBox(5, 0, 4, 10), InputError);
  CHECK_THROWS_AS(BoundingBox(0, 7, 10, 6), InputError);
  const double inf = std::numeric_limits<double>::infinity();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(BoundingBox(0, 0, inf, 10), InputError);
  CHECK_THROWS_AS(BoundingBox(nan, 0, 10, 10), InputError);
  CHECK_NOTHROW(BoundingBox(0, 0, 0.001, 0.001));
}

TEST_CASE("bounding box accessors") {
  const BoundingBox b(2, 3, 10, 7);
  CHECK(b.width() == 8.0);
  CHECK(b.height() == 4.0);
  CHECK(b.area() == 32.0);
  CHECK(b.center_x() == 6.0);
  CHECK(b.center_y() == 5.0);
  CHECK(b.contains(2, 3));    // corner, boundary inclusive
  CHECK(b.contains(10, 7));
  CHECK(b.contains(6, 5));
  CHECK_FALSE(b.contains(1.999, 5));
  CHECK_FALSE(b.contains(6, 7.001));
}

TEST_CASE("iou worked example: half-offset boxes give 1/3") {
  const BoundingBox a(0, 0, 10, 10);
  const BoundingBox b(5, 0, 15, 10);
  CHECK(iou(a, b) == 50.0 / 150.0);
  CHECK(iou(a, b) == oracle::lattice_iou(a, b));
}

TEST_CASE("iou identity, disjoint, touching") {
  const BoundingBox a(0, 0, 10, 10);
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, BoundingBox(20, 20, 30, 30)) == 0.0);
  // Shared edge has zero intersection area.
  CHECK(iou(a, BoundingBox(10, 0, 20, 10)) == 0.0);
  CHECK(iou(a, BoundingBox(0, 10, 10, 20)) == 0.0);
  // Shared corner only.
  CHECK(iou(a, BoundingBox(10, 10, 20, 20)) == 0.0);
}

TEST_CASE("iou nested boxes") {
  const BoundingBox outer(0, 0, 10, 10);
  const BoundingBox inner(2, 2, 7, 7);
  CHECK(iou(outer, inner) == 25.0 / 100.0);
}

TEST_CASE("iou matches lattice oracle on random integer boxes") {
  rng::Stream rng(1);
  for (int i = 0; i < 500; ++i) {
    const BoundingBox a = random_box(rng);
    const BoundingBox b = random_box(rng);
    CHECK(iou(a, b) == doctest::Approx(oracle::lattice_iou(a, b)).epsilon(1e-12));
    CHECK(iou(a, b) == iou(b, a));
    CHECK(iou(a, b) >= 0.0);
    CHECK(iou(a, b) <= 1.0);
    CHECK((iou(a, b) == 1.0) == (a == b));
  }
}

TEST_CASE("iou decays monotonically as one box slides away") {
  const BoundingBox fixed(0, 0, 20, 20);
  double prev = 1.0;
  for (int shift = 0; shift <= 25; ++shift) {
    const BoundingBox moved(shift, 0, shift + 20, 20);
    const double v = iou(fixed, moved);
    CHECK(v <= prev);
    prev = v;
  }
  CHECK(prev == 0.0);
}

TEST_CASE("center_in_box worked examples") {
  const BoundingBox lesion(0, 0, 25, 25);
  // Center (12.5, 12.5) inside.
  CHECK(center_in_box(det(5, 5, 20, 20, 0.5), lesion));
  CHECK_FALSE(center_in_box(det(6, 6, 20, 20, 0.5), BoundingBox(0, 0, 12.9, 25)));
  // Boundary inclusive: center exactly on the lesion edge counts.
  CHECK(center_in_box(det(20, 0, 30, 10, 0.5), lesion));  // center x = 25 = x_max
  CHECK(center_in_box(det(-5, -5, 5, 5, 0.5), lesion));   // center (0, 0) = corner
  CHECK_FALSE(center_in_box(det(20.001, 0, 30.001, 10, 0.5), lesion));
}

TEST_CASE("center_in_box ignores detection box size") {
  const BoundingBox lesion(100, 100, 140, 140);
  rng::Stream rng(2);
  for (int i = 0; i < 200; ++i) {
    const double cx = 80.0 + rng.next_double() * 80.0;
    const double cy = 80.0 + rng.next_double() * 80.0;
    const double half_a = 0.5 + rng.next_double() * 10.0;
    const double half_b = 0.5 + rng.next_double() * 40.0;
    const Detection small = det(cx - half_a, cy - half_a, cx + half_a, cy + half_a, 0.5);
    const Detection large = det(cx - half_b, cy - half_b, cx + half_b, cy + half_b, 0.5);
    CHECK(center_in_box(small, lesion) == center_in_box(large, lesion));
    CHECK(center_in_box(small, lesion) == lesion.contains(cx, cy));
  }
}

TEST_CASE("nms on empty input") {
  CHECK(nms({}).empty());
}

TEST_CASE("nms keeps the best of two near-duplicates") {
  std::vector<Detection> dets{det(0, 0, 10, 10, 0.4), det(1, 0, 11, 10, 0.9)};
  const auto kept = nms(dets, {0.5});
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].score == 0.9);
  CHECK(kept[0].box == BoundingBox(1, 0, 11, 10));
}

TEST_CASE("nms with threshold 1.0 keeps everything") {
  std::vector<Detection> dets;
  rng::Stream rng(3);
  for (int i = 0; i < 20; ++i) {
    dets.push_back(det(0, 0, 10, 10, rng.next_double()));
  }
  // IoU of identical boxes is 1.0, never strictly above 1.0.
  CHECK(nms(dets, {1.0}).size() == dets.size());
}

TEST_CASE("nms treats classes independently") {
  std::vector<Detection> dets{det(0, 0, 10, 10, 0.9, DetectionClass::malignant),
                              det(0, 0, 10, 10, 0.8, DetectionClass::benign),
                              det(0.5, 0, 10.5, 10, 0.7, DetectionClass::benign)};
  const auto kept = nms(dets, {0.1});
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].cls == DetectionClass::malignant);
  CHECK(kept[1].cls == DetectionClass::benign);
  CHECK(kept[1].score == 0.8);
}

TEST_CASE("nms validates input") {
  std::vector<Detection> mixed{det(0, 0, 10, 10, 0.9, DetectionClass::malignant, "a"),
                               det(0, 0, 10, 10, 0.8, DetectionClass::malignant, "b")};
  CHECK_THROWS_AS(nms(mixed), InputError);
  std::vector<Detection> ok{det(0, 0, 10, 10, 0.9)};
  CHECK_THROWS_AS(nms(ok, {-0.01}), ConfigError);
  CHECK_THROWS_AS(nms(ok, {1.01}), ConfigError);
}

TEST_CASE("nms matches brute-force oracle on random inputs") {
  rng::Stream rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.next_index(30);
    std::vector<Detection> dets;
    for (std::size_t i = 0; i < n; ++i) {
      Detection d = det(0, 0, 1, 1, 0.0);
      d.box = random_box(rng, 40, 20);
      // Quantized scores make exact ties routine.
      d.score = static_cast<double>(rng.next_index(8)) / 8.0;
      d.cls = rng.next_index(2) ? DetectionClass::malignant : DetectionClass::benign;
      dets.push_back(std::move(d));
    }
    const double threshold = std::vector<double>{0.1, 0.3, 0.5}[trial % 3];
    const auto kept = nms(dets, {threshold});
    const auto expected = oracle::brute_force_nms(dets, threshold);
    CHECK(oracle::same_detections(kept, expected));
  }
}

TEST_CASE("nms output is invariant to input order") {
  rng::Stream rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Detection> dets;
    for (int i = 0; i < 15; ++i) {
      Detection d = det(0, 0, 1, 1, static_cast<double>(rng.next_index(4)) / 4.0);
      d.box = random_box(rng, 30, 15);
      dets.push_back(std::move(d));
    }
    const auto baseline = nms(dets);
    for (int s = 0; s < 5; ++s) {
      // Fisher-Yates with the test stream.
      for (std::size_t i = dets.size(); i > 1; --i) {
        std::swap(dets[i - 1], dets[rng.next_index(i)]);
      }
      CHECK(oracle::same_detections(nms(dets), baseline));
    }
  }
}

TEST_CASE("nms is idempotent and keeps a subset") {
  rng::Stream rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Detection> dets;
    for (int i = 0; i < 20; ++i) {
      Detection d = det(0, 0, 1, 1, rng.next_double());
      d.box = random_box(rng, 30, 15);
      dets.push_back(std::move(d));
    }
    const auto kept = nms(dets, {0.3});
    CHECK(kept.size() <= dets.size());
    // Every kept detection exists in the input.
    for (const Detection& k : kept) {
      const bool found = std::any_of(dets.begin(), dets.end(), [&](const Detection& d) {
        return d.box == k.box && d.score == k.score && d.cls == k.cls;
      });
      CHECK(found);
    }
    // No two survivors of one class overlap above the threshold.
    for (std::size_t i = 0; i < kept.size(); ++i) {
      for (std::size_t j = i + 1; j < kept.size(); ++j) {
        if (kept[i].cls == kept[j].cls) {
          CHECK(iou(kept[i].box, kept[j].box) <= 0.3);
        }
      }
    }
    CHECK(oracle::same_detections(nms(kept, {0.3}), kept));
  }
}

TEST_CASE("nms keeps the top-scoring detection of each class") {
  rng::Stream rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Detection> dets;
    for (int i = 0; i < 12; ++i) {
      Detection d = det(0, 0, 1, 1, rng.next_double());
      d.box = random_box(rng, 25, 12);
      d.cls = rng.next_index(2) ? DetectionClass::malignant : DetectionClass::benign;
      dets.push_back(std::move(d));
    }
    const auto kept = nms(dets);
    for (DetectionClass cls : {DetectionClass::benign, DetectionClass::malignant}) {
      const Detection* best = nullptr;
      for (const Detection& d : dets) {
        if (d.cls == cls && (!best || oracle::ranks_before(d, *best))) best = &d;
      }
      if (!best) continue;
      const bool survived = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
        return k.cls == cls && k.box == best->box && k.score == best->score;
      });
      CHECK(survived);
    }
  }
}

TEST_CASE("detection class names round-trip") {
  CHECK(to_string(DetectionClass::benign) == std::string("benign"));
  CHECK(to_string(DetectionClass::malignant) == std::string("malignant"));
  CHECK(detection_class_from_string("benign") == DetectionClass::benign);
  CHECK(detection_class_from_string("malignant") == DetectionClass::malignant);
  CHECK_THROWS_AS(detection_class_from_string("Malignant"), InputError);
  CHECK_THROWS_AS(detection_class_from_string(""), InputError);
}
