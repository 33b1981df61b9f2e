#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cadeval/froc.hpp"
#include "cadeval/geometry.hpp"
#include "cadeval/roc.hpp"
#include "cadeval/scoring.hpp"

namespace cadeval {

struct ImageInfo {
  std::string image_id;
  std::string breast_id;
  std::string view;
  int width = 0;   // 0 when the manifest omits it
  int height = 0;
  std::vector<LesionAnnotation> lesions;  // malignant only; benign dropped at ingestion
};

// Ingestion bookkeeping, reported so curation steps stay visible.
struct LoadStats {
  std::size_t benign_annotations_dropped = 0;
  std::size_t excluded_breasts = 0;
  std::size_t excluded_images = 0;
  std::size_t detections_dropped_excluded = 0;
};

// Fully cross-referenced dataset: exclusions already applied, every id
// resolved, breast labels consistent with lesion annotations.
struct Dataset {
  std::vector<ImageInfo> images;   // manifest order
  std::vector<BreastCase> breasts; // manifest order
  // image_id -> model_id -> detections (file order)
  std::map<std::string, std::map<std::string, std::vector<Detection>>> detections;
  std::vector<std::string> model_ids;  // sorted, distinct
  LoadStats stats;
};

// Loads a JSON manifest plus its referenced detection files and any extra
// detection files. Manifest-relative paths resolve against the manifest's
// directory; extra paths resolve as given. Every malformed or dangling
// record raises an InputError naming the file and location. Detections on
// excluded images are dropped and counted; detections on unknown images are
// errors.
Dataset load_dataset(const std::string& manifest_path,
                     std::span<const std::string> detection_paths = {});

// One line of a detections file.
struct DetectionRecord {
  Detection detection;
  std::string model_id;
  int line = 0;  // source line number, filled by the reader
};

// JSON-lines interchange: one object per detection with keys image_id,
// x_min, y_min, x_max, y_max, score, class, model_id. A leading
// {"format_version": 1} record is written always and accepted when absent.
// default_model_id fills records that omit model_id; with no default such
// records are errors.
std::vector<DetectionRecord> read_detections_file(const std::string& path,
                                                  const std::string& default_model_id = "");
void write_detections_file(const std::string& path, std::span<const DetectionRecord> records);

struct BreastScoreRow {
  std::string breast_id;
  int label = 0;
  double score = 0.0;
};

// Full aggregation pipeline: per image and model, optional NMS, then the
// max-malignant image score; models ensemble by image-level mean over the
// dataset's whole model set (a model with no detections on an image
// contributes 0); breasts average their images. Zero loaded models scores
// every breast 0.
std::vector<BreastScoreRow> breast_scores(const Dataset& dataset, bool apply_nms,
                                          const NmsConfig& cfg = {});

std::vector<ScoredCase> to_scored_cases(std::span<const BreastScoreRow> rows);

// "" picks the dataset's only model (or stands for no detections when none
// were loaded); with several models the caller must name one.
std::string resolve_model_id(const Dataset& dataset, const std::string& requested);

// Per-image FROC inputs for one model: optional NMS, then malignant
// detections only. Every image appears, including lesion-free ones.
std::vector<FrocImage> froc_images(const Dataset& dataset, const std::string& model_id,
                                   bool apply_nms, const NmsConfig& cfg = {});

}  // namespace cadeval
