#include "cadeval/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "cadeval/errors.hpp"

namespace cadeval {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

[[noreturn]] void located(const std::string& where, const std::string& what) {
  throw InputError(where + ": " + what);
}

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) located(path, "cannot open for reading");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    located(path, std::string("JSON parse error: ") + e.what());
  }
}

void check_format_version(const json& doc, const std::string& where) {
  if (!doc.contains("format_version")) return;
  const json& v = doc.at("format_version");
  if (!v.is_number_integer() || v.get<int>() != kFormatVersion) {
    located(where, "unsupported format_version (expected " + std::to_string(kFormatVersion) + ")");
  }
}

double require_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_number()) {
    located(where, std::string("missing or non-numeric field '") + key + "'");
  }
  return obj.at(key).get<double>();
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_string()) {
    located(where, std::string("missing or non-string field '") + key + "'");
  }
  return obj.at(key).get<std::string>();
}

BoundingBox parse_box(const json& obj, const std::string& where) {
  const double x0 = require_number(obj, "x_min", where);
  const double y0 = require_number(obj, "y_min", where);
  const double x1 = require_number(obj, "x_max", where);
  const double y1 = require_number(obj, "y_max", where);
  try {
    return BoundingBox(x0, y0, x1, y1);
  } catch (const InputError& e) {
    located(where, e.what());
  }
}

}  // namespace

std::vector<DetectionRecord> read_detections_file(const std::string& path,
                                                  const std::string& default_model_id) {
  std::ifstream in(path);
  if (!in) located(path, "cannot open for reading");

  std::vector<DetectionRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = path + ":" + std::to_string(line_no);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      located(where, std::string("JSON parse error: ") + e.what());
    }
    if (!row.is_object()) located(where, "expected a JSON object");
    if (row.contains("format_version")) {
      if (line_no != 1 || row.size() != 1) {
        located(where, "format_version record must be the first line and stand alone");
      }
      check_format_version(row, where);
      continue;
    }

    DetectionRecord rec{Detection{parse_box(row, where), 0.0, DetectionClass::malignant,
                                  require_string(row, "image_id", where)},
                        default_model_id};
    rec.detection.score = require_number(row, "score", where);
    if (!(rec.detection.score >= 0.0 && rec.detection.score <= 1.0)) {
      located(where, "score must be in [0, 1]");
    }
    const std::string cls = require_string(row, "class", where);
    try {
      rec.detection.cls = detection_class_from_string(cls);
    } catch (const InputError& e) {
      located(where, e.what());
    }
    if (row.contains("model_id")) {
      if (!row.at("model_id").is_string()) located(where, "model_id must be a string");
      rec.model_id = row.at("model_id").get<std::string>();
    }
    if (rec.model_id.empty()) located(where, "missing model_id");
    rec.line = line_no;
    records.push_back(std::move(rec));
  }
  return records;
}

void write_detections_file(const std::string& path, std::span<const DetectionRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) located(path, "cannot open for writing");
  out << ordered_json{{"format_version", kFormatVersion}}.dump() << "\n";
  for (const DetectionRecord& rec : records) {
    ordered_json row;
    row["image_id"] = rec.detection.image_id;
    row["x_min"] = rec.detection.box.x_min;
    row["y_min"] = rec.detection.box.y_min;
    row["x_max"] = rec.detection.box.x_max;
    row["y_max"] = rec.detection.box.y_max;
    row["score"] = rec.detection.score;
    row["class"] = to_string(rec.detection.cls);
    row["model_id"] = rec.model_id;
    out << row.dump() << "\n";
  }
  if (!out) located(path, "write failed");
}

Dataset load_dataset(const std::string& manifest_path,
                     std::span<const std::string> detection_paths) {
  const json doc = parse_file(manifest_path);
  if (!doc.is_object()) located(manifest_path, "manifest must be a JSON object");
  check_format_version(doc, manifest_path);

  Dataset ds;

  // Breast table first: labels keyed by breast_id.
  std::map<std::string, int> breast_label;
  if (!doc.contains("breasts") || !doc.at("breasts").is_array()) {
    located(manifest_path, "missing 'breasts' array");
  }
  std::vector<std::string> breast_order;
  for (std::size_t i = 0; i < doc.at("breasts").size(); ++i) {
    const std::string where = manifest_path + ": breasts[" + std::to_string(i) + "]";
    const json& b = doc.at("breasts").at(i);
    if (!b.is_object()) located(where, "expected an object");
    const std::string id = require_string(b, "breast_id", where);
    if (!breast_id_well_formed(id)) {
      located(where, "breast_id '" + id + "' must end in _L or _R");
    }
    const double label = require_number(b, "label", where);
    if (label != 0.0 && label != 1.0) located(where, "label must be 0 or 1");
    if (!breast_label.emplace(id, static_cast<int>(label)).second) {
      located(where, "duplicate breast_id '" + id + "'");
    }
    breast_order.push_back(id);
  }

  // Images with inline annotations.
  if (!doc.contains("images") || !doc.at("images").is_array()) {
    located(manifest_path, "missing 'images' array");
  }
  std::set<std::string> image_ids;
  std::set<std::string> lesion_ids;
  std::vector<ImageInfo> images;
  for (std::size_t i = 0; i < doc.at("images").size(); ++i) {
    const std::string where = manifest_path + ": images[" + std::to_string(i) + "]";
    const json& im = doc.at("images").at(i);
    if (!im.is_object()) located(where, "expected an object");
    ImageInfo info;
    info.image_id = require_string(im, "image_id", where);
    if (!image_ids.insert(info.image_id).second) {
      located(where, "duplicate image_id '" + info.image_id + "'");
    }
    info.breast_id = require_string(im, "breast_id", where);
    if (breast_label.find(info.breast_id) == breast_label.end()) {
      located(where, "unknown breast_id '" + info.breast_id + "'");
    }
    if (im.contains("view")) info.view = require_string(im, "view", where);
    if (im.contains("width")) info.width = static_cast<int>(require_number(im, "width", where));
    if (im.contains("height")) info.height = static_cast<int>(require_number(im, "height", where));
    if (im.contains("annotations")) {
      if (!im.at("annotations").is_array()) located(where, "'annotations' must be an array");
      for (std::size_t a = 0; a < im.at("annotations").size(); ++a) {
        const std::string awhere = where + ".annotations[" + std::to_string(a) + "]";
        const json& ann = im.at("annotations").at(a);
        if (!ann.is_object()) located(awhere, "expected an object");
        const std::string cls = require_string(ann, "class", awhere);
        DetectionClass parsed;
        try {
          parsed = detection_class_from_string(cls);
        } catch (const InputError& e) {
          located(awhere, e.what());
        }
        if (parsed == DetectionClass::benign) {
          ++ds.stats.benign_annotations_dropped;
          continue;
        }
        LesionAnnotation lesion{require_string(ann, "lesion_id", awhere), info.image_id,
                                parse_box(ann, awhere)};
        if (!lesion_ids.insert(lesion.lesion_id).second) {
          located(awhere, "duplicate lesion_id '" + lesion.lesion_id + "'");
        }
        info.lesions.push_back(std::move(lesion));
      }
    }
    images.push_back(std::move(info));
  }

  // Exclusions name breasts or images; a breast exclusion removes all its
  // images. Applied before the semantic checks below.
  std::set<std::string> excluded_breasts;
  std::set<std::string> excluded_images;
  if (doc.contains("exclusions")) {
    if (!doc.at("exclusions").is_array()) located(manifest_path, "'exclusions' must be an array");
    for (std::size_t i = 0; i < doc.at("exclusions").size(); ++i) {
      const std::string where = manifest_path + ": exclusions[" + std::to_string(i) + "]";
      const json& e = doc.at("exclusions").at(i);
      if (!e.is_string()) located(where, "expected an id string");
      const std::string id = e.get<std::string>();
      if (breast_label.count(id) != 0) {
        excluded_breasts.insert(id);
      } else if (image_ids.count(id) != 0) {
        excluded_images.insert(id);
      } else {
        located(where, "exclusion '" + id + "' names no known breast or image");
      }
    }
  }
  for (const ImageInfo& info : images) {
    if (excluded_breasts.count(info.breast_id) != 0) excluded_images.insert(info.image_id);
  }

  std::map<std::string, std::size_t> breast_image_count;
  for (const ImageInfo& info : images) ++breast_image_count[info.breast_id];

  std::map<std::string, std::vector<std::string>> breast_images;
  for (ImageInfo& info : images) {
    if (excluded_images.count(info.image_id) != 0) {
      ++ds.stats.excluded_images;
      continue;
    }
    breast_images[info.breast_id].push_back(info.image_id);
    ds.images.push_back(std::move(info));
  }

  for (const std::string& id : breast_order) {
    if (breast_image_count.count(id) == 0) {
      located(manifest_path, "breast '" + id + "' has no images");
    }
    if (excluded_breasts.count(id) != 0) {
      ++ds.stats.excluded_breasts;
      continue;
    }
    auto it = breast_images.find(id);
    if (it == breast_images.end()) {
      // Every image of this breast was excluded individually.
      ++ds.stats.excluded_breasts;
      continue;
    }
    ds.breasts.push_back({id, std::move(it->second), breast_label.at(id)});
  }

  // Label consistency on the post-exclusion dataset.
  for (const ImageInfo& info : ds.images) {
    if (info.lesions.empty()) continue;
    if (breast_label.at(info.breast_id) != 1) {
      located(manifest_path, "breast '" + info.breast_id + "' is labeled 0 but image '" +
                                 info.image_id + "' has malignant lesion '" +
                                 info.lesions.front().lesion_id + "'");
    }
  }

  // Detection sources: manifest-relative refs plus extra paths.
  struct Source {
    std::string path;
    std::string default_model;
  };
  std::vector<Source> sources;
  if (doc.contains("detections_source")) {
    if (!doc.at("detections_source").is_array()) {
      located(manifest_path, "'detections_source' must be an array");
    }
    const std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
    for (std::size_t i = 0; i < doc.at("detections_source").size(); ++i) {
      const std::string where = manifest_path + ": detections_source[" + std::to_string(i) + "]";
      const json& srcj = doc.at("detections_source").at(i);
      if (!srcj.is_object()) located(where, "expected an object");
      Source src;
      src.path = (base / require_string(srcj, "path", where)).string();
      if (srcj.contains("model_id")) src.default_model = require_string(srcj, "model_id", where);
      sources.push_back(std::move(src));
    }
  }
  for (const std::string& p : detection_paths) sources.push_back({p, ""});

  std::set<std::string> kept_images;
  for (const ImageInfo& info : ds.images) kept_images.insert(info.image_id);
  std::set<std::string> models;
  for (const Source& src : sources) {
    for (DetectionRecord& rec : read_detections_file(src.path, src.default_model)) {
      const std::string& img = rec.detection.image_id;
      if (kept_images.count(img) == 0) {
        if (excluded_images.count(img) != 0) {
          ++ds.stats.detections_dropped_excluded;
          continue;
        }
        located(src.path + ":" + std::to_string(rec.line),
                "detection references unknown image_id '" + img + "'");
      }
      models.insert(rec.model_id);
      ds.detections[img][rec.model_id].push_back(std::move(rec.detection));
    }
  }
  ds.model_ids.assign(models.begin(), models.end());
  return ds;
}

std::vector<BreastScoreRow> breast_scores(const Dataset& dataset, bool apply_nms,
                                          const NmsConfig& cfg) {
  // Ensemble image scores first, then collapse each breast.
  std::map<std::string, double> image_ensemble;
  for (const ImageInfo& info : dataset.images) {
    const auto by_model = dataset.detections.find(info.image_id);
    std::vector<double> model_scores;
    model_scores.reserve(dataset.model_ids.size());
    for (const std::string& model : dataset.model_ids) {
      double score = 0.0;
      if (by_model != dataset.detections.end()) {
        const auto dets = by_model->second.find(model);
        if (dets != by_model->second.end()) {
          if (apply_nms) {
            score = image_score(info.image_id, nms(dets->second, cfg)).score;
          } else {
            score = image_score(info.image_id, dets->second).score;
          }
        }
      }
      model_scores.push_back(score);
    }
    image_ensemble[info.image_id] = model_scores.empty() ? 0.0 : ensemble_score(model_scores);
  }

  std::vector<BreastScoreRow> rows;
  rows.reserve(dataset.breasts.size());
  for (const BreastCase& breast : dataset.breasts) {
    std::vector<ImageScore> scores;
    scores.reserve(breast.image_ids.size());
    for (const std::string& img : breast.image_ids) {
      scores.push_back({img, image_ensemble.at(img)});
    }
    rows.push_back({breast.breast_id, breast.label, breast_score(scores)});
  }
  return rows;
}

std::vector<ScoredCase> to_scored_cases(std::span<const BreastScoreRow> rows) {
  std::vector<ScoredCase> cases;
  cases.reserve(rows.size());
  for (const BreastScoreRow& row : rows) cases.push_back({row.score, row.label});
  return cases;
}

std::string resolve_model_id(const Dataset& dataset, const std::string& requested) {
  if (!requested.empty()) {
    if (std::find(dataset.model_ids.begin(), dataset.model_ids.end(), requested) ==
        dataset.model_ids.end()) {
      throw InputError("unknown model_id '" + requested + "'");
    }
    return requested;
  }
  if (dataset.model_ids.empty()) return "";
  if (dataset.model_ids.size() == 1) return dataset.model_ids.front();
  std::string listing;
  for (const std::string& m : dataset.model_ids) {
    if (!listing.empty()) listing += ", ";
    listing += m;
  }
  throw InputError("dataset has several models (" + listing + "); pick one with --model");
}

std::vector<FrocImage> froc_images(const Dataset& dataset, const std::string& model_id,
                                   bool apply_nms, const NmsConfig& cfg) {
  if (!model_id.empty() &&
      std::find(dataset.model_ids.begin(), dataset.model_ids.end(), model_id) ==
          dataset.model_ids.end()) {
    throw InputError("unknown model_id '" + model_id + "'");
  }
  std::vector<FrocImage> out;
  out.reserve(dataset.images.size());
  for (const ImageInfo& info : dataset.images) {
    FrocImage fi;
    fi.image_id = info.image_id;
    fi.lesions = info.lesions;
    const auto by_model = dataset.detections.find(info.image_id);
    if (by_model != dataset.detections.end() && !model_id.empty()) {
      const auto dets = by_model->second.find(model_id);
      if (dets != by_model->second.end()) {
        std::vector<Detection> post = apply_nms ? nms(dets->second, cfg) : dets->second;
        for (Detection& d : post) {
          if (d.cls == DetectionClass::malignant) fi.detections.push_back(std::move(d));
        }
      }
    }
    out.push_back(std::move(fi));
  }
  return out;
}

}  // namespace cadeval
