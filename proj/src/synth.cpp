#include "cadeval/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "json.hpp"

#include "cadeval/dataset.hpp"
#include "cadeval/errors.hpp"
#include "cadeval/rng.hpp"

namespace cadeval {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Fixed layout: 1000x1000 images; 40x40 lesions on a 60px-pitch row at
// y = 5; 20x20 false positives on a 30px grid from y = 60 down. The two
// lattices are disjoint and self-disjoint, so detections never overlap.
constexpr int kImageSize = 1000;
constexpr int kLesionSlots = 16;
constexpr int kFpCols = 33;
constexpr int kFpRows = 31;

std::string pad_id(const char* prefix, int i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return prefix + digits;
}

double draw_score(const ScoreDist& dist, rng::Stream& stream) {
  switch (dist.kind) {
    case ScoreDist::Kind::fixed:
      return dist.a;
    case ScoreDist::Kind::uniform:
      return stream.next_uniform(dist.a, dist.b);
    case ScoreDist::Kind::normal:
      return std::clamp(dist.a + dist.b * stream.next_normal(), 0.0, 1.0);
  }
  return dist.a;
}

void validate(const ScoreDist& dist) {
  switch (dist.kind) {
    case ScoreDist::Kind::fixed:
      if (!(dist.a >= 0.0 && dist.a <= 1.0)) throw ConfigError("fixed score must be in [0, 1]");
      break;
    case ScoreDist::Kind::uniform:
      if (!(0.0 <= dist.a && dist.a <= dist.b && dist.b <= 1.0)) {
        throw ConfigError("uniform score range must satisfy 0 <= lo <= hi <= 1");
      }
      break;
    case ScoreDist::Kind::normal:
      if (!(dist.b >= 0.0) || !std::isfinite(dist.a) || !std::isfinite(dist.b)) {
        throw ConfigError("normal score needs finite mean and sd >= 0");
      }
      break;
  }
}

}  // namespace

void validate(const SynthSpec& spec) {
  if (spec.n_images < 1) throw ConfigError("n_images must be >= 1");
  if (spec.n_lesions < 0) throw ConfigError("n_lesions must be >= 0");
  if (spec.n_lesions > kLesionSlots * spec.n_images) {
    throw ConfigError("n_lesions exceeds lesion capacity of " +
                      std::to_string(kLesionSlots * spec.n_images));
  }
  long tp_total = 0;
  long fp_total = 0;
  for (const SynthLayer& layer : spec.layers) {
    if (layer.count < 0) throw ConfigError("layer count must be >= 0");
    validate(layer.score);
    (layer.kind == SynthLayer::Kind::tp ? tp_total : fp_total) += layer.count;
  }
  if (tp_total > spec.n_lesions) {
    throw ConfigError("tp layer counts total " + std::to_string(tp_total) + " but only " +
                      std::to_string(spec.n_lesions) + " lesions exist");
  }
  if (fp_total > static_cast<long>(kFpCols) * kFpRows * spec.n_images) {
    throw ConfigError("fp layer counts exceed false-positive capacity of " +
                      std::to_string(static_cast<long>(kFpCols) * kFpRows * spec.n_images));
  }
}

namespace {

ScoreDist parse_dist(const json& value, const std::string& where) {
  ScoreDist dist;
  if (!value.is_object() || value.size() != 1) {
    throw InputError(where + ": score distribution must be exactly one of "
                             "{\"fixed\": v}, {\"uniform\": [lo, hi]}, {\"normal\": [mean, sd]}");
  }
  if (value.contains("fixed")) {
    if (!value.at("fixed").is_number()) throw InputError(where + ": fixed value must be a number");
    dist.kind = ScoreDist::Kind::fixed;
    dist.a = value.at("fixed").get<double>();
    return dist;
  }
  const char* key = value.contains("uniform") ? "uniform"
                    : value.contains("normal") ? "normal"
                                               : nullptr;
  if (key == nullptr) throw InputError(where + ": unknown score distribution kind");
  const json& pair = value.at(key);
  if (!pair.is_array() || pair.size() != 2 || !pair.at(0).is_number() || !pair.at(1).is_number()) {
    throw InputError(where + ": '" + key + "' takes an array of two numbers");
  }
  dist.kind = key[0] == 'u' ? ScoreDist::Kind::uniform : ScoreDist::Kind::normal;
  dist.a = pair.at(0).get<double>();
  dist.b = pair.at(1).get<double>();
  return dist;
}

}  // namespace

SynthSpec parse_synth_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open for reading");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path + ": JSON parse error: " + e.what());
  }
  if (!doc.is_object()) throw InputError(path + ": spec must be a JSON object");
  if (doc.contains("format_version") &&
      (!doc.at("format_version").is_number_integer() || doc.at("format_version").get<int>() != 1)) {
    throw InputError(path + ": unsupported format_version");
  }

  SynthSpec spec;
  const auto get_int = [&](const char* key, int fallback) {
    if (!doc.contains(key)) return fallback;
    if (!doc.at(key).is_number_integer()) {
      throw InputError(path + ": '" + key + "' must be an integer");
    }
    return doc.at(key).get<int>();
  };
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer()) {
      throw InputError(path + ": 'seed' must be an integer");
    }
    spec.seed = doc.at("seed").get<std::uint64_t>();
  }
  spec.n_images = get_int("n_images", 1);
  spec.n_lesions = get_int("n_lesions", 0);

  const int n_tp = get_int("n_tp", 0);
  if (n_tp > 0) {
    SynthLayer layer{SynthLayer::Kind::tp, n_tp, {}};
    if (doc.contains("tp_score")) layer.score = parse_dist(doc.at("tp_score"), path);
    else layer.score = {ScoreDist::Kind::fixed, 1.0, 0.0};
    spec.layers.push_back(layer);
  }
  if (doc.contains("fp_rate")) {
    if (!doc.at("fp_rate").is_number()) throw InputError(path + ": 'fp_rate' must be a number");
    const double rate = doc.at("fp_rate").get<double>();
    if (rate < 0.0) throw InputError(path + ": 'fp_rate' must be >= 0");
    SynthLayer layer{SynthLayer::Kind::fp,
                     static_cast<int>(std::floor(rate * spec.n_images + 0.5)), {}};
    if (doc.contains("fp_score")) layer.score = parse_dist(doc.at("fp_score"), path);
    else layer.score = {ScoreDist::Kind::uniform, 0.0, 1.0};
    if (layer.count > 0) spec.layers.push_back(layer);
  }
  if (doc.contains("layers")) {
    if (!doc.at("layers").is_array()) throw InputError(path + ": 'layers' must be an array");
    for (std::size_t i = 0; i < doc.at("layers").size(); ++i) {
      const std::string where = path + ": layers[" + std::to_string(i) + "]";
      const json& lj = doc.at("layers").at(i);
      if (!lj.is_object()) throw InputError(where + ": expected an object");
      SynthLayer layer;
      const std::string kind =
          lj.contains("kind") && lj.at("kind").is_string() ? lj.at("kind").get<std::string>() : "";
      if (kind == "tp") layer.kind = SynthLayer::Kind::tp;
      else if (kind == "fp") layer.kind = SynthLayer::Kind::fp;
      else throw InputError(where + ": 'kind' must be \"tp\" or \"fp\"");
      if (!lj.contains("count") || !lj.at("count").is_number_integer()) {
        throw InputError(where + ": 'count' must be an integer");
      }
      layer.count = lj.at("count").get<int>();
      if (!lj.contains("score")) throw InputError(where + ": missing 'score'");
      layer.score = parse_dist(lj.at("score"), where);
      spec.layers.push_back(layer);
    }
  }
  validate(spec);
  return spec;
}

SynthOutput synth_generate(const SynthSpec& spec, const std::string& out_dir) {
  validate(spec);
  std::filesystem::create_directories(out_dir);

  // Lesion j sits on image j % n_images at slot j / n_images.
  const auto lesion_box = [&](int j) {
    const int x0 = 5 + 60 * (j / spec.n_images);
    return BoundingBox(x0, 5, x0 + 40, 45);
  };

  struct GenDetection {
    int image;
    BoundingBox box;
    double score;
    bool is_fp;
  };
  std::vector<GenDetection> detections;
  std::vector<double> lesion_best(static_cast<std::size_t>(spec.n_lesions), -1.0);

  int tp_cursor = 0;
  int fp_cursor = 0;
  for (std::size_t li = 0; li < spec.layers.size(); ++li) {
    const SynthLayer& layer = spec.layers[li];
    rng::Stream stream(spec.seed, 1000 + li);
    for (int k = 0; k < layer.count; ++k) {
      const double score = draw_score(layer.score, stream);
      if (layer.kind == SynthLayer::Kind::tp) {
        const int j = tp_cursor++;
        const BoundingBox lesion = lesion_box(j);
        detections.push_back({j % spec.n_images,
                              BoundingBox(lesion.x_min + 5, lesion.y_min + 5, lesion.x_max - 5,
                                          lesion.y_max - 5),
                              score, false});
        lesion_best[static_cast<std::size_t>(j)] =
            std::max(lesion_best[static_cast<std::size_t>(j)], score);
      } else {
        const int s = fp_cursor++;
        const int image = s % spec.n_images;
        const int slot = s / spec.n_images;
        const int x0 = 5 + 30 * (slot % kFpCols);
        const int y0 = 60 + 30 * (slot / kFpCols);
        detections.push_back({image, BoundingBox(x0, y0, x0 + 20, y0 + 20), score, true});
      }
    }
  }

  // Manifest: one image per breast, malignant iff the image holds a lesion.
  ordered_json manifest;
  manifest["format_version"] = 1;
  manifest["images"] = ordered_json::array();
  manifest["breasts"] = ordered_json::array();
  for (int i = 0; i < spec.n_images; ++i) {
    ordered_json img;
    img["image_id"] = pad_id("img", i);
    img["breast_id"] = pad_id("b", i) + "_L";
    img["view"] = "CC";
    img["width"] = kImageSize;
    img["height"] = kImageSize;
    img["annotations"] = ordered_json::array();
    for (int j = i; j < spec.n_lesions; j += spec.n_images) {
      const BoundingBox box = lesion_box(j);
      ordered_json ann;
      ann["lesion_id"] = pad_id("les", j);
      ann["class"] = "malignant";
      ann["x_min"] = static_cast<int>(box.x_min);
      ann["y_min"] = static_cast<int>(box.y_min);
      ann["x_max"] = static_cast<int>(box.x_max);
      ann["y_max"] = static_cast<int>(box.y_max);
      img["annotations"].push_back(std::move(ann));
    }
    const bool malignant = i < spec.n_lesions;
    manifest["images"].push_back(std::move(img));
    ordered_json breast;
    breast["breast_id"] = pad_id("b", i) + "_L";
    breast["label"] = malignant ? 1 : 0;
    manifest["breasts"].push_back(std::move(breast));
  }
  // The detections file is left out of detections_source on purpose: every
  // consumer names its detection files explicitly, so a pipeline can swap in
  // a suppressed copy without double-loading the raw one.
  manifest["exclusions"] = ordered_json::array();
  manifest["detections_source"] = ordered_json::array();

  SynthOutput out;
  const std::filesystem::path dir(out_dir);
  out.manifest_path = (dir / "manifest.json").string();
  out.detections_path = (dir / "detections.jsonl").string();
  out.truth_path = (dir / "truth.json").string();

  {
    std::ofstream mf(out.manifest_path, std::ios::binary);
    if (!mf) throw InputError(out.manifest_path + ": cannot open for writing");
    mf << manifest.dump(2) << "\n";
  }

  std::vector<DetectionRecord> records;
  records.reserve(detections.size());
  for (const GenDetection& d : detections) {
    records.push_back({Detection{d.box, d.score, DetectionClass::malignant, pad_id("img", d.image)},
                       "synth0"});
  }
  write_detections_file(out.detections_path, records);

  // Ground-truth curve by direct enumeration, independent of the metric
  // code: for every distinct score, count crediting lesions and false
  // positives by scanning the generator's own lists.
  std::set<double, std::greater<double>> thresholds;
  for (const GenDetection& d : detections) thresholds.insert(d.score);
  ordered_json truth;
  truth["format_version"] = 1;
  truth["seed"] = spec.seed;
  truth["n_images"] = spec.n_images;
  truth["n_lesions"] = spec.n_lesions;
  truth["froc_points"] = ordered_json::array();
  for (double t : thresholds) {
    int credited = 0;
    for (double best : lesion_best) {
      if (best >= t) ++credited;
    }
    int fps = 0;
    for (const GenDetection& d : detections) {
      if (d.is_fp && d.score >= t) ++fps;
    }
    ordered_json point;
    point["threshold"] = t;
    point["fp_per_image"] = static_cast<double>(fps) / spec.n_images;
    point["sensitivity"] =
        spec.n_lesions == 0 ? 0.0 : static_cast<double>(credited) / spec.n_lesions;
    truth["froc_points"].push_back(std::move(point));
  }

  // Pairwise AUC over breast scores (image max, one image per breast).
  std::vector<double> image_max(static_cast<std::size_t>(spec.n_images), 0.0);
  for (const GenDetection& d : detections) {
    image_max[static_cast<std::size_t>(d.image)] =
        std::max(image_max[static_cast<std::size_t>(d.image)], d.score);
  }
  std::size_t n_pos = 0;
  double wins = 0.0;
  for (int p = 0; p < spec.n_images; ++p) {
    if (p >= spec.n_lesions) continue;
    ++n_pos;
    for (int n = 0; n < spec.n_images; ++n) {
      if (n < spec.n_lesions) continue;
      if (image_max[p] > image_max[n]) wins += 1.0;
      else if (image_max[p] == image_max[n]) wins += 0.5;
    }
  }
  const std::size_t n_neg = static_cast<std::size_t>(spec.n_images) - n_pos;
  if (n_pos > 0 && n_neg > 0) {
    truth["auc"] = wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
  } else {
    truth["auc"] = nullptr;
  }

  std::ofstream tf(out.truth_path, std::ios::binary);
  if (!tf) throw InputError(out.truth_path + ": cannot open for writing");
  tf << truth.dump(2) << "\n";
  return out;
}

}  // namespace cadeval
