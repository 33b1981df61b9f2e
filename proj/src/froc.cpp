#include "cadeval/froc.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "cadeval/errors.hpp"
#include "cadeval/rng.hpp"

namespace cadeval {

MatchResult match_detections(std::span<const Detection> detections,
                             std::span<const LesionAnnotation> lesions) {
  const std::string* image_id = nullptr;
  if (!detections.empty()) image_id = &detections.front().image_id;
  if (!lesions.empty()) {
    if (image_id != nullptr && lesions.front().image_id != *image_id) {
      throw InputError("match: detections belong to image '" + *image_id +
                       "' but lesions to image '" + lesions.front().image_id + "'");
    }
    if (image_id == nullptr) image_id = &lesions.front().image_id;
  }
  for (const Detection& d : detections) {
    if (d.image_id != *image_id) {
      throw InputError("match: detections span multiple images ('" + *image_id + "', '" +
                       d.image_id + "')");
    }
  }
  for (const LesionAnnotation& l : lesions) {
    if (l.image_id != *image_id) {
      throw InputError("match: lesions span multiple images ('" + *image_id + "', '" +
                       l.image_id + "')");
    }
  }

  MatchResult result;
  for (const LesionAnnotation& l : lesions) {
    if (!result.matched_lesions.emplace(l.lesion_id, std::vector<DetectionRef>{}).second) {
      throw InputError("match: duplicate lesion_id '" + l.lesion_id + "'");
    }
  }
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection& d = detections[i];
    if (d.cls != DetectionClass::malignant) {
      throw InputError("match: detection " + std::to_string(i) +
                       " is benign-class; filter to malignant detections first");
    }
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
      throw InputError("match: detection " + std::to_string(i) + " score must be in [0, 1]");
    }
    bool credited = false;
    for (const LesionAnnotation& l : lesions) {
      if (center_in_box(d, l.box)) {
        result.matched_lesions[l.lesion_id].push_back({i, d.score});
        credited = true;
      }
    }
    if (!credited) result.false_positives.push_back({d.image_id, i, d.score});
  }
  return result;
}

namespace {

// Threshold-sweep inputs for one image: the best crediting score per
// credited lesion, the total lesion count, and the false-positive scores.
struct ImageEvents {
  std::vector<double> lesion_best;
  std::size_t n_lesions = 0;
  std::vector<double> fp_scores;
};

std::vector<ImageEvents> analyze_images(std::span<const FrocImage> images,
                                        std::size_t& total_lesions) {
  if (images.empty()) throw DegenerateInputError("froc: dataset contains no images");
  std::set<std::string> image_ids;
  std::set<std::string> lesion_ids;
  std::vector<ImageEvents> events;
  events.reserve(images.size());
  total_lesions = 0;
  for (const FrocImage& img : images) {
    if (!image_ids.insert(img.image_id).second) {
      throw InputError("froc: duplicate image_id '" + img.image_id + "'");
    }
    for (const Detection& d : img.detections) {
      if (d.image_id != img.image_id) {
        throw InputError("froc: detection on image '" + d.image_id +
                         "' listed under image '" + img.image_id + "'");
      }
    }
    for (const LesionAnnotation& l : img.lesions) {
      if (l.image_id != img.image_id) {
        throw InputError("froc: lesion '" + l.lesion_id + "' on image '" + l.image_id +
                         "' listed under image '" + img.image_id + "'");
      }
      if (!lesion_ids.insert(l.lesion_id).second) {
        throw InputError("froc: duplicate lesion_id '" + l.lesion_id + "'");
      }
    }
    const MatchResult match = match_detections(img.detections, img.lesions);
    ImageEvents ev;
    ev.n_lesions = img.lesions.size();
    total_lesions += ev.n_lesions;
    for (const auto& [lesion_id, refs] : match.matched_lesions) {
      if (refs.empty()) continue;
      double best = 0.0;
      for (const DetectionRef& ref : refs) best = std::max(best, ref.score);
      ev.lesion_best.push_back(best);
    }
    for (const FalsePositiveRef& fp : match.false_positives) ev.fp_scores.push_back(fp.score);
    events.push_back(std::move(ev));
  }
  if (total_lesions == 0) throw DegenerateInputError("froc: dataset contains no lesions");
  return events;
}

}  // namespace

FrocCurve froc_curve(std::span<const FrocImage> images) {
  std::size_t total_lesions = 0;
  const std::vector<ImageEvents> events = analyze_images(images, total_lesions);
  const double n_images = static_cast<double>(images.size());
  const double n_lesions = static_cast<double>(total_lesions);

  std::vector<double> thresholds;
  for (const FrocImage& img : images) {
    for (const Detection& d : img.detections) thresholds.push_back(d.score);
  }
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<double> credited;
  std::vector<double> fps;
  for (const ImageEvents& ev : events) {
    credited.insert(credited.end(), ev.lesion_best.begin(), ev.lesion_best.end());
    fps.insert(fps.end(), ev.fp_scores.begin(), ev.fp_scores.end());
  }
  std::sort(credited.begin(), credited.end(), std::greater<>());
  std::sort(fps.begin(), fps.end(), std::greater<>());

  FrocCurve curve;
  curve.points.reserve(thresholds.size());
  std::size_t ci = 0;
  std::size_t fi = 0;
  for (double t : thresholds) {
    while (ci < credited.size() && credited[ci] >= t) ++ci;
    while (fi < fps.size() && fps[fi] >= t) ++fi;
    curve.points.push_back({static_cast<double>(fi) / n_images,
                            static_cast<double>(ci) / n_lesions, t});
  }
  return curve;
}

FrocBand froc_bootstrap_band(std::span<const FrocImage> images, const BootstrapConfig& cfg,
                             std::span<const double> grid) {
  validate(cfg);
  for (double g : grid) {
    if (!(g >= 0.0) || !std::isfinite(g)) {
      throw ConfigError("froc band grid values must be finite and >= 0");
    }
  }
  std::size_t total_lesions = 0;
  const std::vector<ImageEvents> events = analyze_images(images, total_lesions);
  const std::size_t n = images.size();
  const int replicates = cfg.replicates;

  // One flat event list sorted by score descending; every replicate reuses
  // it with per-image multiplicities instead of re-sorting.
  struct Event {
    double score;
    std::uint32_t image;
    bool is_fp;
  };
  std::vector<Event> sweep;
  std::vector<double> image_lesions(n);
  for (std::size_t i = 0; i < n; ++i) {
    image_lesions[i] = static_cast<double>(events[i].n_lesions);
    for (double s : events[i].lesion_best) {
      sweep.push_back({s, static_cast<std::uint32_t>(i), false});
    }
    for (double s : events[i].fp_scores) sweep.push_back({s, static_cast<std::uint32_t>(i), true});
  }
  std::sort(sweep.begin(), sweep.end(),
            [](const Event& a, const Event& b) { return a.score > b.score; });

  std::vector<double> sorted_grid(grid.begin(), grid.end());
  std::sort(sorted_grid.begin(), sorted_grid.end());

  // grid_vals[g * replicates + r]
  std::vector<double> grid_vals(sorted_grid.size() * static_cast<std::size_t>(replicates));
  std::int64_t redraws = 0;
  std::vector<std::uint32_t> mult;
  for (int r = 0; r < replicates; ++r) {
    rng::Stream stream(cfg.seed, static_cast<std::uint64_t>(r));
    double rep_lesions = 0.0;
    for (;;) {
      draw_multiplicities(stream, n, mult);
      rep_lesions = 0.0;
      for (std::size_t i = 0; i < n; ++i) rep_lesions += mult[i] * image_lesions[i];
      if (rep_lesions > 0.0) break;
      ++redraws;
    }

    double credit = 0.0;
    double fp = 0.0;
    std::size_t g = 0;
    double last_leq_sens = 0.0;
    std::size_t i = 0;
    while (i < sweep.size()) {
      const double t = sweep[i].score;
      std::size_t j = i;
      while (j < sweep.size() && sweep[j].score == t) {
        (sweep[j].is_fp ? fp : credit) += mult[sweep[j].image];
        ++j;
      }
      const double rate = fp / static_cast<double>(n);
      const double sens = credit / rep_lesions;
      while (g < sorted_grid.size() && sorted_grid[g] < rate) {
        grid_vals[g * replicates + r] = last_leq_sens;
        ++g;
      }
      last_leq_sens = sens;
      i = j;
    }
    while (g < sorted_grid.size()) {
      grid_vals[g * replicates + r] = last_leq_sens;
      ++g;
    }
  }

  FrocBand band;
  band.grid = std::move(sorted_grid);
  band.degenerate_redraws = redraws;
  band.bounds.reserve(band.grid.size());
  std::vector<double> column(static_cast<std::size_t>(replicates));
  for (std::size_t g = 0; g < band.grid.size(); ++g) {
    std::copy_n(grid_vals.begin() + static_cast<std::ptrdiff_t>(g * replicates), replicates,
                column.begin());
    band.bounds.push_back(central_interval(column, cfg.interval));
  }
  return band;
}

std::vector<double> froc_band_grid(const FrocCurve& curve, std::span<const double> targets) {
  std::vector<double> grid;
  grid.reserve(curve.points.size() + targets.size());
  for (const FrocPoint& p : curve.points) grid.push_back(p.fp_per_image);
  grid.insert(grid.end(), targets.begin(), targets.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::pair<double, double> operating_point(const FrocCurve& curve, double target_fp_per_image) {
  bool found = false;
  double best_sens = 0.0;
  double best_threshold = 1.0;
  for (const FrocPoint& p : curve.points) {
    if (p.fp_per_image > target_fp_per_image) continue;
    if (!found || p.sensitivity > best_sens) {
      best_sens = p.sensitivity;
      best_threshold = p.threshold;
      found = true;
    }
  }
  return {best_sens, best_threshold};
}

}  // namespace cadeval
