#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cadeval {

/// Score distribution for one generated detection layer. Draws are clamped
/// to [0, 1] for the normal kind.
struct ScoreDist {
  enum class Kind { fixed, uniform, normal };
  Kind kind = Kind::fixed;
  double a = 0.5;  // fixed value, uniform low, or normal mean
  double b = 0.0;  // uniform high or normal standard deviation
};

/// One batch of generated detections: "tp" layers claim the next unclaimed
/// lesions in order and center a detection in each; "fp" layers spread
/// detections round-robin over images on a lattice no lesion box touches.
struct SynthLayer {
  enum class Kind { tp, fp };
  Kind kind = Kind::tp;
  int count = 0;
  ScoreDist score;
};

struct SynthSpec {
  std::uint64_t seed = 0;
  int n_images = 1;
  int n_lesions = 0;
  std::vector<SynthLayer> layers;
};

/// Throws ConfigError on impossible layouts (more lesions or false
/// positives than the placement lattices hold, tp counts exceeding
/// n_lesions, invalid distributions).
void validate(const SynthSpec& spec);

/// Reads a spec document. Shorthand keys n_tp/tp_score and fp_rate/fp_score
/// desugar to one tp and one fp layer ahead of any explicit "layers" array.
/// Distributions: {"fixed": v}, {"uniform": [lo, hi]}, {"normal": [mean, sd]}.
SynthSpec parse_synth_spec(const std::string& path);

struct SynthOutput {
  std::string manifest_path;
  std::string detections_path;
  std::string truth_path;
};

/// Writes manifest.json, detections.jsonl, and truth.json into out_dir,
/// byte-identically for equal specs. One image per breast; an image is
/// malignant iff it holds a lesion. Detections never overlap each other or
/// stray into lesion boxes they do not claim, so NMS leaves them unchanged.
/// truth.json records the generator-side FROC points and pairwise AUC,
/// computed from the generator's own bookkeeping by direct enumeration.
SynthOutput synth_generate(const SynthSpec& spec, const std::string& out_dir);

}  // namespace cadeval
