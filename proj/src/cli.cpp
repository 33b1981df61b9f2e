#include "cadeval/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cadeval/dataset.hpp"
#include "cadeval/errors.hpp"
#include "cadeval/froc.hpp"
#include "cadeval/geometry.hpp"
#include "cadeval/image_io.hpp"
#include "cadeval/preprocess.hpp"
#include "cadeval/report.hpp"
#include "cadeval/roc.hpp"
#include "cadeval/synth.hpp"
#include "cadeval/version.hpp"

namespace cadeval {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct GlobalOpts {
  std::uint64_t seed = 0;
  int bootstrap = 10000;
  double ci = 95.0;
  double nms_iou = 0.1;
  std::vector<double> fp_targets = {0.3, 3.0};
};

BootstrapConfig bootstrap_config(const GlobalOpts& g) {
  if (g.bootstrap < 0) throw ConfigError("--bootstrap must be >= 0");
  BootstrapConfig cfg;
  cfg.replicates = g.bootstrap;
  cfg.interval = g.ci;
  cfg.seed = g.seed;
  return cfg;
}

ordered_json config_echo(const GlobalOpts& g, bool nms_applied) {
  ordered_json config;
  config["seed"] = g.seed;
  config["bootstrap"] = g.bootstrap;
  config["interval"] = g.ci;
  config["nms_applied"] = nms_applied;
  config["nms_iou"] = g.nms_iou;
  return config;
}

void run_nms(const std::string& in_path, const std::string& out_path, const std::string& model,
             double iou) {
  const std::vector<DetectionRecord> records = read_detections_file(in_path, model);
  std::map<std::string, std::map<std::string, std::vector<Detection>>> groups;
  for (const DetectionRecord& rec : records) {
    groups[rec.detection.image_id][rec.model_id].push_back(rec.detection);
  }
  std::vector<DetectionRecord> kept;
  for (auto& [image_id, by_model] : groups) {
    for (auto& [model_id, dets] : by_model) {
      for (Detection& d : nms(std::move(dets), {iou})) {
        kept.push_back({std::move(d), model_id});
      }
    }
  }
  write_detections_file(out_path, kept);
  std::cout << "nms: kept " << kept.size() << " of " << records.size() << " detections -> "
            << out_path << "\n";
}

void print_load_stats(const Dataset& ds) {
  std::cout << "loaded " << ds.images.size() << " images, " << ds.breasts.size() << " breasts, "
            << ds.model_ids.size() << " models";
  if (ds.stats.benign_annotations_dropped > 0) {
    std::cout << "; dropped " << ds.stats.benign_annotations_dropped << " benign annotations";
  }
  if (ds.stats.excluded_breasts > 0 || ds.stats.excluded_images > 0) {
    std::cout << "; excluded " << ds.stats.excluded_breasts << " breasts / "
              << ds.stats.excluded_images << " images";
  }
  if (ds.stats.detections_dropped_excluded > 0) {
    std::cout << "; dropped " << ds.stats.detections_dropped_excluded
              << " detections on excluded images";
  }
  std::cout << "\n";
}

void run_aggregate(const std::string& manifest, const std::vector<std::string>& det_paths,
                   const std::string& out_path, bool apply_nms, const GlobalOpts& g) {
  const Dataset ds = load_dataset(manifest, det_paths);
  print_load_stats(ds);
  const std::vector<BreastScoreRow> rows = breast_scores(ds, apply_nms, {g.nms_iou});
  write_breast_scores_csv(out_path, rows);
  std::cout << "aggregate: wrote " << rows.size() << " breast scores -> " << out_path << "\n";
}

void run_eval_roc(const std::string& scores_csv, const std::string& manifest,
                  const std::vector<std::string>& det_paths, const std::string& out_dir,
                  bool apply_nms, const GlobalOpts& g) {
  if (scores_csv.empty() == manifest.empty()) {
    throw ConfigError("eval-roc needs exactly one of --scores or --manifest");
  }
  std::vector<BreastScoreRow> rows;
  if (!scores_csv.empty()) {
    rows = read_breast_scores_csv(scores_csv);
  } else {
    const Dataset ds = load_dataset(manifest, det_paths);
    print_load_stats(ds);
    rows = breast_scores(ds, apply_nms, {g.nms_iou});
  }
  const std::vector<ScoredCase> cases = to_scored_cases(rows);
  const RocCurve curve = roc_curve(cases);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_roc_csv((dir / "roc.csv").string(), curve);

  ordered_json summary = summary_base("roc");
  summary["n_cases"] = cases.size();
  std::size_t n_pos = 0;
  for (const ScoredCase& c : cases) n_pos += c.label == 1 ? 1 : 0;
  summary["n_pos"] = n_pos;
  summary["n_neg"] = cases.size() - n_pos;
  summary["auc"] = curve.auc;

  PlotBand band_plot;
  bool have_band = false;
  if (g.bootstrap > 0) {
    const std::vector<double> grid = default_fpr_grid();
    const RocBootstrapResult bs = roc_bootstrap(cases, bootstrap_config(g), grid);
    summary["ci"] = to_json(bs.auc);
    write_roc_band_csv((dir / "roc_band.csv").string(), bs.band);
    band_plot.x = bs.band.grid;
    band_plot.bounds = bs.band.bounds;
    have_band = true;
    std::cout << "eval-roc: auc=" << format_double(bs.auc.auc) << " ci=["
              << format_double(bs.auc.lo) << ", " << format_double(bs.auc.hi) << "] ("
              << bs.auc.replicates << " replicates, seed " << g.seed << ")\n";
  } else {
    std::cout << "eval-roc: auc=" << format_double(curve.auc) << " (bootstrap disabled)\n";
  }
  summary["config"] = config_echo(g, apply_nms && scores_csv.empty());
  write_json_file((dir / "roc_summary.json").string(), summary);

  PlotSeries series;
  for (const RocPoint& p : curve.points) series.points.push_back({p.fpr, p.tpr});
  write_curve_svg((dir / "roc.svg").string(), "ROC curve (breast level)", "false positive rate",
                  "true positive rate", series, have_band ? &band_plot : nullptr);
}

void run_eval_froc(const std::string& manifest, const std::vector<std::string>& det_paths,
                   const std::string& model, const std::string& out_dir, bool apply_nms,
                   const GlobalOpts& g) {
  const Dataset ds = load_dataset(manifest, det_paths);
  print_load_stats(ds);
  const std::string model_id = resolve_model_id(ds, model);
  const std::vector<FrocImage> images = froc_images(ds, model_id, apply_nms, {g.nms_iou});
  FrocCurve curve = froc_curve(images);
  if (g.bootstrap > 0) {
    const std::vector<double> grid = froc_band_grid(curve, g.fp_targets);
    curve.band = froc_bootstrap_band(images, bootstrap_config(g), grid);
  }

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_froc_csv((dir / "froc.csv").string(), curve);

  std::size_t n_lesions = 0;
  for (const FrocImage& img : images) n_lesions += img.lesions.size();
  ordered_json summary = summary_base("froc");
  summary["n_images"] = images.size();
  summary["n_lesions"] = n_lesions;
  summary["model_id"] = model_id;
  summary["operating_points"] = ordered_json::array();
  for (double target : g.fp_targets) {
    const auto [sens, threshold] = operating_point(curve, target);
    ordered_json op;
    op["target_fp_per_image"] = target;
    op["sensitivity"] = sens;
    op["threshold"] = threshold;
    if (curve.band.has_value()) {
      const FrocBand& band = *curve.band;
      const auto it = std::lower_bound(band.grid.begin(), band.grid.end(), target);
      if (it != band.grid.end() && *it == target) {
        const std::size_t i = static_cast<std::size_t>(it - band.grid.begin());
        op["lo"] = band.bounds[i].first;
        op["hi"] = band.bounds[i].second;
      }
    }
    summary["operating_points"].push_back(std::move(op));
    std::cout << "eval-froc: sensitivity " << format_double(sens) << " at "
              << format_double(target) << " fp/image (threshold " << format_double(threshold)
              << ")\n";
  }
  ordered_json config = config_echo(g, apply_nms);
  config["model_id"] = model_id;
  config["fp_targets"] = g.fp_targets;
  summary["config"] = std::move(config);
  if (curve.band.has_value()) summary["degenerate_redraws"] = curve.band->degenerate_redraws;
  write_json_file((dir / "froc_summary.json").string(), summary);

  PlotSeries series;
  for (const FrocPoint& p : curve.points) series.points.push_back({p.fp_per_image, p.sensitivity});
  PlotBand band_plot;
  if (curve.band.has_value()) {
    band_plot.x = curve.band->grid;
    band_plot.bounds = curve.band->bounds;
  }
  write_curve_svg((dir / "froc.svg").string(), "FROC curve (lesion level)",
                  "false positive marks per image", "lesion sensitivity", series,
                  curve.band.has_value() ? &band_plot : nullptr);
}

OdCalibration read_od_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open for reading");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": JSON parse error: " + e.what());
  }
  OdCalibration cal;
  const auto number = [&](const char* key) {
    if (!doc.contains(key) || !doc.at(key).is_number()) {
      throw InputError(path + ": missing or non-numeric field '" + key + "'");
    }
    return doc.at(key).get<double>();
  };
  cal.slope = number("slope");
  cal.intercept = number("intercept");
  cal.od_min = number("od_min");
  cal.od_max = number("od_max");
  if (doc.contains("invert")) {
    if (!doc.at("invert").is_boolean()) throw InputError(path + ": 'invert' must be a boolean");
    cal.invert = doc.at("invert").get<bool>();
  }
  if (doc.contains("calibration_id")) {
    if (!doc.at("calibration_id").is_string()) {
      throw InputError(path + ": 'calibration_id' must be a string");
    }
    cal.calibration_id = doc.at("calibration_id").get<std::string>();
  }
  validate(cal);
  return cal;
}

struct PreprocessOpts {
  std::string in_path;
  std::string out_path;
  std::string od_cal_path;
  int window_lower = 500;
  int window_upper = 800;
  int background_threshold = 0;
  int max_long = 2100;
  int max_short = 1700;
  bool no_window = false;
  bool no_resize = false;
};

void run_preprocess(const PreprocessOpts& opts) {
  const PixelImage source = read_image(opts.in_path);
  ordered_json sidecar = summary_base("preprocess");
  sidecar["source"] = opts.in_path;
  sidecar["output"] = opts.out_path;

  PixelImage current = source;
  if (!opts.od_cal_path.empty()) {
    const OdCalibration cal = read_od_calibration(opts.od_cal_path);
    current = od_map(current, cal);
    sidecar["calibration_id"] = cal.calibration_id;
    sidecar["od_range"] = {cal.od_min, cal.od_max};
    sidecar["od_inverted"] = cal.invert;
  } else if (!opts.no_window) {
    const WindowConfig wc{opts.window_lower, opts.window_upper, opts.background_threshold};
    const int mode = mode_excluding_background(current, wc);
    current = window_rescale(current, wc);
    sidecar["mode"] = mode;
    sidecar["window"] = {mode - wc.lower_offset, mode + wc.upper_offset};
  }

  double scale = 1.0;
  if (!opts.no_resize) {
    ResizeResult resized = isotropic_resize(current, {opts.max_long, opts.max_short});
    current = std::move(resized.image);
    scale = resized.scale;
  }
  sidecar["scale"] = scale;
  sidecar["kernel"] = "area";
  sidecar["width"] = current.width;
  sidecar["height"] = current.height;
  sidecar["bit_depth"] = current.bit_depth;

  if (current.bit_depth == 8) {
    write_png8(current, opts.out_path);
  } else {
    write_png16(current, opts.out_path);
  }
  write_json_file(opts.out_path + ".json", sidecar);
  std::cout << "preprocess: " << opts.in_path << " -> " << opts.out_path << " (" << current.width
            << "x" << current.height << ", scale " << format_double(scale) << ")\n";
}

void run_synth(const std::string& spec_path, const std::string& out_dir, bool seed_given,
               std::uint64_t seed) {
  SynthSpec spec = parse_synth_spec(spec_path);
  if (seed_given) spec.seed = seed;
  const SynthOutput out = synth_generate(spec, out_dir);
  std::cout << "synth: wrote " << out.manifest_path << ", " << out.detections_path << ", "
            << out.truth_path << "\n";
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  GlobalOpts g;
  CLI::App app{
      "Evaluation toolkit for lesion-detection CAD: collapses detections into "
      "breast-level scores, computes ROC/AUC and lesion-level FROC with seeded "
      "bootstrap percentile intervals, and reproduces the mammogram "
      "preprocessing recipe (mode-window clipping, optical-density mapping, "
      "isotropic resize)."};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  auto* seed_opt =
      app.add_option("--seed", g.seed,
                     "RNG seed; every random draw in the toolkit derives from it, so equal "
                     "seeds give byte-identical outputs")
          ->capture_default_str();
  app.add_option("--bootstrap", g.bootstrap,
                 "bootstrap replicates behind every confidence interval; 0 disables intervals")
      ->capture_default_str();
  app.add_option("--ci", g.ci, "central percentile interval width, in percent")
      ->capture_default_str();
  app.add_option("--nms-iou", g.nms_iou,
                 "IoU above which a lower-scored box of the same class is suppressed")
      ->capture_default_str();
  app.add_option("--fp-targets", g.fp_targets,
                 "FROC operating targets, in false-positive marks per image")
      ->delimiter(',')
      ->capture_default_str();

  // synth
  auto* synth = app.add_subcommand(
      "synth", "Generate a synthetic dataset (manifest, detections, ground-truth sidecar)");
  synth->fallthrough();
  std::string synth_spec;
  std::string synth_out;
  synth->add_option("--spec", synth_spec, "synthesis spec JSON")->required();
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->callback([&] { run_synth(synth_spec, synth_out, seed_opt->count() > 0, g.seed); });

  // nms
  auto* nms_cmd =
      app.add_subcommand("nms", "Apply greedy per-class non-maximum suppression to a "
                                "detections file");
  nms_cmd->fallthrough();
  std::string nms_in;
  std::string nms_out;
  std::string nms_model;
  nms_cmd->add_option("--in", nms_in, "input detections (JSON lines)")->required();
  nms_cmd->add_option("--out", nms_out, "output detections (JSON lines)")->required();
  nms_cmd->add_option("--model", nms_model, "model_id for records that omit one");
  nms_cmd->callback([&] { run_nms(nms_in, nms_out, nms_model, g.nms_iou); });

  // aggregate
  auto* agg = app.add_subcommand(
      "aggregate", "Collapse detections to one score per breast (max malignant score per "
                   "image, mean per breast, mean over models)");
  agg->fallthrough();
  std::string agg_manifest;
  std::vector<std::string> agg_dets;
  std::string agg_out;
  bool agg_no_nms = false;
  agg->add_option("--manifest", agg_manifest, "dataset manifest JSON")->required();
  agg->add_option("--detections", agg_dets, "extra detection files beyond the manifest's");
  agg->add_option("--out", agg_out, "output breast-score CSV")->required();
  agg->add_flag("--no-nms", agg_no_nms, "skip NMS (inputs already suppressed)");
  agg->callback([&] { run_aggregate(agg_manifest, agg_dets, agg_out, !agg_no_nms, g); });

  // eval-roc
  auto* roc_cmd = app.add_subcommand(
      "eval-roc", "Breast-level ROC curve and AUC with a bootstrap percentile interval");
  roc_cmd->fallthrough();
  std::string roc_scores;
  std::string roc_manifest;
  std::vector<std::string> roc_dets;
  std::string roc_out_dir;
  bool roc_no_nms = false;
  roc_cmd->add_option("--scores", roc_scores, "breast-score CSV from 'aggregate'");
  roc_cmd->add_option("--manifest", roc_manifest, "dataset manifest JSON (scores computed here)");
  roc_cmd->add_option("--detections", roc_dets, "extra detection files beyond the manifest's");
  roc_cmd->add_option("--out-dir", roc_out_dir, "output directory")->required();
  roc_cmd->add_flag("--no-nms", roc_no_nms, "skip NMS (inputs already suppressed)");
  roc_cmd->callback(
      [&] { run_eval_roc(roc_scores, roc_manifest, roc_dets, roc_out_dir, !roc_no_nms, g); });

  // eval-froc
  auto* froc_cmd = app.add_subcommand(
      "eval-froc", "Lesion-level FROC curve, operating points, and bootstrap band");
  froc_cmd->fallthrough();
  std::string froc_manifest;
  std::vector<std::string> froc_dets;
  std::string froc_model;
  std::string froc_out_dir;
  bool froc_no_nms = false;
  froc_cmd->add_option("--manifest", froc_manifest, "dataset manifest JSON")->required();
  froc_cmd->add_option("--detections", froc_dets, "extra detection files beyond the manifest's");
  froc_cmd->add_option("--model", froc_model, "model to evaluate (required with several models)");
  froc_cmd->add_option("--out-dir", froc_out_dir, "output directory")->required();
  froc_cmd->add_flag("--no-nms", froc_no_nms, "skip NMS (inputs already suppressed)");
  froc_cmd->callback([&] {
    run_eval_froc(froc_manifest, froc_dets, froc_model, froc_out_dir, !froc_no_nms, g);
  });

  // preprocess
  auto* prep = app.add_subcommand(
      "preprocess", "Normalize a grayscale mammogram: mode-window clipping (or optical-density "
                    "mapping with a calibration file) and isotropic resize");
  prep->fallthrough();
  PreprocessOpts popts;
  prep->add_option("--in", popts.in_path, "input image (grayscale PNG or PGM)")->required();
  prep->add_option("--out", popts.out_path, "output PNG; a .json sidecar is written next to it")
      ->required();
  prep->add_option("--od-cal", popts.od_cal_path,
                   "optical-density calibration JSON (slope, intercept, od_min, od_max); "
                   "replaces mode-window clipping");
  prep->add_option("--window-lower", popts.window_lower,
                   "window low offset below the image mode")
      ->capture_default_str();
  prep->add_option("--window-upper", popts.window_upper,
                   "window high offset above the image mode")
      ->capture_default_str();
  prep->add_option("--background-threshold", popts.background_threshold,
                   "intensities at or below this are background and never the mode")
      ->capture_default_str();
  prep->add_option("--max-long", popts.max_long, "resize limit for the longer side")
      ->capture_default_str();
  prep->add_option("--max-short", popts.max_short, "resize limit for the shorter side")
      ->capture_default_str();
  prep->add_flag("--no-window", popts.no_window, "skip intensity windowing");
  prep->add_flag("--no-resize", popts.no_resize, "skip isotropic resizing");
  prep->callback([&] { run_preprocess(popts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace cadeval
