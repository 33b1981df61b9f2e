#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cadeval/dataset.hpp"
#include "cadeval/froc.hpp"
#include "cadeval/roc.hpp"

namespace cadeval {

/// Shortest decimal form that round-trips the exact double ("inf", "-inf",
/// "nan" at the edges). Every text artifact uses this, which is what makes
/// repeated runs byte-identical.
std::string format_double(double v);

/// Strict full-string parse of format_double output.
double parse_double(const std::string& text, const std::string& where);

// CSV schemas. Writers refuse ids containing commas, quotes, or newlines
// rather than quoting them; readers reject rows with the wrong field count.
// Every value a writer emits re-parses to the identical double, so a
// write/read cycle reproduces the written rows exactly.

/// threshold,fpr,tpr
void write_roc_csv(const std::string& path, const RocCurve& curve);
RocCurve read_roc_csv(const std::string& path);

/// threshold,fp_per_image,sensitivity plus lo,hi when a band is present;
/// band bounds are looked up at each point's fp_per_image.
void write_froc_csv(const std::string& path, const FrocCurve& curve);
FrocCurve read_froc_csv(const std::string& path);

/// fpr,lo,hi
void write_roc_band_csv(const std::string& path, const RocBand& band);
RocBand read_roc_band_csv(const std::string& path);

/// breast_id,label,score
void write_breast_scores_csv(const std::string& path, std::span<const BreastScoreRow> rows);
std::vector<BreastScoreRow> read_breast_scores_csv(const std::string& path);

/// Starts a summary document: format_version, tool_version, kind.
nlohmann::ordered_json summary_base(const std::string& kind);
nlohmann::ordered_json to_json(const AucSummary& summary);
void write_json_file(const std::string& path, const nlohmann::ordered_json& doc);

struct PlotSeries {
  std::vector<std::pair<double, double>> points;  // (x, y)
};

struct PlotBand {
  std::vector<double> x;
  std::vector<std::pair<double, double>> bounds;  // (lo, hi) per x
};

/// Minimal self-contained line plot: axes with 0..max ticks, optional
/// shaded band under the curve. Byte-stable for equal inputs.
void write_curve_svg(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const PlotSeries& series, const PlotBand* band = nullptr);

}  // namespace cadeval
