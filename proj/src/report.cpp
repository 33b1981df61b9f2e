#include "cadeval/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cadeval/errors.hpp"
#include "cadeval/version.hpp"

namespace cadeval {

std::string format_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

double parse_double(const std::string& text, const std::string& where) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw InputError(where + ": not a number: '" + text + "'");
  }
  return value;
}

namespace {

void check_plain_id(const std::string& id, const std::string& path) {
  if (id.find_first_of(",\"\n\r") != std::string::npos) {
    throw InputError(path + ": id '" + id + "' contains CSV delimiter characters");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path + ": cannot open for writing");
  return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw InputError(path + ": write failed");
}

struct CsvReader {
  std::ifstream in;
  std::string path;
  int line_no = 0;

  explicit CsvReader(const std::string& p) : in(p), path(p) {
    if (!in) throw InputError(p + ": cannot open for reading");
  }

  std::string where() const { return path + ":" + std::to_string(line_no); }

  bool next(std::vector<std::string>& fields) {
    std::string line;
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    fields.clear();
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    return true;
  }

  void expect_header(const std::string& header, std::vector<std::string>& fields) {
    if (!next(fields)) throw InputError(path + ": empty file");
    std::string joined;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i != 0) joined += ',';
      joined += fields[i];
    }
    if (joined != header) {
      throw InputError(where() + ": expected header '" + header + "', got '" + joined + "'");
    }
  }
};

}  // namespace

void write_roc_csv(const std::string& path, const RocCurve& curve) {
  std::ofstream out = open_out(path);
  out << "threshold,fpr,tpr\n";
  for (const RocPoint& p : curve.points) {
    out << format_double(p.threshold) << "," << format_double(p.fpr) << ","
        << format_double(p.tpr) << "\n";
  }
  finish_out(out, path);
}

RocCurve read_roc_csv(const std::string& path) {
  CsvReader reader(path);
  std::vector<std::string> fields;
  reader.expect_header("threshold,fpr,tpr", fields);
  RocCurve curve;
  while (reader.next(fields)) {
    if (fields.size() != 3) throw InputError(reader.where() + ": expected 3 fields");
    curve.points.push_back({parse_double(fields[0], reader.where()),
                            parse_double(fields[1], reader.where()),
                            parse_double(fields[2], reader.where())});
  }
  curve.auc = trapezoid_auc(curve.points);
  return curve;
}

namespace {

std::pair<double, double> band_at(const FrocBand& band, double fp, const std::string& path) {
  const auto it = std::lower_bound(band.grid.begin(), band.grid.end(), fp);
  if (it == band.grid.end() || *it != fp) {
    throw InputError(path + ": band grid does not cover fp_per_image " + format_double(fp));
  }
  return band.bounds[static_cast<std::size_t>(it - band.grid.begin())];
}

}  // namespace

void write_froc_csv(const std::string& path, const FrocCurve& curve) {
  std::ofstream out = open_out(path);
  if (curve.band.has_value()) {
    out << "threshold,fp_per_image,sensitivity,lo,hi\n";
    for (const FrocPoint& p : curve.points) {
      const auto [lo, hi] = band_at(*curve.band, p.fp_per_image, path);
      out << format_double(p.threshold) << "," << format_double(p.fp_per_image) << ","
          << format_double(p.sensitivity) << "," << format_double(lo) << "," << format_double(hi)
          << "\n";
    }
  } else {
    out << "threshold,fp_per_image,sensitivity\n";
    for (const FrocPoint& p : curve.points) {
      out << format_double(p.threshold) << "," << format_double(p.fp_per_image) << ","
          << format_double(p.sensitivity) << "\n";
    }
  }
  finish_out(out, path);
}

FrocCurve read_froc_csv(const std::string& path) {
  CsvReader reader(path);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw InputError(path + ": empty file");
  const bool with_band = fields.size() == 5;
  const std::vector<std::string> plain = {"threshold", "fp_per_image", "sensitivity"};
  const std::vector<std::string> banded = {"threshold", "fp_per_image", "sensitivity", "lo", "hi"};
  if (fields != plain && fields != banded) {
    throw InputError(reader.where() + ": unrecognized froc csv header");
  }

  FrocCurve curve;
  FrocBand band;
  while (reader.next(fields)) {
    if (fields.size() != (with_band ? 5u : 3u)) {
      throw InputError(reader.where() + ": wrong field count");
    }
    const double threshold = parse_double(fields[0], reader.where());
    const double fp = parse_double(fields[1], reader.where());
    const double sens = parse_double(fields[2], reader.where());
    curve.points.push_back({fp, sens, threshold});
    if (with_band) {
      const double lo = parse_double(fields[3], reader.where());
      const double hi = parse_double(fields[4], reader.where());
      if (band.grid.empty() || band.grid.back() != fp) {
        band.grid.push_back(fp);
        band.bounds.push_back({lo, hi});
      }
    }
  }
  if (with_band) curve.band = std::move(band);
  return curve;
}

void write_roc_band_csv(const std::string& path, const RocBand& band) {
  std::ofstream out = open_out(path);
  out << "fpr,lo,hi\n";
  for (std::size_t i = 0; i < band.grid.size(); ++i) {
    out << format_double(band.grid[i]) << "," << format_double(band.bounds[i].first) << ","
        << format_double(band.bounds[i].second) << "\n";
  }
  finish_out(out, path);
}

RocBand read_roc_band_csv(const std::string& path) {
  CsvReader reader(path);
  std::vector<std::string> fields;
  reader.expect_header("fpr,lo,hi", fields);
  RocBand band;
  while (reader.next(fields)) {
    if (fields.size() != 3) throw InputError(reader.where() + ": expected 3 fields");
    band.grid.push_back(parse_double(fields[0], reader.where()));
    band.bounds.push_back({parse_double(fields[1], reader.where()),
                           parse_double(fields[2], reader.where())});
  }
  return band;
}

void write_breast_scores_csv(const std::string& path, std::span<const BreastScoreRow> rows) {
  std::ofstream out = open_out(path);
  out << "breast_id,label,score\n";
  for (const BreastScoreRow& row : rows) {
    check_plain_id(row.breast_id, path);
    out << row.breast_id << "," << row.label << "," << format_double(row.score) << "\n";
  }
  finish_out(out, path);
}

std::vector<BreastScoreRow> read_breast_scores_csv(const std::string& path) {
  CsvReader reader(path);
  std::vector<std::string> fields;
  reader.expect_header("breast_id,label,score", fields);
  std::vector<BreastScoreRow> rows;
  while (reader.next(fields)) {
    if (fields.size() != 3) throw InputError(reader.where() + ": expected 3 fields");
    BreastScoreRow row;
    row.breast_id = fields[0];
    const double label = parse_double(fields[1], reader.where());
    if (label != 0.0 && label != 1.0) throw InputError(reader.where() + ": label must be 0 or 1");
    row.label = static_cast<int>(label);
    row.score = parse_double(fields[2], reader.where());
    if (!(row.score >= 0.0 && row.score <= 1.0)) {
      throw InputError(reader.where() + ": score must be in [0, 1]");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json summary_base(const std::string& kind) {
  nlohmann::ordered_json doc;
  doc["format_version"] = 1;
  doc["tool_version"] = kToolVersion;
  doc["kind"] = kind;
  return doc;
}

nlohmann::ordered_json to_json(const AucSummary& summary) {
  nlohmann::ordered_json doc;
  doc["auc"] = summary.auc;
  doc["lo"] = summary.lo;
  doc["hi"] = summary.hi;
  doc["replicates"] = summary.replicates;
  doc["interval"] = summary.interval;
  doc["seed"] = summary.seed;
  doc["degenerate_redraws"] = summary.degenerate_redraws;
  return doc;
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& doc) {
  std::ofstream out = open_out(path);
  out << doc.dump(2) << "\n";
  finish_out(out, path);
}

namespace {

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape_xml(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_curve_svg(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const PlotSeries& series, const PlotBand* band) {
  constexpr double kWidth = 640.0;
  constexpr double kHeight = 480.0;
  constexpr double kLeft = 70.0;
  constexpr double kRight = 20.0;
  constexpr double kTop = 40.0;
  constexpr double kBottom = 55.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double x_max = 1.0;
  for (const auto& [x, y] : series.points) x_max = std::max(x_max, x);
  if (band != nullptr) {
    for (double x : band->x) x_max = std::max(x_max, x);
  }

  const auto px = [&](double x) { return kLeft + x / x_max * plot_w; };
  const auto py = [&](double y) { return kTop + (1.0 - y) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
  svg << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  svg << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">"
      << escape_xml(title) << "</text>\n";

  if (band != nullptr && !band->x.empty()) {
    svg << "<polygon fill=\"#c6dbef\" fill-opacity=\"0.8\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < band->x.size(); ++i) {
      svg << svg_num(px(band->x[i])) << "," << svg_num(py(band->bounds[i].second)) << " ";
    }
    for (std::size_t i = band->x.size(); i-- > 0;) {
      svg << svg_num(px(band->x[i])) << "," << svg_num(py(band->bounds[i].first));
      if (i != 0) svg << " ";
    }
    svg << "\"/>\n";
  }

  svg << "<rect x=\"" << svg_num(kLeft) << "\" y=\"" << svg_num(kTop) << "\" width=\""
      << svg_num(plot_w) << "\" height=\"" << svg_num(plot_h)
      << "\" fill=\"none\" stroke=\"#444444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x_max * i / 4.0;
    const double fy = i / 4.0;
    svg << "<line x1=\"" << svg_num(px(fx)) << "\" y1=\"" << svg_num(kTop + plot_h) << "\" x2=\""
        << svg_num(px(fx)) << "\" y2=\"" << svg_num(kTop + plot_h + 5) << "\" stroke=\"#444444\"/>\n";
    svg << "<text x=\"" << svg_num(px(fx)) << "\" y=\"" << svg_num(kTop + plot_h + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_double(fx) << "</text>\n";
    svg << "<line x1=\"" << svg_num(kLeft - 5) << "\" y1=\"" << svg_num(py(fy)) << "\" x2=\""
        << svg_num(kLeft) << "\" y2=\"" << svg_num(py(fy)) << "\" stroke=\"#444444\"/>\n";
    svg << "<text x=\"" << svg_num(kLeft - 9) << "\" y=\"" << svg_num(py(fy) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_double(fy) << "</text>\n";
  }
  svg << "<text x=\"" << svg_num(kLeft + plot_w / 2.0) << "\" y=\"" << svg_num(kHeight - 14)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape_xml(x_label) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << svg_num(kTop + plot_h / 2.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 18 "
      << svg_num(kTop + plot_h / 2.0) << ")\">" << escape_xml(y_label) << "</text>\n";

  if (!series.points.empty()) {
    svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series.points.size(); ++i) {
      svg << svg_num(px(series.points[i].first)) << "," << svg_num(py(series.points[i].second));
      if (i + 1 != series.points.size()) svg << " ";
    }
    svg << "\"/>\n";
  }
  svg << "</svg>\n";

  std::ofstream out = open_out(path);
  out << svg.str();
  finish_out(out, path);
}

}  // namespace cadeval
