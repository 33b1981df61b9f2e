#include "cadeval/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "cadeval/errors.hpp"

namespace cadeval {

void validate(const PixelImage& img) {
  if (img.width <= 0 || img.height <= 0) {
    throw InputError("image dimensions must be positive, got " + std::to_string(img.width) + "x" +
                     std::to_string(img.height));
  }
  if (img.bit_depth < 1 || img.bit_depth > 16) {
    throw InputError("bit_depth must be in 1..16, got " + std::to_string(img.bit_depth));
  }
  const std::size_t expected =
      static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  if (img.pixels.size() != expected) {
    throw InputError("pixel count " + std::to_string(img.pixels.size()) + " does not match " +
                     std::to_string(img.width) + "x" + std::to_string(img.height));
  }
  const std::uint32_t limit = 1u << img.bit_depth;
  for (std::uint16_t v : img.pixels) {
    if (v >= limit) {
      throw InputError("pixel value " + std::to_string(v) + " exceeds " +
                       std::to_string(img.bit_depth) + "-bit range");
    }
  }
}

void validate(const WindowConfig& cfg) {
  if (cfg.lower_offset < 0 || cfg.upper_offset < 0) {
    throw ConfigError("window offsets must be >= 0");
  }
  if (cfg.lower_offset + cfg.upper_offset == 0) {
    throw ConfigError("window width must be positive");
  }
  if (cfg.background_threshold < 0) {
    throw ConfigError("background_threshold must be >= 0");
  }
}

std::uint16_t mode_excluding_background(const PixelImage& img, const WindowConfig& cfg) {
  validate(img);
  validate(cfg);
  std::vector<std::uint32_t> histogram(std::size_t{1} << img.bit_depth, 0u);
  for (std::uint16_t v : img.pixels) {
    if (v > cfg.background_threshold) ++histogram[v];
  }
  std::uint32_t best_count = 0;
  std::size_t best_value = 0;
  for (std::size_t v = 0; v < histogram.size(); ++v) {
    if (histogram[v] > best_count) {  // strict: ties keep the smaller value
      best_count = histogram[v];
      best_value = v;
    }
  }
  if (best_count == 0) {
    throw DegenerateInputError("every pixel is at or below the background threshold " +
                               std::to_string(cfg.background_threshold));
  }
  return static_cast<std::uint16_t>(best_value);
}

namespace {

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

}  // namespace

PixelImage window_rescale(const PixelImage& img, const WindowConfig& cfg) {
  const std::int64_t mode = mode_excluding_background(img, cfg);  // validates both
  const std::int64_t lo = mode - cfg.lower_offset;
  const std::int64_t hi = mode + cfg.upper_offset;
  const std::int64_t width = hi - lo;

  PixelImage out;
  out.width = img.width;
  out.height = img.height;
  out.bit_depth = 8;
  out.pixels.reserve(img.pixels.size());
  for (std::uint16_t v : img.pixels) {
    const std::int64_t clipped = std::clamp<std::int64_t>(v, lo, hi);
    // Exact half-up rounding of 255 * (clipped - lo) / width in integers.
    const std::int64_t value = (510 * (clipped - lo) + width) / (2 * width);
    out.pixels.push_back(static_cast<std::uint16_t>(value));
  }
  return out;
}

void validate(const OdCalibration& cal) {
  if (!std::isfinite(cal.slope) || !std::isfinite(cal.intercept) || !std::isfinite(cal.od_min) ||
      !std::isfinite(cal.od_max)) {
    throw ConfigError("calibration coefficients must be finite");
  }
  if (cal.slope == 0.0) {
    throw ConfigError("calibration slope must be nonzero (mapping would not be monotone)");
  }
  if (!(cal.od_min < cal.od_max)) {
    throw ConfigError("calibration requires od_min < od_max");
  }
}

PixelImage od_map(const PixelImage& img, const OdCalibration& cal) {
  validate(img);
  validate(cal);
  const double span = cal.od_max - cal.od_min;

  // Gray values repeat heavily, so map each representable value once.
  std::vector<std::uint16_t> lut(std::size_t{1} << img.bit_depth);
  for (std::size_t g = 0; g < lut.size(); ++g) {
    const double gray = g == 0 ? 1.0 : static_cast<double>(g);
    const double od = std::clamp(cal.slope * std::log10(gray) + cal.intercept, cal.od_min,
                                 cal.od_max);
    double t = (od - cal.od_min) / span;
    if (cal.invert) t = 1.0 - t;
    lut[g] = static_cast<std::uint16_t>(round_half_up(255.0 * t));
  }

  PixelImage out;
  out.width = img.width;
  out.height = img.height;
  out.bit_depth = 8;
  out.pixels.reserve(img.pixels.size());
  for (std::uint16_t v : img.pixels) out.pixels.push_back(lut[v]);
  return out;
}

void validate(const ResizeConfig& cfg) {
  if (!(cfg.max_long >= cfg.max_short && cfg.max_short > 0)) {
    throw ConfigError("resize limits require max_long >= max_short > 0");
  }
}

namespace {

// Area-average resample of one axis: output cell k covers the source
// interval [k*in/out, (k+1)*in/out). Weights come from exact integer
// boundaries, so results do not depend on platform or evaluation order.
void resample_axis(const std::vector<double>& src, std::size_t in, std::size_t count,
                   std::vector<double>& dst, std::size_t out) {
  const double cell = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t k = 0; k < out; ++k) {
    const double b0 = static_cast<double>(k * in) / static_cast<double>(out);
    const double b1 = static_cast<double>((k + 1) * in) / static_cast<double>(out);
    const std::size_t first = static_cast<std::size_t>(b0);
    std::size_t last = static_cast<std::size_t>(std::ceil(b1));
    if (last > in) last = in;
    for (std::size_t line = 0; line < count; ++line) {
      double acc = 0.0;
      for (std::size_t s = first; s < last; ++s) {
        const double overlap = std::min(b1, static_cast<double>(s + 1)) -
                               std::max(b0, static_cast<double>(s));
        if (overlap > 0.0) acc += overlap * src[line * in + s];
      }
      dst[line * out + k] = acc / cell;
    }
  }
}

}  // namespace

ResizeResult isotropic_resize(const PixelImage& img, const ResizeConfig& cfg) {
  validate(img);
  validate(cfg);

  const std::int64_t long_side = std::max(img.width, img.height);
  const std::int64_t short_side = std::min(img.width, img.height);
  // s = min(max_long/long, max_short/short, 1) as an exact rational num/den.
  std::int64_t num = 1;
  std::int64_t den = 1;
  if (cfg.max_long * short_side <= cfg.max_short * long_side) {
    if (cfg.max_long < long_side) {
      num = cfg.max_long;
      den = long_side;
    }
  } else {
    if (cfg.max_short < short_side) {
      num = cfg.max_short;
      den = short_side;
    }
  }

  if (num == den) {
    return {img, 1.0};
  }

  const auto scaled = [&](int side) {
    const std::int64_t v = static_cast<std::int64_t>(side) * num / den;
    return static_cast<std::size_t>(std::max<std::int64_t>(v, 1));
  };
  const std::size_t out_w = scaled(img.width);
  const std::size_t out_h = scaled(img.height);
  const std::size_t in_w = static_cast<std::size_t>(img.width);
  const std::size_t in_h = static_cast<std::size_t>(img.height);

  std::vector<double> rows(in_h * in_w);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = img.pixels[i];
  std::vector<double> mid(in_h * out_w);
  resample_axis(rows, in_w, in_h, mid, out_w);

  // Vertical pass works on columns; transpose, resample, transpose back.
  std::vector<double> cols(out_w * in_h);
  for (std::size_t y = 0; y < in_h; ++y) {
    for (std::size_t x = 0; x < out_w; ++x) cols[x * in_h + y] = mid[y * out_w + x];
  }
  std::vector<double> cols_out(out_w * out_h);
  resample_axis(cols, in_h, out_w, cols_out, out_h);

  ResizeResult result;
  result.scale = static_cast<double>(num) / static_cast<double>(den);
  result.image.width = static_cast<int>(out_w);
  result.image.height = static_cast<int>(out_h);
  result.image.bit_depth = img.bit_depth;
  result.image.pixels.resize(out_w * out_h);
  const std::int64_t max_value = (std::int64_t{1} << img.bit_depth) - 1;
  for (std::size_t y = 0; y < out_h; ++y) {
    for (std::size_t x = 0; x < out_w; ++x) {
      const std::int64_t v = round_half_up(cols_out[x * out_h + y]);
      result.image.pixels[y * out_w + x] =
          static_cast<std::uint16_t>(std::clamp<std::int64_t>(v, 0, max_value));
    }
  }
  return result;
}

std::vector<BoundingBox> transform_boxes(const std::vector<BoundingBox>& boxes, double s) {
  if (!std::isfinite(s) || s <= 0.0) {
    throw ConfigError("box scale factor must be finite and positive");
  }
  std::vector<BoundingBox> out;
  out.reserve(boxes.size());
  for (const BoundingBox& b : boxes) {
    out.emplace_back(b.x_min * s, b.y_min * s, b.x_max * s, b.y_max * s);
  }
  return out;
}

}  // namespace cadeval
