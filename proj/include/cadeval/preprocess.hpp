#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cadeval/geometry.hpp"

namespace cadeval {

/// Row-major grayscale raster. Values must fit the declared bit depth;
/// storage is uint16 regardless of depth.
struct PixelImage {
  int width = 0;
  int height = 0;
  int bit_depth = 16;
  std::vector<std::uint16_t> pixels;

  std::uint16_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Throws InputError unless dimensions, pixel count, and value range agree.
void validate(const PixelImage& img);

/// Intensity window around the image mode: clip to
/// [mode - lower_offset, mode + upper_offset], then rescale to 0..255.
/// Pixels at or below background_threshold are excluded from the mode.
struct WindowConfig {
  int lower_offset = 500;
  int upper_offset = 800;
  int background_threshold = 0;
};

void validate(const WindowConfig& cfg);

/// Most frequent intensity among pixels above the background threshold;
/// ties break toward the smallest intensity. Throws DegenerateInputError
/// when every pixel is background.
std::uint16_t mode_excluding_background(const PixelImage& img, const WindowConfig& cfg);

/// Clips to the mode-centered window and maps it linearly onto 0..255 with
/// half-up rounding (window low end -> 0, high end -> 255). Output is 8-bit.
PixelImage window_rescale(const PixelImage& img, const WindowConfig& cfg);

/// Gray value to optical density: od = slope * log10(gray) + intercept,
/// clamped to [od_min, od_max]. Gray 0 is treated as 1 before the log.
/// Coefficients come from per-scanner calibration files and are never
/// baked in.
struct OdCalibration {
  double slope = 1.0;
  double intercept = 0.0;
  double od_min = 0.0;
  double od_max = 1.0;
  bool invert = false;  // true: high optical density -> 0, low -> 255
  std::string calibration_id;
};

void validate(const OdCalibration& cal);

/// Maps optical density linearly onto 0..255 with half-up rounding
/// (od_min -> 0 and od_max -> 255, or the reverse when cal.invert is set).
/// Output is 8-bit.
PixelImage od_map(const PixelImage& img, const OdCalibration& cal);

/// Size limits for isotropic downscaling. Never upscales.
struct ResizeConfig {
  int max_long = 2100;
  int max_short = 1700;
};

void validate(const ResizeConfig& cfg);

struct ResizeResult {
  PixelImage image;
  double scale = 1.0;  // applied factor, 1.0 when already within limits
};

/// Scales both sides by s = min(max_long/longer, max_short/shorter, 1),
/// taking the floor of each scaled dimension (at least 1 pixel). Downscaling
/// uses area averaging; the kernel identity is "area" in output metadata.
ResizeResult isotropic_resize(const PixelImage& img, const ResizeConfig& cfg);

/// Multiplies every coordinate by s (annotation boxes must track image
/// resizing). Throws ConfigError unless s is finite and positive.
std::vector<BoundingBox> transform_boxes(const std::vector<BoundingBox>& boxes, double s);

}  // namespace cadeval
