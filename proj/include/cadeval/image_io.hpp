#pragma once

#include <string>

#include "cadeval/preprocess.hpp"

namespace cadeval {

/// Reads a grayscale PNG or PGM (P2/P5), dispatching on the magic bytes.
/// Color images are rejected; a gray+alpha PNG has its alpha stripped.
/// PNG depth maps to bit_depth 8 or 16; PGM bit_depth is the width of
/// maxval. Throws InputError on unreadable or unsupported files.
PixelImage read_image(const std::string& path);

PixelImage read_png(const std::string& path);
PixelImage read_pgm(const std::string& path);

/// Writes 8-bit grayscale PNG; img.bit_depth must be 8.
void write_png8(const PixelImage& img, const std::string& path);

/// Writes 16-bit grayscale PNG; accepts any bit_depth up to 16.
void write_png16(const PixelImage& img, const std::string& path);

/// Writes binary PGM (P5) with maxval 2^bit_depth - 1.
void write_pgm(const PixelImage& img, const std::string& path);

}  // namespace cadeval
