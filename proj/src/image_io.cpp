#include "cadeval/image_io.hpp"

#include <png.h>

#include <bit>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

#include "cadeval/errors.hpp"

namespace cadeval {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw InputError(path + ": " + what);
}

}  // namespace

PixelImage read_png(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) fail(path, "cannot open for reading");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) fail(path, "png reader allocation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(path, "png info allocation failed");
  }
  // Declared ahead of setjmp so a libpng longjmp never skips a constructor.
  PixelImage img;
  std::vector<png_byte> row;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "not a valid PNG file");
  }

  png_init_io(png, file.get());
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "only grayscale PNG input is supported");
  }
  if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_strip_alpha(png);
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_read_update_info(png, info);

  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.bit_depth = depth == 16 ? 16 : 8;
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  row.resize(png_get_rowbytes(png, info));
  for (int y = 0; y < img.height; ++y) {
    png_read_row(png, row.data(), nullptr);
    std::uint16_t* out = img.pixels.data() + static_cast<std::size_t>(y) * img.width;
    if (depth == 16) {
      std::memcpy(out, row.data(), static_cast<std::size_t>(img.width) * 2);
    } else {
      for (int x = 0; x < img.width; ++x) out[x] = row[static_cast<std::size_t>(x)];
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

namespace {

int pgm_next_value(std::istream& in, const std::string& path) {
  for (;;) {
    const int c = in.peek();
    if (c == EOF) fail(path, "truncated PGM header");
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
      continue;
    }
    if (std::isspace(c) != 0) {
      in.get();
      continue;
    }
    break;
  }
  int value = 0;
  if (!(in >> value)) fail(path, "malformed PGM header");
  return value;
}

}  // namespace

PixelImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open for reading");
  char p = 0;
  char kind = 0;
  in.get(p);
  in.get(kind);
  if (p != 'P' || (kind != '2' && kind != '5')) fail(path, "not a P2/P5 PGM file");

  PixelImage img;
  img.width = pgm_next_value(in, path);
  img.height = pgm_next_value(in, path);
  const int maxval = pgm_next_value(in, path);
  if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 65535) {
    fail(path, "unsupported PGM geometry or maxval");
  }
  img.bit_depth = std::bit_width(static_cast<unsigned>(maxval));
  const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
  img.pixels.resize(count);

  if (kind == '2') {
    for (std::size_t i = 0; i < count; ++i) {
      int v = 0;
      if (!(in >> v)) fail(path, "truncated PGM pixel data");
      if (v < 0 || v > maxval) fail(path, "PGM pixel out of range");
      img.pixels[i] = static_cast<std::uint16_t>(v);
    }
  } else {
    in.get();  // single whitespace byte after maxval
    const int bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(count * static_cast<std::size_t>(bytes));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) fail(path, "truncated PGM pixel data");
    for (std::size_t i = 0; i < count; ++i) {
      const unsigned v = bytes == 1 ? raw[i]
                                    : (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
      if (v > static_cast<unsigned>(maxval)) fail(path, "PGM pixel out of range");
      img.pixels[i] = static_cast<std::uint16_t>(v);
    }
  }
  return img;
}

PixelImage read_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) fail(path, "cannot open for reading");
  char magic[2] = {0, 0};
  probe.read(magic, 2);
  probe.close();
  if (magic[0] == '\x89' && magic[1] == 'P') return read_png(path);
  if (magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5')) return read_pgm(path);
  fail(path, "unrecognized image format (expected PNG or PGM)");
}

namespace {

void write_png_impl(const PixelImage& img, const std::string& path, int file_depth) {
  validate(img);
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) fail(path, "cannot open for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) fail(path, "png writer allocation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    fail(path, "png info allocation failed");
  }
  std::vector<png_byte> row;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(path, "png write failed");
  }

  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), file_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (file_depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);

  if (file_depth == 16) {
    for (int y = 0; y < img.height; ++y) {
      png_write_row(png, reinterpret_cast<png_const_bytep>(
                             img.pixels.data() + static_cast<std::size_t>(y) * img.width));
    }
  } else {
    row.resize(static_cast<std::size_t>(img.width));
    for (int y = 0; y < img.height; ++y) {
      const std::uint16_t* src = img.pixels.data() + static_cast<std::size_t>(y) * img.width;
      for (int x = 0; x < img.width; ++x) row[static_cast<std::size_t>(x)] = static_cast<png_byte>(src[x]);
      png_write_row(png, row.data());
    }
  }
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png8(const PixelImage& img, const std::string& path) {
  if (img.bit_depth != 8) {
    throw InputError(path + ": write_png8 requires an 8-bit image, got bit_depth " +
                     std::to_string(img.bit_depth));
  }
  write_png_impl(img, path, 8);
}

void write_png16(const PixelImage& img, const std::string& path) {
  write_png_impl(img, path, 16);
}

void write_pgm(const PixelImage& img, const std::string& path) {
  validate(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  const unsigned maxval = (1u << img.bit_depth) - 1;
  out << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
  if (maxval < 256) {
    for (std::uint16_t v : img.pixels) out.put(static_cast<char>(v));
  } else {
    for (std::uint16_t v : img.pixels) {
      out.put(static_cast<char>(v >> 8));
      out.put(static_cast<char>(v & 0xff));
    }
  }
  if (!out) fail(path, "write failed");
}

}  // namespace cadeval
