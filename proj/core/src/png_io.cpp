// SPDX-License-Identifier: Apache-2.0
#include "burstkernel/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "burstkernel/error.hpp"

namespace burstkernel {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void on_png_error(png_structp png, png_const_charp msg) {
  auto* message = static_cast<std::string*>(png_get_error_ptr(png));
  if (message) *message = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

}  // namespace

ImageF read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw DataError("cannot open " + path.string());

  std::string message;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
  if (!png) throw DataError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("libpng initialisation failed");
  }

  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int channels = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("invalid PNG " + path.string() + ": " + message);
  }

  png_init_io(png, file.get());
  png_read_info(png, info);
  int color_type = 0;
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr,
               nullptr);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_set_strip_alpha(png);
  if (bit_depth == 16) png_set_swap(png);  // little-endian samples in memory
  png_read_update_info(png, info);

  bit_depth = png_get_bit_depth(png, info);
  channels = png_get_channels(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  pixels.resize(row_bytes * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels != 1 && channels != 3) throw DataError("unsupported PNG channel layout");
  const int color = channels;
  const double scale = bit_depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
  ImageF image(static_cast<int>(height), static_cast<int>(width), color);
  for (png_uint_32 y = 0; y < height; ++y) {
    for (png_uint_32 x = 0; x < width; ++x) {
      for (int c = 0; c < color; ++c) {
        const std::size_t sample = static_cast<std::size_t>(x) * channels + c;
        unsigned code = 0;
        if (bit_depth == 16) {
          const std::uint8_t* p = rows[y] + 2 * sample;
          code = static_cast<unsigned>(p[0]) | (static_cast<unsigned>(p[1]) << 8);
        } else {
          code = rows[y][sample];
        }
        image(static_cast<int>(y), static_cast<int>(x), c) = static_cast<float>(code * scale);
      }
    }
  }
  return image;
}

void write_png(const std::filesystem::path& path, const ImageF& image, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw UsageError("PNG bit depth must be 8 or 16");
  if (image.channels() != 1 && image.channels() != 3) {
    throw UsageError("PNG export supports 1 or 3 channels");
  }
  if (image.height() == 0 || image.width() == 0) throw DataError("cannot write an empty PNG");

  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw DataError("cannot open " + path.string() + " for writing");

  std::string message;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
  if (!png) throw DataError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("libpng initialisation failed");
  }

  const int channels = image.channels();
  const std::size_t bytes_per_sample = bit_depth / 8;
  const std::size_t row_bytes = static_cast<std::size_t>(image.width()) * channels * bytes_per_sample;
  const double max_code = bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<std::uint8_t> buffer(row_bytes * image.height());
  for (int y = 0; y < image.height(); ++y) {
    std::uint8_t* row = buffer.data() + y * row_bytes;
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < channels; ++c) {
        const double v = std::clamp(static_cast<double>(image(y, x, c)), 0.0, 1.0);
        const auto code = static_cast<unsigned>(std::lround(v * max_code));
        const std::size_t sample = static_cast<std::size_t>(x) * channels + c;
        if (bit_depth == 16) {
          row[2 * sample] = static_cast<std::uint8_t>(code >> 8);  // PNG is big-endian
          row[2 * sample + 1] = static_cast<std::uint8_t>(code & 0xff);
        } else {
          row[sample] = static_cast<std::uint8_t>(code);
        }
      }
    }
  }
  std::vector<png_bytep> rows(image.height());
  for (int y = 0; y < image.height(); ++y) rows[y] = buffer.data() + y * row_bytes;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("failed writing PNG " + path.string() + ": " + message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
               static_cast<png_uint_32>(image.height()), bit_depth,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace burstkernel
