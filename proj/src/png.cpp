#include "zoopose/png.hpp"

#include "zoopose/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace zoopose {

namespace {

void on_png_error(png_structp png, png_const_charp message) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text) *text = message;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

// No objects with non-trivial destructors live inside the setjmp scope.
Bytes write_png(int width, int height, int color_type, int bit_depth, const std::vector<std::uint8_t>& rows_data,
                std::size_t row_bytes) {
  Bytes out;
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error, on_png_warning);
  if (!png) throw Error(Errc::io_error, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(rows_data.data() + static_cast<std::size_t>(y) * row_bytes);
  }
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::io_error, "PNG encode failed: " + error);
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t len) {
        auto* sink = static_cast<Bytes*>(png_get_io_ptr(p));
        sink->insert(sink->end(), data, data + len);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace

Bytes encode_png(const ControlImage& img) {
  if (img.width <= 0 || img.height <= 0 || img.rgb.size() != static_cast<std::size_t>(img.width) * img.height * 3) {
    throw Error(Errc::invalid_argument, "control image buffer does not match its size");
  }
  return write_png(img.width, img.height, PNG_COLOR_TYPE_RGB, 8, img.rgb, static_cast<std::size_t>(img.width) * 3);
}

Bytes encode_png(const DepthMap& depth) {
  if (depth.width <= 0 || depth.height <= 0 ||
      depth.depth.size() != static_cast<std::size_t>(depth.width) * depth.height) {
    throw Error(Errc::invalid_argument, "depth buffer does not match its size");
  }
  std::vector<std::uint8_t> rows(depth.depth.size() * 2);
  for (std::size_t i = 0; i < depth.depth.size(); ++i) {
    const auto v = static_cast<std::uint16_t>(std::lround(std::clamp(depth.depth[i], 0.0, 1.0) * 65535.0));
    rows[2 * i] = static_cast<std::uint8_t>(v >> 8);  // PNG samples are big-endian
    rows[2 * i + 1] = static_cast<std::uint8_t>(v & 0xff);
  }
  return write_png(depth.width, depth.height, PNG_COLOR_TYPE_GRAY, 16, rows, static_cast<std::size_t>(depth.width) * 2);
}

DecodedPng decode_png(std::span<const std::uint8_t> data) {
  DecodedPng out;
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  struct Reader {
    std::span<const std::uint8_t> data;
    std::size_t pos = 0;
  } reader{data, 0};
  std::vector<std::uint8_t> buffer;
  std::vector<png_bytep> rows;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(Errc::parse_error, "PNG decode failed: " + error);
  }
  png_set_read_fn(png, &reader, [](png_structp p, png_bytep dst, png_size_t len) {
    auto* r = static_cast<Reader*>(png_get_io_ptr(p));
    if (r->pos + len > r->data.size()) png_error(p, "truncated PNG");
    std::memcpy(dst, r->data.data() + r->pos, len);
    r->pos += len;
  });
  png_read_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.bit_depth = png_get_bit_depth(png, info);
  const auto row_bytes = png_get_rowbytes(png, info);
  out.channels = png_get_channels(png, info);
  buffer.resize(row_bytes * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[y] = buffer.data() + static_cast<std::size_t>(y) * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t count = static_cast<std::size_t>(out.width) * out.height * out.channels;
  out.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.samples[i] = out.bit_depth == 16 ? static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1])
                                         : buffer[i];
  }
  return out;
}

}  // namespace zoopose
