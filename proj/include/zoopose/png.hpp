#pragma once

#include "zoopose/render.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace zoopose {

using Bytes = std::vector<std::uint8_t>;

/// 8-bit RGB PNG. Output is byte-stable for identical input.
Bytes encode_png(const ControlImage& img);
/// 16-bit grayscale PNG, sample = round(depth * 65535).
Bytes encode_png(const DepthMap& depth);

struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;  // row-major, interleaved channels
};

/// Throws Error{parse_error}.
DecodedPng decode_png(std::span<const std::uint8_t> data);

}  // namespace zoopose
