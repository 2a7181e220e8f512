#pragma once

#include "zoopose/camera.hpp"
#include "zoopose/mesh.hpp"
#include "zoopose/skeleton.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace zoopose {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB, row-major, top row first.
struct ControlImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Rgb at(int x, int y) const {
    const auto i = 3 * (static_cast<std::size_t>(y) * width + x);
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
  }
  friend bool operator==(const ControlImage&, const ControlImage&) = default;
};

/// Stroke and disc sizes are given for a 512 px image and scale linearly with
/// min(width, height).
struct ControlStyle {
  double stroke_px = 4.0;
  double disc_radius_px = 4.0;
  bool draw_keypoints = true;
};

/// Fixed color of the canonical keypoint a (possibly suffixed) name maps to.
Rgb keypoint_color(std::string_view name);
const std::array<Rgb, 18>& keypoint_palette();

/// Bones are anti-aliased strokes colored by their child keypoint, keypoints
/// are filled discs, background black. A bone is drawn when at least one end
/// is in the frustum; an end behind the camera is clipped at the near plane.
ControlImage rasterize_pose_image(const PoseProjection& p, std::span<const Bone> bones, const ControlStyle& style = {});

/// Normalized depth, row-major, 0 = background, nearer = larger.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> depth;
  double near = 0.0;  // camera-space depth mapped to 1
  double far = 0.0;   // camera-space depth mapped to 0

  double at(int x, int y) const { return depth[static_cast<std::size_t>(y) * width + x]; }
};

/// Near-plane clip distance used by the depth rasterizer.
inline constexpr double kDepthNearClip = 1e-4;

/// Perspective-correct z-buffer rasterization of every triangle (two-sided),
/// sampled at pixel centers with a top-left fill rule. Depth is normalized as
/// (far - z) / (far - near) over the visible geometry's vertex depth range;
/// an empty mesh gives an all-zero map.
DepthMap render_depth(const TriMesh& m, const Camera& c);

}  // namespace zoopose
