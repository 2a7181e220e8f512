#pragma once

#include "zoopose/skeleton.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace zoopose {

using Vec2 = Eigen::Vector2d;

struct ImageSize {
  int width = 512;
  int height = 512;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// Orbit camera on a sphere around `look_at`. Azimuth 0 sits on +x (facing
/// the animal's front), azimuth 90 on +y; polar is measured from world +z.
struct Camera {
  double radius = 1.5;
  double azimuth_deg = 0.0;
  double polar_deg = 90.0;
  double fov_deg = 50.0;  // vertical
  Vec3 look_at = Vec3::Zero();
  ImageSize image;

  friend bool operator==(const Camera&, const Camera&) = default;
};

/// Throws Error{invalid_argument} unless radius > 0, polar and fov in (0, 180)
/// and the image is non-empty.
void validate_camera(const Camera& c);

struct CameraFrame {
  Vec3 eye;
  Vec3 forward;
  Vec3 right;
  Vec3 up;
  double focal_px;  // pinhole focal length in pixels
};

CameraFrame camera_frame(const Camera& c);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct CameraRanges {
  Interval radius{1.0, 2.0};
  Interval azimuth_deg{0.0, 360.0};
  Interval polar_deg{60.0, 120.0};
};

/// Draws cameras with each spherical coordinate independent and uniform in
/// its interval. Fov, image size and look_at come from `base`.
class CameraSampler {
 public:
  /// Throws Error{invalid_range}.
  CameraSampler(std::uint64_t seed, const CameraRanges& ranges = {}, const Camera& base = {});
  Camera next();

 private:
  double draw(const Interval& range);

  std::mt19937_64 rng_;
  CameraRanges ranges_;
  Camera base_;
};

Camera sample_camera(std::uint64_t seed, const CameraRanges& ranges = {}, const Camera& base = {});

struct ProjectedPoint {
  std::string name;
  Vec2 pixel = Vec2::Zero();  // x right, y down; pixel centers at +0.5
  double depth = 0.0;         // camera-space distance along the view axis
  Vec3 camera_space = Vec3::Zero();
  bool in_front = false;
  bool in_frustum = false;
};

struct PoseProjection {
  ImageSize image;
  double focal_px = 0.0;
  std::vector<ProjectedPoint> points;  // keypoint order

  const ProjectedPoint* find(std::string_view name) const;
};

inline constexpr double kNearPlane = 1e-6;

PoseProjection project_keypoints(const Skeleton& s, const Camera& c);
/// Single-point pinhole projection (pixel coordinates, y down).
Vec2 project_point(const Camera& c, const Vec3& world);

/// Appends ", front view" / ", side view" / ", back view" by azimuth quadrant,
/// or ", overhead view" when polar < 30 degrees.
std::string directional_prompt(std::string_view user_text, const Camera& c);

}  // namespace zoopose
