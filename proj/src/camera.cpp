#include "zoopose/camera.hpp"

#include "zoopose/error.hpp"

#include <cmath>
#include <numbers>

namespace zoopose {

namespace {

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

void validate_camera(const Camera& c) {
  if (!(std::isfinite(c.radius) && c.radius > 0.0)) throw Error(Errc::invalid_argument, "camera radius must be > 0");
  if (!(c.polar_deg > 0.0 && c.polar_deg < 180.0)) {
    throw Error(Errc::invalid_argument, "camera polar angle must lie in (0, 180)");
  }
  if (!(c.fov_deg > 0.0 && c.fov_deg < 180.0)) throw Error(Errc::invalid_argument, "camera fov must lie in (0, 180)");
  if (!std::isfinite(c.azimuth_deg) || !c.look_at.allFinite()) {
    throw Error(Errc::invalid_argument, "camera azimuth and look_at must be finite");
  }
  if (c.image.width <= 0 || c.image.height <= 0 || c.image.width > 8192 || c.image.height > 8192) {
    throw Error(Errc::invalid_argument, "camera image size must be within 1..8192");
  }
}

CameraFrame camera_frame(const Camera& c) {
  validate_camera(c);
  const double theta = radians(c.polar_deg);
  const double phi = radians(c.azimuth_deg);
  const Vec3 offset(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
  CameraFrame f;
  f.eye = c.look_at + c.radius * offset;
  f.forward = -offset;
  f.right = f.forward.cross(Vec3::UnitZ()).normalized();
  f.up = f.right.cross(f.forward);
  f.focal_px = 0.5 * c.image.height / std::tan(0.5 * radians(c.fov_deg));
  return f;
}

CameraSampler::CameraSampler(std::uint64_t seed, const CameraRanges& ranges, const Camera& base)
    : rng_(seed), ranges_(ranges), base_(base) {
  auto check = [](const Interval& r, const char* what) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
      throw Error(Errc::invalid_range, std::string(what) + " range must be finite with lo <= hi");
    }
  };
  check(ranges.radius, "radius");
  check(ranges.azimuth_deg, "azimuth");
  check(ranges.polar_deg, "polar");
  if (ranges.radius.lo <= 0.0) throw Error(Errc::invalid_range, "radius range must be positive");
  if (ranges.polar_deg.lo <= 0.0 || ranges.polar_deg.hi >= 180.0) {
    throw Error(Errc::invalid_range, "polar range must lie strictly inside (0, 180)");
  }
}

double CameraSampler::draw(const Interval& range) {
  // One draw per component, even for a degenerate range.
  const double u = std::generate_canonical<double, 53>(rng_);
  if (range.lo == range.hi) return range.lo;
  return range.lo + u * (range.hi - range.lo);
}

Camera CameraSampler::next() {
  Camera c = base_;
  c.radius = draw(ranges_.radius);
  c.azimuth_deg = draw(ranges_.azimuth_deg);
  c.polar_deg = draw(ranges_.polar_deg);
  return c;
}

Camera sample_camera(std::uint64_t seed, const CameraRanges& ranges, const Camera& base) {
  return CameraSampler(seed, ranges, base).next();
}

const ProjectedPoint* PoseProjection::find(std::string_view name) const {
  for (const auto& p : points) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

namespace {

ProjectedPoint project_with(const CameraFrame& f, const ImageSize& image, const Vec3& world) {
  ProjectedPoint p;
  const Vec3 rel = world - f.eye;
  p.camera_space = Vec3(rel.dot(f.right), rel.dot(f.up), rel.dot(f.forward));
  p.depth = p.camera_space.z();
  p.in_front = p.depth > kNearPlane;
  if (p.in_front) {
    p.pixel = Vec2(0.5 * image.width + f.focal_px * p.camera_space.x() / p.depth,
                   0.5 * image.height - f.focal_px * p.camera_space.y() / p.depth);
    p.in_frustum = p.pixel.x() >= 0.0 && p.pixel.x() <= image.width && p.pixel.y() >= 0.0 &&
                   p.pixel.y() <= image.height;
  } else {
    p.pixel = Vec2(std::nan(""), std::nan(""));
  }
  return p;
}

}  // namespace

PoseProjection project_keypoints(const Skeleton& s, const Camera& c) {
  const auto frame = camera_frame(c);
  PoseProjection out;
  out.image = c.image;
  out.focal_px = frame.focal_px;
  out.points.reserve(s.keypoints.size());
  for (const auto& kp : s.keypoints) {
    auto p = project_with(frame, c.image, kp.position);
    p.name = kp.name;
    out.points.push_back(std::move(p));
  }
  return out;
}

Vec2 project_point(const Camera& c, const Vec3& world) {
  return project_with(camera_frame(c), c.image, world).pixel;
}

std::string directional_prompt(std::string_view user_text, const Camera& c) {
  std::string out(user_text);
  if (c.polar_deg < 30.0) return out + ", overhead view";
  double az = std::fmod(c.azimuth_deg, 360.0);
  if (az < 0.0) az += 360.0;
  if (az < 45.0 || az >= 315.0) return out + ", front view";
  if (az >= 135.0 && az < 225.0) return out + ", back view";
  return out + ", side view";
}

}  // namespace zoopose
