#include "zoopose/render.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace zoopose {

const std::array<Rgb, 18>& keypoint_palette() {
  // Indexed like canonical_keypoint_names().
  static const std::array<Rgb, 18> palette = {{
      {255, 0, 170},  {170, 0, 255},  {255, 0, 0},    {255, 85, 0},   {255, 170, 0},  {255, 255, 0},
      {170, 255, 0},  {85, 255, 0},   {0, 255, 0},    {0, 255, 85},   {0, 255, 170},  {0, 255, 255},
      {0, 170, 255},  {0, 85, 255},   {0, 0, 255},    {85, 0, 255},   {255, 0, 255},  {255, 0, 85},
  }};
  return palette;
}

Rgb keypoint_color(std::string_view name) {
  const auto& names = canonical_keypoint_names();
  const auto& palette = keypoint_palette();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return palette[i];
  }
  const auto base = base_keypoint_name(name);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].substr(0, base.size()) == base) return palette[i];
  }
  unsigned sum = 0;
  for (unsigned char ch : name) sum += ch;
  return palette[sum % palette.size()];
}

namespace {

class Canvas {
 public:
  Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * h * 3, 0.0) {}

  void blend(int x, int y, const Rgb& c, double alpha) {
    if (alpha <= 0.0) return;
    alpha = std::min(alpha, 1.0);
    auto* p = &px_[3 * (static_cast<std::size_t>(y) * w_ + x)];
    p[0] = p[0] * (1.0 - alpha) + c.r * alpha;
    p[1] = p[1] * (1.0 - alpha) + c.g * alpha;
    p[2] = p[2] * (1.0 - alpha) + c.b * alpha;
  }

  // Coverage falls off linearly over one pixel outside the shape boundary.
  template <typename Distance>
  void fill(double x0, double y0, double x1, double y1, double reach, const Rgb& c, Distance dist) {
    const int xa = std::max(0, static_cast<int>(std::floor(std::min(x0, x1) - reach - 1.0)));
    const int xb = std::min(w_ - 1, static_cast<int>(std::ceil(std::max(x0, x1) + reach + 1.0)));
    const int ya = std::max(0, static_cast<int>(std::floor(std::min(y0, y1) - reach - 1.0)));
    const int yb = std::min(h_ - 1, static_cast<int>(std::ceil(std::max(y0, y1) + reach + 1.0)));
    for (int y = ya; y <= yb; ++y) {
      for (int x = xa; x <= xb; ++x) {
        const double d = dist(Vec2(x + 0.5, y + 0.5));
        blend(x, y, c, std::clamp(reach + 0.5 - d, 0.0, 1.0));
      }
    }
  }

  ControlImage finish() const {
    ControlImage img{w_, h_, std::vector<std::uint8_t>(px_.size())};
    for (std::size_t i = 0; i < px_.size(); ++i) {
      img.rgb[i] = static_cast<std::uint8_t>(std::lround(std::clamp(px_[i], 0.0, 255.0)));
    }
    return img;
  }

 private:
  int w_, h_;
  std::vector<double> px_;
};

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

// Pixel position of an endpoint, clipping toward the visible end when it lies
// behind the camera.
std::optional<Vec2> visible_end(const PoseProjection& proj, const ProjectedPoint& end, const ProjectedPoint& other) {
  if (end.in_front) return end.pixel;
  if (!other.in_front) return std::nullopt;
  const double clip_z = std::max(2.0 * kNearPlane, 1e-3 * other.depth);
  const double t = (other.camera_space.z() - clip_z) / (other.camera_space.z() - end.camera_space.z());
  const Vec3 q = other.camera_space + t * (end.camera_space - other.camera_space);
  return Vec2(0.5 * proj.image.width + proj.focal_px * q.x() / q.z(),
              0.5 * proj.image.height - proj.focal_px * q.y() / q.z());
}

}  // namespace

ControlImage rasterize_pose_image(const PoseProjection& proj, std::span<const Bone> bones, const ControlStyle& style) {
  Canvas canvas(proj.image.width, proj.image.height);
  const double scale = std::min(proj.image.width, proj.image.height) / 512.0;
  const double half_stroke = 0.5 * style.stroke_px * scale;

  for (const auto& bone : bones) {
    const auto* a = proj.find(bone.parent);
    const auto* b = proj.find(bone.child);
    if (!a || !b || !(a->in_frustum || b->in_frustum)) continue;
    auto pa = visible_end(proj, *a, *b);
    auto pb = visible_end(proj, *b, *a);
    if (!pa || !pb) continue;
    canvas.fill(pa->x(), pa->y(), pb->x(), pb->y(), half_stroke, keypoint_color(bone.child),
                [&](const Vec2& p) { return segment_distance(p, *pa, *pb); });
  }

  if (style.draw_keypoints) {
    const double radius = style.disc_radius_px * scale;
    for (const auto& p : proj.points) {
      if (!p.in_frustum) continue;
      canvas.fill(p.pixel.x(), p.pixel.y(), p.pixel.x(), p.pixel.y(), radius, keypoint_color(p.name),
                  [&](const Vec2& q) { return (q - p.pixel).norm(); });
    }
  }
  return canvas.finish();
}

}  // namespace zoopose
