#include "zoopose/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace zoopose {

namespace {

// Sutherland-Hodgman against z >= near; returns 0, 3 or 4 vertices.
std::vector<Vec3> clip_near(const std::array<Vec3, 3>& tri, double near) {
  std::vector<Vec3> out;
  for (int i = 0; i < 3; ++i) {
    const Vec3& a = tri[i];
    const Vec3& b = tri[(i + 1) % 3];
    const bool a_in = a.z() >= near, b_in = b.z() >= near;
    if (a_in) out.push_back(a);
    if (a_in != b_in) {
      const double t = (near - a.z()) / (b.z() - a.z());
      Vec3 q = a + t * (b - a);
      q.z() = near;
      out.push_back(q);
    }
  }
  return out;
}

// Positive when p lies to the interior side of a->b for a positively wound
// triangle in y-down screen space.
double edge(const Vec2& a, const Vec2& b, const Vec2& p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

bool top_left(const Vec2& a, const Vec2& b) {
  const double dy = b.y() - a.y();
  return dy < 0.0 || (dy == 0.0 && b.x() - a.x() > 0.0);
}

}  // namespace

DepthMap render_depth(const TriMesh& m, const Camera& c) {
  const auto frame = camera_frame(c);
  const int w = c.image.width, h = c.image.height;
  DepthMap out{w, h, std::vector<double>(static_cast<std::size_t>(w) * h, 0.0), 0.0, 0.0};
  std::vector<double> zbuf(out.depth.size(), std::numeric_limits<double>::infinity());

  std::vector<Vec3> cam(m.vertices.size());
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    const Vec3 rel = m.vertices[i] - frame.eye;
    cam[i] = Vec3(rel.dot(frame.right), rel.dot(frame.up), rel.dot(frame.forward));
  }
  auto to_screen = [&](const Vec3& q) {
    return Vec2(0.5 * w + frame.focal_px * q.x() / q.z(), 0.5 * h - frame.focal_px * q.y() / q.z());
  };

  double near = std::numeric_limits<double>::infinity();
  double far = -std::numeric_limits<double>::infinity();

  auto raster = [&](const Vec3& q0, const Vec3& q1, const Vec3& q2) {
    Vec2 s0 = to_screen(q0), s1 = to_screen(q1), s2 = to_screen(q2);
    double z0 = q0.z(), z1 = q1.z(), z2 = q2.z();
    double area = edge(s0, s1, s2);
    if (!std::isfinite(area) || std::abs(area) < 1e-14) return;
    if (area < 0.0) {
      std::swap(s1, s2);
      std::swap(z1, z2);
      area = -area;
    }
    const int xa = std::max(0, static_cast<int>(std::floor(std::min({s0.x(), s1.x(), s2.x()}))));
    const int xb = std::min(w - 1, static_cast<int>(std::ceil(std::max({s0.x(), s1.x(), s2.x()}))));
    const int ya = std::max(0, static_cast<int>(std::floor(std::min({s0.y(), s1.y(), s2.y()}))));
    const int yb = std::min(h - 1, static_cast<int>(std::ceil(std::max({s0.y(), s1.y(), s2.y()}))));
    const bool tl0 = top_left(s1, s2), tl1 = top_left(s2, s0), tl2 = top_left(s0, s1);
    for (int y = ya; y <= yb; ++y) {
      for (int x = xa; x <= xb; ++x) {
        const Vec2 p(x + 0.5, y + 0.5);
        const double e0 = edge(s1, s2, p), e1 = edge(s2, s0, p), e2 = edge(s0, s1, p);
        if (e0 < 0.0 || e1 < 0.0 || e2 < 0.0) continue;
        if ((e0 == 0.0 && !tl0) || (e1 == 0.0 && !tl1) || (e2 == 0.0 && !tl2)) continue;
        // Screen-space barycentrics interpolate 1/z linearly.
        const double inv_z = (e0 / z0 + e1 / z1 + e2 / z2) / area;
        const double z = 1.0 / inv_z;
        auto& slot = zbuf[static_cast<std::size_t>(y) * w + x];
        if (z < slot) slot = z;
      }
    }
  };

  for (const auto& tri : m.triangles) {
    const std::array<Vec3, 3> q = {cam[tri[0]], cam[tri[1]], cam[tri[2]]};
    auto poly = clip_near(q, kDepthNearClip);
    if (poly.size() < 3) continue;
    for (const auto& v : poly) {
      near = std::min(near, v.z());
      far = std::max(far, v.z());
    }
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) raster(poly[0], poly[k], poly[k + 1]);
  }

  if (!(near <= far)) return out;
  out.near = near;
  out.far = far;
  const double span = far - near;
  for (std::size_t i = 0; i < zbuf.size(); ++i) {
    if (!std::isfinite(zbuf[i])) continue;
    out.depth[i] = span > 1e-12 ? std::clamp((far - zbuf[i]) / span, 0.0, 1.0) : 1.0;
  }
  return out;
}

}  // namespace zoopose
