#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

namespace zptest {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Vec3 uniform_vec(Rng& rng, double lo, double hi) {
  const double x = uniform(rng, lo, hi);
  const double y = uniform(rng, lo, hi);
  const double z = uniform(rng, lo, hi);
  return {x, y, z};
}

Grid random_grid(Rng& rng, int rows, int cols, double lo, double hi) {
  Grid g(rows, cols);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = uniform(rng, lo, hi);
  return g;
}

Skeleton random_tree_skeleton(Rng& rng, int n, double spread) {
  Skeleton s;
  s.name = "random";
  s.pose_description = "tree " + std::to_string(n);
  for (int i = 0; i < n; ++i) s.keypoints.push_back({"kp_" + std::to_string(i), uniform_vec(rng, -spread, spread)});
  for (int i = 1; i < n; ++i) {
    const int parent = uniform_int(rng, 0, i - 1);
    s.bones.push_back({"kp_" + std::to_string(parent), "kp_" + std::to_string(i)});
  }
  return s;
}

Skeleton library_skeleton(const std::string& display_name) {
  static const PoseLibrary lib = load_builtin_library();
  return find_by_display_name(lib, display_name).value().skeleton;
}

Skeleton rotate_z(const Skeleton& s, double degrees) {
  const double a = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(a), si = std::sin(a);
  Skeleton out = s;
  for (auto& kp : out.keypoints) {
    const Vec3 p = kp.position;
    kp.position = Vec3(c * p.x() - si * p.y(), si * p.x() + c * p.y(), p.z());
  }
  return out;
}

Skeleton scaled(const Skeleton& s, double k) {
  Skeleton out = s;
  for (auto& kp : out.keypoints) kp.position *= k;
  return out;
}

OracleCamera oracle_camera(const Camera& c) {
  const double th = c.polar_deg * std::numbers::pi / 180.0;
  const double ph = c.azimuth_deg * std::numbers::pi / 180.0;
  OracleCamera oc;
  oc.eye = c.look_at + c.radius * Vec3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
  oc.forward = (c.look_at - oc.eye).normalized();
  // Right-handed view basis with world +z as the up hint.
  oc.right = Vec3(oc.forward.y(), -oc.forward.x(), 0.0).normalized();
  oc.up = oc.right.cross(oc.forward);
  oc.width = c.image.width;
  oc.height = c.image.height;
  oc.focal = (c.image.height / 2.0) / std::tan(c.fov_deg * std::numbers::pi / 360.0);
  return oc;
}

Vec2 oracle_project(const OracleCamera& oc, const Vec3& world) {
  const Vec3 d = world - oc.eye;
  const double x = d.dot(oc.right), y = d.dot(oc.up), z = d.dot(oc.forward);
  return {oc.width / 2.0 + oc.focal * x / z, oc.height / 2.0 - oc.focal * y / z};
}

double raycast(const TriMesh& m, const OracleCamera& oc, double px, double py, double near_clip) {
  const Vec3 dir = oc.forward + ((px - oc.width / 2.0) / oc.focal) * oc.right + ((oc.height / 2.0 - py) / oc.focal) * oc.up;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& tri : m.triangles) {
    const Vec3& a = m.vertices[tri[0]];
    const Vec3& b = m.vertices[tri[1]];
    const Vec3& c = m.vertices[tri[2]];
    // Moller-Trumbore; dir has unit forward component, so t is camera depth.
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 pv = dir.cross(e2);
    const double det = e1.dot(pv);
    if (std::abs(det) < 1e-15) continue;
    const Vec3 tv = oc.eye - a;
    const double u = tv.dot(pv) / det;
    if (u < 0.0 || u > 1.0) continue;
    const Vec3 qv = tv.cross(e1);
    const double v = dir.dot(qv) / det;
    if (v < 0.0 || u + v > 1.0) continue;
    const double t = e2.dot(qv) / det;
    if (t >= near_clip && t < best) best = t;
  }
  return best;
}

OracleDepth raycast_depth(const TriMesh& m, const Camera& c, double near_clip) {
  const auto oc = oracle_camera(c);
  OracleDepth out;
  out.width = oc.width;
  out.height = oc.height;
  const auto n = static_cast<std::size_t>(oc.width) * oc.height;
  out.depth.assign(n, 0.0);
  out.silhouette.assign(n, false);

  double near = std::numeric_limits<double>::infinity();
  double far = -near;
  for (const auto& tri : m.triangles) {
    bool any_in = false, any_out = false;
    for (auto i : tri) {
      const double z = (m.vertices[i] - oc.eye).dot(oc.forward);
      if (z >= near_clip) {
        any_in = true;
        near = std::min(near, z);
        far = std::max(far, z);
      } else {
        any_out = true;
      }
    }
    if (any_in && any_out) near = std::min(near, near_clip);
  }
  if (!(near <= far)) return out;
  out.near = near;
  out.far = far;
  const double span = far - near;
  auto normalize = [&](double z) {
    if (!std::isfinite(z)) return 0.0;
    return span > 1e-12 ? std::clamp((far - z) / span, 0.0, 1.0) : 1.0;
  };

  const double jitter = 1e-3;
  for (int y = 0; y < oc.height; ++y) {
    for (int x = 0; x < oc.width; ++x) {
      const double cx = x + 0.5, cy = y + 0.5;
      const double z = raycast(m, oc, cx, cy, near_clip);
      const auto i = static_cast<std::size_t>(y) * oc.width + x;
      out.depth[i] = normalize(z);
      for (const auto& [dx, dy] : {std::pair{jitter, 0.0}, {-jitter, 0.0}, {0.0, jitter}, {0.0, -jitter}}) {
        const double zj = raycast(m, oc, cx + dx, cy + dy, near_clip);
        if (std::isfinite(zj) != std::isfinite(z) || std::abs(normalize(zj) - out.depth[i]) > 1e-3) {
          out.silhouette[i] = true;
          break;
        }
      }
    }
  }
  return out;
}

TriMesh random_triangle_soup(Rng& rng, int triangles, double extent) {
  TriMesh m;
  for (int t = 0; t < triangles; ++t) {
    const Vec3 center = uniform_vec(rng, -extent, extent);
    const auto base = static_cast<std::uint32_t>(m.vertices.size());
    for (int k = 0; k < 3; ++k) m.vertices.push_back(center + uniform_vec(rng, -0.3, 0.3));
    m.triangles.push_back({base, base + 1, base + 2});
    m.part_labels.push_back("soup");
  }
  return m;
}

EdgeStats edge_stats(const TriMesh& m, std::size_t first, std::size_t count) {
  EdgeStats s;
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> undirected;
  std::set<std::pair<std::uint32_t, std::uint32_t>> directed;
  std::set<std::uint32_t> verts;
  for (std::size_t t = first; t < first + count; ++t) {
    const auto& tri = m.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const auto a = tri[k], b = tri[(k + 1) % 3];
      verts.insert(a);
      ++undirected[std::minmax(a, b)];
      if (!directed.emplace(a, b).second) s.consistently_oriented = false;
    }
  }
  for (const auto& [edge, uses] : undirected) {
    if (uses != 2) s.every_edge_twice = false;
  }
  s.vertices = verts.size();
  s.edges = undirected.size();
  s.faces = count;
  return s;
}

Grid central_difference(const std::function<double(const Grid&)>& f, const Grid& x, double h) {
  Grid g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Grid xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  // Minimum over the closed segment via the endpoint and interior candidates.
  double best = std::min((p - a).norm(), (p - b).norm());
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 > 0.0) {
    const double t = (p - a).dot(d) / len2;
    if (t > 0.0 && t < 1.0) {
      const Vec2 n(-d.y(), d.x());
      best = std::min(best, std::abs((p - a).dot(n)) / std::sqrt(len2));
    }
  }
  return best;
}

}  // namespace zptest
