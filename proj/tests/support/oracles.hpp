#pragma once

#include "zoopose/camera.hpp"
#include "zoopose/guidance.hpp"
#include "zoopose/library.hpp"
#include "zoopose/mesh.hpp"
#include "zoopose/skeleton.hpp"

#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace zptest {

using namespace zoopose;

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
int uniform_int(Rng& rng, int lo, int hi);  // inclusive
Vec3 uniform_vec(Rng& rng, double lo, double hi);
Grid random_grid(Rng& rng, int rows, int cols, double lo = -1.0, double hi = 1.0);

/// Random tree over n keypoints named kp_0..kp_{n-1}, bones parent -> child.
Skeleton random_tree_skeleton(Rng& rng, int n, double spread = 0.8);

Skeleton library_skeleton(const std::string& display_name);

/// Rotation about world +z through the origin.
Skeleton rotate_z(const Skeleton& s, double degrees);
Skeleton scaled(const Skeleton& s, double k);

/// Independent pinhole model: camera-space coordinates (x right, y up, z forward).
struct OracleCamera {
  Vec3 eye, right, up, forward;
  double focal = 0.0;
  int width = 0, height = 0;
};
OracleCamera oracle_camera(const Camera& c);
Vec2 oracle_project(const OracleCamera& oc, const Vec3& world);

/// Nearest camera-space depth hit through pixel position (px, py), or +inf.
double raycast(const TriMesh& m, const OracleCamera& oc, double px, double py, double near_clip);

struct OracleDepth {
  int width = 0, height = 0;
  std::vector<double> depth;     // normalized, 0 for background
  std::vector<bool> silhouette;  // coverage or depth jumps under sub-pixel jitter
  double near = 0.0, far = 0.0;
};
OracleDepth raycast_depth(const TriMesh& m, const Camera& c, double near_clip = 1e-4);

TriMesh random_triangle_soup(Rng& rng, int triangles, double extent = 0.5);

/// Edge-incidence check over triangles [first, first + count).
struct EdgeStats {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::size_t faces = 0;
  bool every_edge_twice = true;      // each undirected edge used by exactly 2 triangles
  bool consistently_oriented = true;  // each directed edge used once
  long euler() const { return static_cast<long>(vertices) - static_cast<long>(edges) + static_cast<long>(faces); }
};
EdgeStats edge_stats(const TriMesh& m, std::size_t first, std::size_t count);

/// Central differences of f at x with step h, entry by entry.
Grid central_difference(const std::function<double(const Grid&)>& f, const Grid& x, double h);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

}  // namespace zptest
