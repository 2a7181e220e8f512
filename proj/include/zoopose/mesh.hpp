#pragma once

#include "zoopose/skeleton.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace zoopose {

enum class PrimitiveKind { cylinder, cone, ellipsoid };

std::string_view to_string(PrimitiveKind kind);

/// One closed solid in the balloon mesh. Cylinders run axis_start -> axis_end;
/// cones run base center -> apex; ellipsoids are centered on axis_start with
/// their first semi-axis along (axis_end - axis_start).
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::cylinder;
  std::string role;   // limb, limb_root, neck, tail, spine, segment, torso, eye, nose
  std::string label;  // part label written as the OBJ group name
  std::optional<Bone> source_bone;
  std::optional<std::string> source_keypoint;
  Vec3 axis_start = Vec3::Zero();
  Vec3 axis_end = Vec3::Zero();
  Vec3 semi_axes = Vec3::Zero();  // ellipsoids only
  double radius = 0.0;            // cylinders and cone base
  std::size_t first_vertex = 0, vertex_count = 0;
  std::size_t first_triangle = 0, triangle_count = 0;
};

using Triangle = std::array<std::uint32_t, 3>;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<std::string> part_labels;  // one per triangle
  std::vector<Primitive> primitives;     // empty for imported meshes
};

/// Problems found by check_mesh; empty when the mesh is valid.
std::vector<std::string> check_mesh(const TriMesh& m);

struct PrimitiveParams {
  double cylinder_radius_factor = 0.12;  // radius = factor * bone length, clamped
  double cylinder_radius_min = 0.01;
  double cylinder_radius_max = 0.08;
  double eye_radius = 0.02;
  double cone_length_fraction = 0.3;  // of the nose-to-neck distance
  double cone_length_max = 0.12;
  double cone_radius_factor = 1.0;  // relative to the neck cylinder radius
  double torso_length_factor = 1.1;  // semi-axis along the spine, relative to half the spine
  double torso_width_factor = 0.6;   // lateral semi-axis, relative to the mean thigh spacing
  double torso_height_factor = 0.9;  // vertical semi-axis, relative to the lateral one
  bool spine_blend = false;          // also emit two half-spine cylinders under the torso
  int radial_segments = 16;
  int ellipsoid_rings = 12;
};

struct DegenerateBone {
  Bone bone;
  double length = 0.0;
};

struct MeshBuild {
  TriMesh mesh;
  std::vector<DegenerateBone> skipped;
};

/// Minimum bone length that still gets a primitive.
inline constexpr double kDegenerateBoneLength = 1e-9;

/// Balloon-animal mesh: torso ellipsoid on the spine, capped cylinders on
/// limb/neck/tail bones, a cone at each nose, small ellipsoids at the eyes.
/// Throws Error{invalid_skeleton} or Error{invalid_argument} for bad params.
MeshBuild build_mesh(const Skeleton& s, const PrimitiveParams& params = {});

/// Vertex/triangle counts produced for one primitive at the given tessellation.
struct Tessellation {
  std::size_t vertices = 0;
  std::size_t triangles = 0;
};
Tessellation tessellation_of(PrimitiveKind kind, int radial_segments, int ellipsoid_rings);

/// Wavefront OBJ: header comment, all `v` lines, then `g <label>` + `f` lines.
std::string export_obj(const TriMesh& m);
/// Reads v/f/g records (polygons fan-triangulated, negative indices allowed).
/// Throws Error{parse_error}.
TriMesh import_obj(std::string_view text);

}  // namespace zoopose
