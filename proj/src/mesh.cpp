#include "zoopose/mesh.hpp"

#include "zoopose/error.hpp"
#include "zoopose/text_util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace zoopose {

std::string_view to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::cylinder: return "cylinder";
    case PrimitiveKind::cone: return "cone";
    case PrimitiveKind::ellipsoid: return "ellipsoid";
  }
  return "unknown";
}

std::vector<std::string> check_mesh(const TriMesh& m) {
  std::vector<std::string> problems;
  if (m.part_labels.size() != m.triangles.size()) {
    problems.push_back("part_labels has " + std::to_string(m.part_labels.size()) + " entries for " +
                       std::to_string(m.triangles.size()) + " triangles");
  }
  std::vector<bool> used(m.vertices.size(), false);
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    bool in_range = true;
    for (auto idx : tri) {
      if (idx >= m.vertices.size()) {
        problems.push_back("triangle " + std::to_string(t) + " index " + std::to_string(idx) + " out of range");
        in_range = false;
      } else {
        used[idx] = true;
      }
    }
    if (!in_range) continue;
    double area = 0.5 * (m.vertices[tri[1]] - m.vertices[tri[0]]).cross(m.vertices[tri[2]] - m.vertices[tri[0]]).norm();
    if (area <= 1e-12) problems.push_back("triangle " + std::to_string(t) + " is degenerate");
  }
  for (std::size_t v = 0; v < used.size(); ++v) {
    if (!used[v]) problems.push_back("vertex " + std::to_string(v) + " is unreferenced");
  }
  return problems;
}

Tessellation tessellation_of(PrimitiveKind kind, int segments, int rings) {
  const auto n = static_cast<std::size_t>(segments);
  const auto r = static_cast<std::size_t>(rings);
  switch (kind) {
    case PrimitiveKind::cylinder: return {2 * n + 2, 4 * n};  // two rings + cap centers
    case PrimitiveKind::cone: return {n + 2, 2 * n};            // base ring + apex + base center
    case PrimitiveKind::ellipsoid: return {n * (r - 1) + 2, 2 * n * (r - 1)};  // inner rings + poles
  }
  return {};
}

namespace {

// Orthonormal pair perpendicular to unit vector u.
std::pair<Vec3, Vec3> perpendicular_frame(const Vec3& u) {
  Vec3 helper = std::abs(u.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  Vec3 v = helper.cross(u).normalized();
  Vec3 w = u.cross(v);
  return {v, w};
}

class MeshBuilder {
 public:
  explicit MeshBuilder(int segments, int rings) : segments_(segments), rings_(rings) {}

  TriMesh& mesh() { return mesh_; }

  void cylinder(Primitive p, double radius) {
    p.kind = PrimitiveKind::cylinder;
    p.radius = radius;
    begin(p);
    const Vec3 axis = p.axis_end - p.axis_start;
    const auto [v, w] = perpendicular_frame(axis.normalized());
    const auto base = vertex_count();
    for (const Vec3& center : {p.axis_start, p.axis_end}) {
      for (int i = 0; i < segments_; ++i) add_vertex(center + radius * ring_dir(v, w, i));
    }
    const auto cap0 = add_vertex(p.axis_start);
    const auto cap1 = add_vertex(p.axis_end);
    const auto n = static_cast<std::uint32_t>(segments_);
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto j = (i + 1) % n;
      const auto a0 = base + i, b0 = base + j, a1 = base + n + i, b1 = base + n + j;
      add_triangle({a0, b0, b1});
      add_triangle({a0, b1, a1});
      add_triangle({cap0, b0, a0});
      add_triangle({cap1, a1, b1});
    }
    end(std::move(p));
  }

  /// axis_start is the base center, axis_end the apex.
  void cone(Primitive p, double radius) {
    p.kind = PrimitiveKind::cone;
    p.radius = radius;
    begin(p);
    const Vec3 axis = p.axis_end - p.axis_start;
    const auto [v, w] = perpendicular_frame(axis.normalized());
    const auto base = vertex_count();
    for (int i = 0; i < segments_; ++i) add_vertex(p.axis_start + radius * ring_dir(v, w, i));
    const auto apex = add_vertex(p.axis_end);
    const auto center = add_vertex(p.axis_start);
    const auto n = static_cast<std::uint32_t>(segments_);
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto j = (i + 1) % n;
      add_triangle({apex, base + i, base + j});
      add_triangle({center, base + j, base + i});
    }
    end(std::move(p));
  }

  /// Frame (u, v, w) must be orthonormal; semi-axes apply along u, v, w.
  void ellipsoid(Primitive p, const Vec3& u, const Vec3& v, const Vec3& w, const Vec3& semi) {
    p.kind = PrimitiveKind::ellipsoid;
    p.axis_end = p.axis_start + semi.x() * u;
    p.semi_axes = semi;
    begin(p);
    const Vec3 c = p.axis_start;
    const auto north = add_vertex(c + semi.x() * u);
    const auto first_ring = vertex_count();
    for (int r = 1; r < rings_; ++r) {
      const double theta = std::numbers::pi * r / rings_;
      for (int i = 0; i < segments_; ++i) {
        const double phi = 2.0 * std::numbers::pi * i / segments_;
        add_vertex(c + semi.x() * std::cos(theta) * u + semi.y() * std::sin(theta) * std::cos(phi) * v +
                   semi.z() * std::sin(theta) * std::sin(phi) * w);
      }
    }
    const auto south = add_vertex(c - semi.x() * u);
    const auto n = static_cast<std::uint32_t>(segments_);
    auto ring = [&](int r, std::uint32_t i) { return first_ring + static_cast<std::uint32_t>(r) * n + i % n; };
    for (std::uint32_t i = 0; i < n; ++i) add_triangle({north, ring(0, i), ring(0, i + 1)});
    for (int r = 0; r + 1 < rings_ - 1; ++r) {
      for (std::uint32_t i = 0; i < n; ++i) {
        add_triangle({ring(r, i), ring(r + 1, i), ring(r + 1, i + 1)});
        add_triangle({ring(r, i), ring(r + 1, i + 1), ring(r, i + 1)});
      }
    }
    for (std::uint32_t i = 0; i < n; ++i) add_triangle({south, ring(rings_ - 2, i + 1), ring(rings_ - 2, i)});
    end(std::move(p));
  }

 private:
  Vec3 ring_dir(const Vec3& v, const Vec3& w, int i) const {
    const double phi = 2.0 * std::numbers::pi * i / segments_;
    return std::cos(phi) * v + std::sin(phi) * w;
  }

  std::uint32_t vertex_count() const { return static_cast<std::uint32_t>(mesh_.vertices.size()); }

  std::uint32_t add_vertex(const Vec3& p) {
    mesh_.vertices.push_back(p);
    return vertex_count() - 1;
  }

  void add_triangle(Triangle t) {
    mesh_.triangles.push_back(t);
    mesh_.part_labels.push_back(current_label_);
  }

  void begin(Primitive& p) {
    p.first_vertex = mesh_.vertices.size();
    p.first_triangle = mesh_.triangles.size();
    current_label_ = p.label;
  }

  void end(Primitive p) {
    p.vertex_count = mesh_.vertices.size() - p.first_vertex;
    p.triangle_count = mesh_.triangles.size() - p.first_triangle;
    mesh_.primitives.push_back(std::move(p));
  }

  int segments_;
  int rings_;
  std::string current_label_;
  TriMesh mesh_;
};

bool is_spine_role(KeypointRole r) { return r == KeypointRole::neck_end || r == KeypointRole::back_end; }

bool is_appended(std::string_view name) { return base_keypoint_name(name) != name; }

void check_params(const PrimitiveParams& p) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(p.cylinder_radius_factor) || !positive(p.cylinder_radius_min) || !positive(p.cylinder_radius_max) ||
      !positive(p.eye_radius) || !positive(p.cone_length_fraction) || !positive(p.cone_length_max) ||
      !positive(p.cone_radius_factor) || !positive(p.torso_length_factor) || !positive(p.torso_width_factor) ||
      !positive(p.torso_height_factor)) {
    throw Error(Errc::invalid_argument, "primitive parameters must be positive and finite");
  }
  if (p.cylinder_radius_min > p.cylinder_radius_max) {
    throw Error(Errc::invalid_argument, "cylinder_radius_min exceeds cylinder_radius_max");
  }
  if (p.radial_segments < 3 || p.ellipsoid_rings < 3) {
    throw Error(Errc::invalid_argument, "radial_segments and ellipsoid_rings must be at least 3");
  }
}

}  // namespace

MeshBuild build_mesh(const Skeleton& s, const PrimitiveParams& params) {
  check_params(params);
  auto report = validate_skeleton(s);
  if (!report.ok) {
    throw Error(Errc::invalid_skeleton, "cannot build a mesh for an invalid skeleton: " +
                                            report.violations.front().kind + " (" +
                                            report.violations.front().subject + ")");
  }

  MeshBuild out;
  MeshBuilder builder(params.radial_segments, params.ellipsoid_rings);
  auto cylinder_radius = [&](double length) {
    return std::clamp(params.cylinder_radius_factor * length, params.cylinder_radius_min, params.cylinder_radius_max);
  };

  // Mean left/right thigh spacing sets the torso girth.
  auto thigh_spacing = [&]() -> std::optional<double> {
    double total = 0.0;
    int pairs = 0;
    for (const char* end : {"front", "back"}) {
      const std::string l = std::string("thigh_") + end + "_left", r = std::string("thigh_") + end + "_right";
      if (s.has(l) && s.has(r)) {
        total += (s.position(l) - s.position(r)).norm();
        ++pairs;
      }
    }
    if (pairs == 0 || total <= 0.0) return std::nullopt;
    return total / pairs;
  };

  for (const auto& bone : s.bones) {
    const Vec3& a = s.position(bone.parent);
    const Vec3& b = s.position(bone.child);
    const double length = (b - a).norm();
    const auto ra = keypoint_role(bone.parent), rb = keypoint_role(bone.child);
    auto has = [&](KeypointRole r) { return ra == r || rb == r; };
    const std::string bone_label = bone.parent + "-" + bone.child;

    // Canonical shoulder/hip links sit inside the torso and get no solid.
    const bool girdle = (is_spine_role(ra) && rb == KeypointRole::thigh) ||
                        (is_spine_role(rb) && ra == KeypointRole::thigh);
    if (girdle) {
      const auto& thigh = ra == KeypointRole::thigh ? bone.parent : bone.child;
      if (!is_appended(thigh)) continue;
    }

    if (length < kDegenerateBoneLength) {
      out.skipped.push_back({bone, length});
      continue;
    }

    Primitive p;
    p.source_bone = bone;
    p.axis_start = a;
    p.axis_end = b;

    if (has(KeypointRole::eye) && has(KeypointRole::nose)) {
      const auto& eye = ra == KeypointRole::eye ? bone.parent : bone.child;
      p.role = "eye";
      p.label = "eye:" + eye;
      p.source_keypoint = eye;
      p.axis_start = s.position(eye);
      const double r = params.eye_radius;
      builder.ellipsoid(std::move(p), Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ(), Vec3(r, r, 0.8 * r));
    } else if (is_spine_role(ra) && is_spine_role(rb)) {
      const Vec3 u = (b - a) / length;
      Vec3 lateral = Vec3::UnitZ().cross(u);
      if (lateral.norm() < 1e-6) lateral = Vec3::UnitY() - Vec3::UnitY().dot(u) * u;
      lateral.normalize();
      const Vec3 up = u.cross(lateral);
      const double half = 0.5 * length;
      const double girth = thigh_spacing().value_or(0.6 * half);
      const double lateral_semi = std::max(params.torso_width_factor * girth, 0.25 * half);
      const Vec3 semi(params.torso_length_factor * half, lateral_semi, params.torso_height_factor * lateral_semi);
      const Vec3 center = 0.5 * (a + b);
      if (params.spine_blend) {
        const double r = cylinder_radius(half);
        Primitive first = p, second = p;
        first.role = second.role = "spine";
        first.axis_end = center;
        first.label = "spine:" + bone_label + "#1";
        second.axis_start = center;
        second.label = "spine:" + bone_label + "#2";
        builder.cylinder(std::move(first), r);
        builder.cylinder(std::move(second), r);
      }
      p.role = "torso";
      p.label = "torso:" + bone_label;
      p.axis_start = center;
      builder.ellipsoid(std::move(p), u, lateral, up, semi);
    } else {
      if (girdle) {
        p.role = "limb_root";
      } else if (has(KeypointRole::thigh) || has(KeypointRole::knee) || has(KeypointRole::paw)) {
        p.role = "limb";
      } else if (has(KeypointRole::nose)) {
        p.role = "neck";
      } else if (has(KeypointRole::tail_end)) {
        p.role = "tail";
      } else {
        p.role = "segment";
      }
      p.label = p.role + ":" + bone_label;
      builder.cylinder(std::move(p), cylinder_radius(length));
    }
  }

  // Nose cones: apex on the nose, base pulled back toward the neck.
  for (const auto& kp : s.keypoints) {
    if (keypoint_role(kp.name) != KeypointRole::nose) continue;
    std::optional<Vec3> toward;
    double neck_length = 0.0;
    for (const auto& bone : s.bones) {
      const std::string* other = nullptr;
      if (bone.parent == kp.name) other = &bone.child;
      if (bone.child == kp.name) other = &bone.parent;
      if (!other || keypoint_role(*other) == KeypointRole::eye) continue;
      const Vec3 d = s.position(*other) - kp.position;
      if (d.norm() < kDegenerateBoneLength) continue;
      toward = d.normalized();
      neck_length = d.norm();
      break;
    }
    const Vec3 dir = toward.value_or(-Vec3::UnitX());
    if (!toward) neck_length = params.cone_length_max / params.cone_length_fraction;
    const double length = std::min(params.cone_length_fraction * neck_length, params.cone_length_max);
    Primitive p;
    p.role = "nose";
    p.label = "nose:" + kp.name;
    p.source_keypoint = kp.name;
    p.axis_start = kp.position + length * dir;
    p.axis_end = kp.position;
    builder.cone(std::move(p), params.cone_radius_factor * cylinder_radius(neck_length));
  }

  out.mesh = std::move(builder.mesh());
  return out;
}

std::string export_obj(const TriMesh& m) {
  std::string out = "# zoopose balloon mesh\n";
  out += "# vertices " + std::to_string(m.vertices.size()) + ", triangles " + std::to_string(m.triangles.size()) + "\n";
  for (const auto& v : m.vertices) {
    out += "v " + format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z()) + "\n";
  }
  const std::string* group = nullptr;
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const std::string* label = t < m.part_labels.size() ? &m.part_labels[t] : nullptr;
    if (label && !label->empty() && (!group || *group != *label)) {
      out += "g " + *label + "\n";
      group = label;
    }
    const auto& tri = m.triangles[t];
    out += "f " + std::to_string(tri[0] + 1) + " " + std::to_string(tri[1] + 1) + " " + std::to_string(tri[2] + 1) + "\n";
  }
  return out;
}

TriMesh import_obj(std::string_view text) {
  TriMesh m;
  std::string group;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(Errc::parse_error, "OBJ line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::istringstream fields{std::string(body)};
    std::string tag;
    fields >> tag;
    if (tag == "v") {
      Vec3 p;
      if (!(fields >> p.x() >> p.y() >> p.z())) fail("expected 'v x y z'");
      m.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<std::uint32_t> poly;
      std::string ref;
      while (fields >> ref) {
        long idx = 0;
        try {
          idx = std::stol(ref.substr(0, ref.find('/')));
        } catch (const std::exception&) {
          fail("bad face index '" + ref + "'");
        }
        long resolved = idx > 0 ? idx - 1 : static_cast<long>(m.vertices.size()) + idx;
        if (idx == 0 || resolved < 0 || resolved >= static_cast<long>(m.vertices.size())) {
          fail("face index " + ref + " out of range");
        }
        poly.push_back(static_cast<std::uint32_t>(resolved));
      }
      if (poly.size() < 3) fail("face needs at least 3 vertices");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        m.triangles.push_back({poly[0], poly[k], poly[k + 1]});
        m.part_labels.push_back(group);
      }
    } else if (tag == "g" || tag == "o") {
      std::getline(fields >> std::ws, group);
    }
    // vt/vn/s/usemtl and other records are ignored.
  }
  return m;
}

}  // namespace zoopose
