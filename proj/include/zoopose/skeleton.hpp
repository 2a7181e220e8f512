#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace zoopose {

using Vec3 = Eigen::Vector3d;

struct Keypoint {
  std::string name;
  Vec3 position = Vec3::Zero();

  friend bool operator==(const Keypoint& a, const Keypoint& b) {
    return a.name == b.name && a.position == b.position;
  }
};

/// Undirected connection; `parent`/`child` only record the authored order,
/// which scale_segment uses to decide which end moves.
struct Bone {
  std::string parent;
  std::string child;

  friend bool operator==(const Bone&, const Bone&) = default;
};

/// Named 3D keypoints plus bone connectivity. Scene convention: +x is the
/// animal's facing direction, +z is up, +y is the animal's left; library
/// poses fit inside the unit sphere at the origin.
struct Skeleton {
  std::string name;
  std::string pose_description;
  std::vector<Keypoint> keypoints;
  std::vector<Bone> bones;

  std::optional<std::size_t> index_of(std::string_view keypoint) const;
  bool has(std::string_view keypoint) const { return index_of(keypoint).has_value(); }
  /// Throws Error{not_found} when absent.
  const Vec3& position(std::string_view keypoint) const;
  bool has_bone(std::string_view a, std::string_view b) const;

  friend bool operator==(const Skeleton&, const Skeleton&) = default;
};

/// The 18 keypoints every canonical tetrapod carries, in canonical order.
const std::array<std::string_view, 18>& canonical_keypoint_names();
/// Canonical bone graph (17 bones, a tree over the 18 keypoints).
const std::vector<Bone>& canonical_bones();
bool is_canonical_tetrapod(const Skeleton& s);

struct Violation {
  std::string kind;     // e.g. "unresolved bone endpoint"
  std::string subject;  // offending keypoint or "a-b" bone
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;
};

ValidationReport validate_skeleton(const Skeleton& s);

enum class AppendageKind { extra_head, extra_limb_front, extra_limb_back, extra_tail };

std::string_view to_string(AppendageKind kind);
/// Throws Error{invalid_argument} for unknown names.
AppendageKind appendage_kind_from_string(std::string_view name);

/// Spine axis offset applied per added chain, in scene units.
inline constexpr double kAppendageOffset = 0.15;

/// Returns a copy of `s` with a new keypoint chain attached at `anchor`.
/// Heads, limbs and tails anchor on the spine keypoints (neck_end, back_end).
/// Throws Error{unknown_anchor}, Error{incompatible_anchor} or
/// Error{invalid_skeleton}.
Skeleton add_appendage(const Skeleton& s, AppendageKind kind, std::string_view anchor);

/// Canonical JSON: {"name", "pose_description", "keypoints": [{"name", "xyz"}],
/// "bones": [[a, b]]}, fields in that order.
std::string serialize(const Skeleton& s, int indent = -1);
/// Throws Error{parse_error} (with line) or Error{schema_error} (with field path).
Skeleton deserialize(std::string_view text);

/// Keypoint name with any trailing "_<digits>" appendage suffix removed.
std::string_view base_keypoint_name(std::string_view name);

enum class KeypointRole { eye, nose, neck_end, back_end, tail_end, thigh, knee, paw, other };
KeypointRole keypoint_role(std::string_view name);

}  // namespace zoopose
