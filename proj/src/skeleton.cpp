#include "zoopose/skeleton.hpp"

#include "zoopose/error.hpp"
#include "zoopose/json_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace zoopose {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::parse_error: return "ParseError";
    case Errc::schema_error: return "SchemaError";
    case Errc::io_error: return "IoError";
    case Errc::invalid_skeleton: return "InvalidSkeleton";
    case Errc::unknown_anchor: return "UnknownAnchor";
    case Errc::incompatible_anchor: return "IncompatibleAnchor";
    case Errc::not_found: return "NotFound";
    case Errc::empty_library: return "EmptyLibrary";
    case Errc::unparseable_response: return "UnparseableResponse";
    case Errc::unknown_target: return "UnknownTarget";
    case Errc::non_finite_result: return "NonFiniteResult";
    case Errc::backend_error: return "BackendError";
    case Errc::invalid_range: return "InvalidRange";
    case Errc::step_out_of_range: return "StepOutOfRange";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::divergence_detected: return "DivergenceDetected";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Error";
}

std::optional<std::size_t> Skeleton::index_of(std::string_view keypoint) const {
  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    if (keypoints[i].name == keypoint) return i;
  }
  return std::nullopt;
}

const Vec3& Skeleton::position(std::string_view keypoint) const {
  auto idx = index_of(keypoint);
  if (!idx) throw Error(Errc::not_found, "no keypoint named '" + std::string(keypoint) + "'");
  return keypoints[*idx].position;
}

bool Skeleton::has_bone(std::string_view a, std::string_view b) const {
  return std::any_of(bones.begin(), bones.end(), [&](const Bone& bone) {
    return (bone.parent == a && bone.child == b) || (bone.parent == b && bone.child == a);
  });
}

const std::array<std::string_view, 18>& canonical_keypoint_names() {
  static const std::array<std::string_view, 18> names = {
      "left_eye",         "right_eye",        "nose",            "neck_end",
      "thigh_front_left", "thigh_front_right", "thigh_back_left", "thigh_back_right",
      "knee_front_left",  "knee_front_right",  "knee_back_left",  "knee_back_right",
      "paw_front_left",   "paw_front_right",   "paw_back_left",   "paw_back_right",
      "back_end",         "tail_end"};
  return names;
}

const std::vector<Bone>& canonical_bones() {
  static const std::vector<Bone> bones = [] {
    std::vector<Bone> b = {
        {"nose", "left_eye"},           {"nose", "right_eye"},
        {"neck_end", "nose"},           {"neck_end", "back_end"},
        {"neck_end", "thigh_front_left"}, {"neck_end", "thigh_front_right"},
        {"back_end", "thigh_back_left"},  {"back_end", "thigh_back_right"},
        {"back_end", "tail_end"}};
    for (const char* end : {"front", "back"}) {
      for (const char* side : {"left", "right"}) {
        b.push_back({std::string("thigh_") + end + "_" + side, std::string("knee_") + end + "_" + side});
      }
    }
    for (const char* end : {"front", "back"}) {
      for (const char* side : {"left", "right"}) {
        b.push_back({std::string("knee_") + end + "_" + side, std::string("paw_") + end + "_" + side});
      }
    }
    return b;
  }();
  return bones;
}

bool is_canonical_tetrapod(const Skeleton& s) {
  const auto& names = canonical_keypoint_names();
  if (s.keypoints.size() != names.size()) return false;
  for (auto name : names) {
    if (!s.has(name)) return false;
  }
  if (s.bones.size() != canonical_bones().size()) return false;
  for (const auto& b : canonical_bones()) {
    if (!s.has_bone(b.parent, b.child)) return false;
  }
  return true;
}

ValidationReport validate_skeleton(const Skeleton& s) {
  ValidationReport report;
  auto fail = [&](std::string kind, std::string subject, std::string detail) {
    report.ok = false;
    report.violations.push_back({std::move(kind), std::move(subject), std::move(detail)});
  };

  if (s.keypoints.empty()) fail("empty skeleton", "", "skeleton has no keypoints");

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < s.keypoints.size(); ++i) {
    const auto& kp = s.keypoints[i];
    if (kp.name.empty()) {
      fail("empty keypoint name", "#" + std::to_string(i), "keypoint names must be nonempty");
    } else if (!index.emplace(kp.name, i).second) {
      fail("duplicate keypoint name", kp.name, "keypoint names must be unique");
    }
    if (!kp.position.allFinite()) {
      fail("non-finite coordinate", kp.name, "all coordinates must be finite");
    }
  }

  std::vector<std::vector<std::size_t>> adjacency(s.keypoints.size());
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& bone : s.bones) {
    const std::string label = bone.parent + "-" + bone.child;
    if (bone.parent == bone.child) {
      fail("self-bone", label, "bone endpoints must differ");
      continue;
    }
    auto a = index.find(bone.parent);
    auto b = index.find(bone.child);
    if (a == index.end() || b == index.end()) {
      std::string missing = a == index.end() ? bone.parent : bone.child;
      if (a == index.end() && b == index.end()) missing += ", " + bone.child;
      fail("unresolved bone endpoint", label, "missing keypoint(s): " + missing);
      continue;
    }
    auto key = std::minmax(bone.parent, bone.child);
    if (!seen.emplace(key.first, key.second).second) {
      fail("duplicate bone", label, "the same keypoint pair is bonded twice");
      continue;
    }
    adjacency[a->second].push_back(b->second);
    adjacency[b->second].push_back(a->second);
  }

  if (s.keypoints.size() > 1) {
    std::vector<bool> visited(s.keypoints.size(), false);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    visited[0] = true;
    while (!frontier.empty()) {
      auto i = frontier.front();
      frontier.pop();
      for (auto j : adjacency[i]) {
        if (!visited[j]) {
          visited[j] = true;
          frontier.push(j);
        }
      }
    }
    std::vector<std::string> unreachable;
    for (std::size_t i = 0; i < visited.size(); ++i) {
      if (!visited[i]) unreachable.push_back(s.keypoints[i].name);
    }
    if (!unreachable.empty()) {
      std::string detail = std::to_string(unreachable.size()) + " keypoint(s) unreachable from '" +
                           s.keypoints[0].name + "':";
      for (const auto& n : unreachable) detail += " " + n;
      fail("disconnected skeleton graph", unreachable.front(), detail);
    }
  }
  return report;
}

std::string_view base_keypoint_name(std::string_view name) {
  auto pos = name.rfind('_');
  if (pos == std::string_view::npos || pos + 1 == name.size()) return name;
  auto suffix = name.substr(pos + 1);
  bool digits = std::all_of(suffix.begin(), suffix.end(), [](unsigned char c) { return std::isdigit(c); });
  return digits ? name.substr(0, pos) : name;
}

KeypointRole keypoint_role(std::string_view name) {
  auto base = base_keypoint_name(name);
  auto starts = [&](std::string_view prefix) { return base.substr(0, prefix.size()) == prefix; };
  if (base == "left_eye" || base == "right_eye") return KeypointRole::eye;
  if (base == "nose") return KeypointRole::nose;
  if (base == "neck_end") return KeypointRole::neck_end;
  if (base == "back_end") return KeypointRole::back_end;
  if (base == "tail_end") return KeypointRole::tail_end;
  if (starts("thigh_")) return KeypointRole::thigh;
  if (starts("knee_")) return KeypointRole::knee;
  if (starts("paw_")) return KeypointRole::paw;
  return KeypointRole::other;
}

std::string_view to_string(AppendageKind kind) {
  switch (kind) {
    case AppendageKind::extra_head: return "extra_head";
    case AppendageKind::extra_limb_front: return "extra_limb_front";
    case AppendageKind::extra_limb_back: return "extra_limb_back";
    case AppendageKind::extra_tail: return "extra_tail";
  }
  return "unknown";
}

AppendageKind appendage_kind_from_string(std::string_view name) {
  for (auto kind : {AppendageKind::extra_head, AppendageKind::extra_limb_front,
                    AppendageKind::extra_limb_back, AppendageKind::extra_tail}) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(Errc::invalid_argument, "unknown appendage kind '" + std::string(name) + "'");
}

namespace {

bool is_spine(std::string_view name) {
  auto role = keypoint_role(name);
  return role == KeypointRole::neck_end || role == KeypointRole::back_end;
}

std::vector<std::string> neighbours(const Skeleton& s, std::string_view name) {
  std::vector<std::string> out;
  for (const auto& b : s.bones) {
    if (b.parent == name) out.push_back(b.child);
    if (b.child == name) out.push_back(b.parent);
  }
  return out;
}

std::optional<std::string> neighbour_with(const Skeleton& s, std::string_view name,
                                          const std::function<bool(std::string_view)>& pred) {
  for (const auto& n : neighbours(s, name)) {
    if (pred(n)) return n;
  }
  return std::nullopt;
}

// Keypoint of the given role nearest to `from`; ties resolved by keypoint order.
std::optional<std::string> nearest(const Skeleton& s, const Vec3& from,
                                   const std::function<bool(std::string_view)>& pred) {
  std::optional<std::string> best;
  double best_d = 0.0;
  for (const auto& kp : s.keypoints) {
    if (!pred(kp.name)) continue;
    double d = (kp.position - from).norm();
    if (!best || d < best_d) {
      best = kp.name;
      best_d = d;
    }
  }
  return best;
}

int first_free_suffix(const Skeleton& s, int start, const std::vector<std::string>& stems) {
  for (int n = start;; ++n) {
    bool free = std::none_of(stems.begin(), stems.end(), [&](const std::string& stem) {
      return s.has(stem + "_" + std::to_string(n));
    });
    if (free) return n;
  }
}

}  // namespace

Skeleton add_appendage(const Skeleton& s, AppendageKind kind, std::string_view anchor) {
  if (!s.has(anchor)) {
    throw Error(Errc::unknown_anchor, "anchor keypoint '" + std::string(anchor) + "' does not exist");
  }
  if (!is_spine(anchor)) {
    throw Error(Errc::incompatible_anchor, std::string(to_string(kind)) +
                                               " must anchor on a spine keypoint (neck_end/back_end), got '" +
                                               std::string(anchor) + "'");
  }
  auto report = validate_skeleton(s);
  if (!report.ok) {
    throw Error(Errc::invalid_skeleton, "cannot extend an invalid skeleton: " + report.violations.front().kind +
                                            " (" + report.violations.front().subject + ")");
  }

  const Vec3 anchor_pos = s.position(anchor);
  Vec3 axis = Vec3::UnitX();
  if (s.has("neck_end") && s.has("back_end")) {
    Vec3 spine = s.position("neck_end") - s.position("back_end");
    if (spine.norm() > 1e-12) axis = spine.normalized();
  }
  if (keypoint_role(anchor) == KeypointRole::back_end) axis = -axis;

  Skeleton out = s;
  auto append = [&](const std::string& name, const Vec3& p) { out.keypoints.push_back({name, p}); };

  // Translation that carries a template chain hanging off `template_anchor`
  // over to the requested anchor, pushed out along the spine.
  auto carry = [&](const std::optional<std::string>& template_anchor, int ordinal) -> Vec3 {
    Vec3 base = template_anchor ? Vec3(anchor_pos - s.position(*template_anchor)) : Vec3::Zero();
    return base + kAppendageOffset * ordinal * axis;
  };

  switch (kind) {
    case AppendageKind::extra_head: {
      const int n = first_free_suffix(s, 2, {"nose", "left_eye", "right_eye"});
      const auto suffix = "_" + std::to_string(n);
      const auto nose = "nose" + suffix, left = "left_eye" + suffix, right = "right_eye" + suffix;
      auto tmpl_nose = nearest(s, anchor_pos, [](std::string_view k) { return keypoint_role(k) == KeypointRole::nose; });
      std::optional<std::string> tmpl_left, tmpl_right, tmpl_anchor;
      if (tmpl_nose) {
        tmpl_left = neighbour_with(s, *tmpl_nose, [](std::string_view k) { return base_keypoint_name(k) == "left_eye"; });
        tmpl_right = neighbour_with(s, *tmpl_nose, [](std::string_view k) { return base_keypoint_name(k) == "right_eye"; });
        tmpl_anchor = neighbour_with(s, *tmpl_nose, is_spine);
      }
      if (tmpl_nose && tmpl_left && tmpl_right && tmpl_anchor) {
        Vec3 shift = carry(tmpl_anchor, n - 1);
        append(nose, s.position(*tmpl_nose) + shift);
        append(left, s.position(*tmpl_left) + shift);
        append(right, s.position(*tmpl_right) + shift);
      } else {
        Vec3 lateral = Vec3::UnitZ().cross(axis);
        if (lateral.norm() < 1e-9) lateral = Vec3::UnitY();
        lateral.normalize();
        Vec3 nose_pos = anchor_pos + 0.25 * axis + kAppendageOffset * (n - 1) * axis;
        append(nose, nose_pos);
        append(left, nose_pos - 0.05 * axis + 0.04 * lateral + 0.04 * Vec3::UnitZ());
        append(right, nose_pos - 0.05 * axis - 0.04 * lateral + 0.04 * Vec3::UnitZ());
      }
      out.bones.push_back({std::string(anchor), nose});
      out.bones.push_back({nose, left});
      out.bones.push_back({nose, right});
      break;
    }
    case AppendageKind::extra_limb_front:
    case AppendageKind::extra_limb_back: {
      const std::string end = kind == AppendageKind::extra_limb_front ? "front" : "back";
      const std::string thigh_stem = "thigh_" + end, knee_stem = "knee_" + end, paw_stem = "paw_" + end;
      const int n = first_free_suffix(s, 3, {thigh_stem, knee_stem, paw_stem});
      const auto suffix = "_" + std::to_string(n);
      const auto thigh = thigh_stem + suffix, knee = knee_stem + suffix, paw = paw_stem + suffix;
      auto same_end = [&](std::string_view k) {
        return keypoint_role(k) == KeypointRole::thigh && k.find("_" + end) != std::string_view::npos;
      };
      auto tmpl_thigh = nearest(s, anchor_pos, same_end);
      std::optional<std::string> tmpl_knee, tmpl_paw, tmpl_anchor;
      if (tmpl_thigh) {
        tmpl_knee = neighbour_with(s, *tmpl_thigh, [](std::string_view k) { return keypoint_role(k) == KeypointRole::knee; });
        tmpl_anchor = neighbour_with(s, *tmpl_thigh, is_spine);
        if (tmpl_knee) {
          tmpl_paw = neighbour_with(s, *tmpl_knee, [](std::string_view k) { return keypoint_role(k) == KeypointRole::paw; });
        }
      }
      if (tmpl_thigh && tmpl_knee && tmpl_paw && tmpl_anchor) {
        Vec3 shift = carry(tmpl_anchor, n - 2);
        append(thigh, s.position(*tmpl_thigh) + shift);
        append(knee, s.position(*tmpl_knee) + shift);
        append(paw, s.position(*tmpl_paw) + shift);
      } else {
        Vec3 root = anchor_pos + kAppendageOffset * (n - 2) * axis;
        append(thigh, root - 0.05 * Vec3::UnitZ());
        append(knee, root - 0.25 * Vec3::UnitZ());
        append(paw, root - 0.45 * Vec3::UnitZ());
      }
      out.bones.push_back({std::string(anchor), thigh});
      out.bones.push_back({thigh, knee});
      out.bones.push_back({knee, paw});
      break;
    }
    case AppendageKind::extra_tail: {
      const int n = first_free_suffix(s, 2, {"tail_end"});
      const auto tail = "tail_end_" + std::to_string(n);
      auto tmpl_tail = nearest(s, anchor_pos, [](std::string_view k) { return keypoint_role(k) == KeypointRole::tail_end; });
      std::optional<std::string> tmpl_anchor;
      if (tmpl_tail) tmpl_anchor = neighbour_with(s, *tmpl_tail, is_spine);
      if (tmpl_tail && tmpl_anchor) {
        append(tail, s.position(*tmpl_tail) + carry(tmpl_anchor, n - 1));
      } else {
        append(tail, anchor_pos + 0.3 * axis + kAppendageOffset * (n - 1) * axis);
      }
      out.bones.push_back({std::string(anchor), tail});
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

ojson skeleton_to_json(const Skeleton& s) {
  ojson doc;
  doc["name"] = s.name;
  doc["pose_description"] = s.pose_description;
  ojson kps = ojson::array();
  for (const auto& kp : s.keypoints) {
    ojson entry;
    entry["name"] = kp.name;
    entry["xyz"] = {kp.position.x(), kp.position.y(), kp.position.z()};
    kps.push_back(std::move(entry));
  }
  doc["keypoints"] = std::move(kps);
  ojson bones = ojson::array();
  for (const auto& b : s.bones) bones.push_back({b.parent, b.child});
  doc["bones"] = std::move(bones);
  return doc;
}

std::string serialize(const Skeleton& s, int indent) { return skeleton_to_json(s).dump(indent); }

ojson report_to_json(const ValidationReport& report) {
  ojson doc;
  doc["ok"] = report.ok;
  ojson list = ojson::array();
  for (const auto& v : report.violations) {
    ojson item;
    item["kind"] = v.kind;
    item["subject"] = v.subject;
    item["detail"] = v.detail;
    list.push_back(std::move(item));
  }
  doc["violations"] = std::move(list);
  return doc;
}

namespace {

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
  throw Error(Errc::schema_error, path + ": " + what);
}

std::string require_string(const ojson& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_fail(path + "." + key, "missing field");
  if (!it->is_string()) schema_fail(path + "." + key, "expected string");
  return it->get<std::string>();
}

}  // namespace

Skeleton deserialize(std::string_view text) {
  ojson doc;
  try {
    doc = ojson::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
    throw Error(Errc::parse_error, "line " + std::to_string(line) + ": " + e.what());
  }
  return skeleton_from_json(doc);
}

Skeleton skeleton_from_json(const ojson& doc) {
  if (!doc.is_object()) schema_fail("$", "expected object");
  Skeleton s;
  s.name = require_string(doc, "name", "$");
  s.pose_description = require_string(doc, "pose_description", "$");

  auto kps = doc.find("keypoints");
  if (kps == doc.end()) schema_fail("$.keypoints", "missing field");
  if (!kps->is_array()) schema_fail("$.keypoints", "expected array");
  for (std::size_t i = 0; i < kps->size(); ++i) {
    const std::string path = "$.keypoints[" + std::to_string(i) + "]";
    const auto& entry = (*kps)[i];
    if (!entry.is_object()) schema_fail(path, "expected object");
    Keypoint kp;
    kp.name = require_string(entry, "name", path);
    auto xyz = entry.find("xyz");
    if (xyz == entry.end()) schema_fail(path + ".xyz", "missing field");
    if (!xyz->is_array() || xyz->size() != 3) schema_fail(path + ".xyz", "expected array of 3 numbers");
    for (int c = 0; c < 3; ++c) {
      if (!(*xyz)[c].is_number()) schema_fail(path + ".xyz[" + std::to_string(c) + "]", "expected number");
      kp.position[c] = (*xyz)[c].get<double>();
    }
    s.keypoints.push_back(std::move(kp));
  }

  auto bones = doc.find("bones");
  if (bones == doc.end()) schema_fail("$.bones", "missing field");
  if (!bones->is_array()) schema_fail("$.bones", "expected array");
  for (std::size_t i = 0; i < bones->size(); ++i) {
    const std::string path = "$.bones[" + std::to_string(i) + "]";
    const auto& pair = (*bones)[i];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
      schema_fail(path, "expected [string, string]");
    }
    Bone b{pair[0].get<std::string>(), pair[1].get<std::string>()};
    if (b.parent == b.child) schema_fail(path, "self-bone '" + b.parent + "'");
    s.bones.push_back(std::move(b));
  }
  return s;
}

}  // namespace zoopose
