#include "oracles.hpp"

#include "zoopose/error.hpp"
#include "zoopose/json_io.hpp"

#include <doctest.h>

#include <set>

using namespace zptest;

namespace {

Skeleton two_point() {
  Skeleton s;
  s.name = "stick";
  s.pose_description = "lying";
  s.keypoints = {{"a", Vec3(0, 0, 0)}, {"b", Vec3(1, 0, 0)}};
  s.bones = {{"a", "b"}};
  return s;
}

bool has_kind(const ValidationReport& r, const std::string& kind) {
  for (const auto& v : r.violations) {
    if (v.kind == kind) return true;
  }
  return false;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::invalid_argument;
}

}  // namespace

TEST_CASE("canonical tetrapod graph is a spanning tree over 18 keypoints") {
  const auto& names = canonical_keypoint_names();
  CHECK(names.size() == 18);
  CHECK(std::set<std::string_view>(names.begin(), names.end()).size() == 18);
  CHECK(canonical_bones().size() == 17);

  Skeleton s;
  for (auto n : names) s.keypoints.push_back({std::string(n), Vec3::Zero()});
  s.bones = canonical_bones();
  for (std::size_t i = 0; i < s.keypoints.size(); ++i) s.keypoints[i].position = Vec3(0.01 * i, 0, 0);
  CHECK(validate_skeleton(s).ok);
  CHECK(is_canonical_tetrapod(s));
}

TEST_CASE("validation reports each violation kind") {
  CHECK(validate_skeleton(two_point()).ok);

  Skeleton empty;
  CHECK(has_kind(validate_skeleton(empty), "empty skeleton"));

  auto dup = two_point();
  dup.keypoints.push_back({"a", Vec3(2, 0, 0)});
  CHECK(has_kind(validate_skeleton(dup), "duplicate keypoint name"));

  auto nan = two_point();
  nan.keypoints[1].position.y() = std::nan("");
  CHECK(has_kind(validate_skeleton(nan), "non-finite coordinate"));

  auto self = two_point();
  self.bones.push_back({"a", "a"});
  CHECK(has_kind(validate_skeleton(self), "self-bone"));

  auto dangling = two_point();
  dangling.bones.push_back({"a", "ghost"});
  const auto r = validate_skeleton(dangling);
  CHECK(has_kind(r, "unresolved bone endpoint"));
  CHECK(r.violations.front().subject == "a-ghost");

  auto twice = two_point();
  twice.bones.push_back({"b", "a"});
  CHECK(has_kind(validate_skeleton(twice), "duplicate bone"));

  auto island = two_point();
  island.keypoints.push_back({"c", Vec3(0, 1, 0)});
  CHECK(has_kind(validate_skeleton(island), "disconnected skeleton graph"));

  auto unnamed = two_point();
  unnamed.keypoints.push_back({"", Vec3(0, 1, 0)});
  CHECK(has_kind(validate_skeleton(unnamed), "empty keypoint name"));
}

TEST_CASE("random trees validate and round-trip through JSON exactly") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_tree_skeleton(rng, uniform_int(rng, 1, 40));
    REQUIRE(validate_skeleton(s).ok);
    const auto text = serialize(s);
    const auto back = deserialize(text);
    CHECK(back == s);
    CHECK(serialize(back) == text);
    CHECK(deserialize(serialize(s, 2)) == s);
  }
}

TEST_CASE("removing any bone from a tree disconnects it") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = random_tree_skeleton(rng, uniform_int(rng, 2, 20));
    s.bones.erase(s.bones.begin() + uniform_int(rng, 0, static_cast<int>(s.bones.size()) - 1));
    CHECK(has_kind(validate_skeleton(s), "disconnected skeleton graph"));
  }
}

TEST_CASE("serialized field order is fixed") {
  const auto text = serialize(two_point());
  CHECK(text == R"({"name":"stick","pose_description":"lying","keypoints":[{"name":"a","xyz":[0.0,0.0,0.0]},)"
                 R"({"name":"b","xyz":[1.0,0.0,0.0]}],"bones":[["a","b"]]})");
}

TEST_CASE("deserialize reports parse lines and schema paths") {
  try {
    deserialize("{\n  \"name\": \"x\",\n  oops\n}");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parse_error);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  try {
    deserialize(R"({"name":"x","pose_description":"","keypoints":[{"name":"a","xyz":[0,0,0]},)"
                R"({"name":"b","xyz":[0,0,0]},{"name":"c","xyz":[0,"1",0]}],"bones":[]})");
    FAIL("expected schema error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::schema_error);
    CHECK(std::string(e.what()).find("$.keypoints[2].xyz[1]") == 0);
  }
  CHECK(code_of([] { deserialize(R"({"name":"x","keypoints":[],"bones":[]})"); }) == Errc::schema_error);
  CHECK(code_of([] {
          deserialize(R"({"name":"x","pose_description":"","keypoints":[{"name":"a","xyz":[0,0,0]}],"bones":[["a","a"]]})");
        }) == Errc::schema_error);
}

TEST_CASE("keypoint roles ignore appendage suffixes") {
  CHECK(base_keypoint_name("nose_2") == "nose");
  CHECK(base_keypoint_name("thigh_front_left") == "thigh_front_left");
  CHECK(base_keypoint_name("thigh_front_3") == "thigh_front");
  CHECK(keypoint_role("tail_end_4") == KeypointRole::tail_end);
  CHECK(keypoint_role("knee_back_3") == KeypointRole::knee);
  CHECK(keypoint_role("left_eye_2") == KeypointRole::eye);
  CHECK(keypoint_role("horn") == KeypointRole::other);
}

TEST_CASE("appendages add suffixed chains anchored on the spine") {
  const auto dog = library_skeleton("German Shepherd");

  SUBCASE("extra head") {
    const auto s = add_appendage(dog, AppendageKind::extra_head, "neck_end");
    CHECK(s.keypoints.size() == 21);
    CHECK(s.bones.size() == dog.bones.size() + 3);
    CHECK(s.has("nose_2"));
    CHECK(s.has_bone("neck_end", "nose_2"));
    CHECK(s.has_bone("nose_2", "left_eye_2"));
    CHECK(s.has_bone("nose_2", "right_eye_2"));
    CHECK(validate_skeleton(s).ok);
    // Template head shifted one offset step along the spine direction.
    const Vec3 axis = (dog.position("neck_end") - dog.position("back_end")).normalized();
    CHECK((s.position("nose_2") - dog.position("nose") - kAppendageOffset * axis).norm() < 1e-12);
    const auto again = add_appendage(s, AppendageKind::extra_head, "neck_end");
    CHECK(again.has("nose_3"));
    CHECK(again.keypoints.size() == 24);
  }
  SUBCASE("extra limbs") {
    const auto front = add_appendage(dog, AppendageKind::extra_limb_front, "neck_end");
    CHECK(front.has("thigh_front_3"));
    CHECK(front.has_bone("neck_end", "thigh_front_3"));
    CHECK(front.has_bone("thigh_front_3", "knee_front_3"));
    CHECK(front.has_bone("knee_front_3", "paw_front_3"));
    const auto back = add_appendage(front, AppendageKind::extra_limb_back, "back_end");
    CHECK(back.has("paw_back_3"));
    CHECK(validate_skeleton(back).ok);
    CHECK(back.keypoints.size() == 24);
  }
  SUBCASE("extra tail points away from the head") {
    const auto s = add_appendage(dog, AppendageKind::extra_tail, "back_end");
    CHECK(s.keypoints.size() == 19);
    CHECK(s.has_bone("back_end", "tail_end_2"));
    const Vec3 back_axis = (dog.position("back_end") - dog.position("neck_end")).normalized();
    CHECK((s.position("tail_end_2") - dog.position("tail_end") - kAppendageOffset * back_axis).norm() < 1e-12);
    CHECK(add_appendage(s, AppendageKind::extra_tail, "back_end").has("tail_end_3"));
  }
  SUBCASE("errors") {
    CHECK(code_of([&] { add_appendage(dog, AppendageKind::extra_head, "horn"); }) == Errc::unknown_anchor);
    CHECK(code_of([&] { add_appendage(dog, AppendageKind::extra_tail, "paw_front_left"); }) ==
          Errc::incompatible_anchor);
    auto broken = dog;
    broken.bones.pop_back();
    CHECK(code_of([&] { add_appendage(broken, AppendageKind::extra_tail, "back_end"); }) == Errc::invalid_skeleton);
    CHECK(code_of([] { appendage_kind_from_string("wing"); }) == Errc::invalid_argument);
  }
  SUBCASE("fallback geometry without a template chain") {
    Skeleton spine;
    spine.keypoints = {{"neck_end", Vec3(0.3, 0, 0.2)}, {"back_end", Vec3(-0.3, 0, 0.2)}};
    spine.bones = {{"neck_end", "back_end"}};
    for (auto kind : {AppendageKind::extra_head, AppendageKind::extra_limb_front, AppendageKind::extra_limb_back,
                      AppendageKind::extra_tail}) {
      const auto s = add_appendage(spine, kind, "neck_end");
      CHECK(validate_skeleton(s).ok);
      CHECK(s.keypoints.size() > spine.keypoints.size());
    }
  }
}

TEST_CASE("appendages never disturb existing keypoints") {
  for (const char* name : {"Giraffe", "Eagle - flying", "T-Rex", "Bat"}) {
    const auto base = library_skeleton(name);
    for (auto kind : {AppendageKind::extra_head, AppendageKind::extra_limb_front, AppendageKind::extra_limb_back,
                      AppendageKind::extra_tail}) {
      for (const char* anchor : {"neck_end", "back_end"}) {
        const auto s = add_appendage(base, kind, anchor);
        for (std::size_t i = 0; i < base.keypoints.size(); ++i) CHECK(s.keypoints[i] == base.keypoints[i]);
        CHECK(validate_skeleton(s).ok);
      }
    }
  }
}
