#include "oracles.hpp"

#include "zoopose/error.hpp"
#include "zoopose/text_util.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace zptest;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kExpectedNames = {
    "Giraffe",
    "Elephant",
    "German Shepherd",
    "Eagle - sitting",
    "Eagle - flying",
    "American Crocodile",
    "Tree Frog",
    "Roseate Spoonbill - sitting",
    "Roseate Spoonbill - flying",
    "Raccoon - 4legs",
    "Raccoon - 2legs",
    "T-Rex",
    "Lizard",
    "Tortoise",
    "Bat",
    "Otter",
};

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("zoopose_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path / name) << text; }
};

}  // namespace

TEST_CASE("builtin library holds the sixteen named entries in order") {
  const auto lib = load_builtin_library();
  CHECK(lib.size() == 16);
  CHECK(lib.display_names() == kExpectedNames);
  for (const auto& e : lib.entries()) {
    CHECK(validate_skeleton(e.skeleton).ok);
    CHECK(deserialize(serialize(e.skeleton)) == e.skeleton);
    // Every entry is a canonical tetrapod within the unit sphere.
    CHECK(is_canonical_tetrapod(e.skeleton));
    for (const auto& kp : e.skeleton.keypoints) CHECK(kp.position.norm() <= 1.0);
  }
}

TEST_CASE("source library directory matches the compiled-in copy") {
  const auto disk = load_library(fs::path(ZOOPOSE_SOURCE_DIR) / "library");
  const auto builtin = load_builtin_library();
  REQUIRE(disk.size() == builtin.size());
  for (std::size_t i = 0; i < disk.size(); ++i) {
    CHECK(disk.entries()[i].skeleton == builtin.entries()[i].skeleton);
    CHECK(library_file_name(disk.entries()[i]) == library_file_name(builtin.entries()[i]));
  }
}

TEST_CASE("lookup is case-insensitive and flags ambiguity") {
  const auto lib = load_builtin_library();
  const auto flying = lookup(lib, "eagle", std::string_view("flying"));
  CHECK(flying.entry.pose_label == "flying");
  CHECK_FALSE(flying.ambiguous);

  const auto first = lookup(lib, "EAGLE");
  CHECK(first.entry.pose_label == "sitting");
  CHECK(first.ambiguous);

  const auto single = lookup(lib, "giraffe");
  CHECK_FALSE(single.ambiguous);

  CHECK_THROWS_AS(lookup(lib, "unicorn"), Error);
  try {
    lookup(lib, "unicorn");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_found);
  }
  try {
    lookup(lib, "eagle", std::string_view("swimming"));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_found);
  }
}

TEST_CASE("lookup is order-stable across repeated calls") {
  const auto lib = load_builtin_library();
  for (const auto& name : kExpectedNames) {
    const auto a = find_by_display_name(lib, name);
    const auto b = find_by_display_name(lib, lower(name));
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->skeleton == b->skeleton);
    CHECK(lib.display_name(*a) == name);
  }
  CHECK_FALSE(find_by_display_name(lib, "Pegasus"));
  CHECK(find_by_display_name(lib, "eagle")->pose_label == "sitting");
}

TEST_CASE("directory loading is atomic and names the bad file") {
  const auto dog = library_skeleton("German Shepherd");

  SUBCASE("empty directory gives an empty library") {
    TempDir dir("empty");
    CHECK(load_library(dir.path).empty());
  }
  SUBCASE("one valid and one malformed file") {
    TempDir dir("mixed");
    dir.write("german_shepherd__standing.json", serialize(dog));
    dir.write("broken__pose.json", "{\"name\": \"broken\"}");
    try {
      load_library(dir.path);
      FAIL("expected schema error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::schema_error);
      CHECK(std::string(e.what()).find("broken__pose.json") != std::string::npos);
    }
  }
  SUBCASE("an invalid skeleton is rejected") {
    TempDir dir("invalid");
    auto bad = dog;
    bad.bones.pop_back();
    dir.write("dog__x.json", serialize(bad));
    try {
      load_library(dir.path);
      FAIL("expected schema error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::schema_error);
      CHECK(std::string(e.what()).find("dog__x.json") != std::string::npos);
    }
  }
  SUBCASE("missing directory") {
    try {
      load_library("/nonexistent/zoopose/library");
      FAIL("expected io error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::io_error);
    }
  }
  SUBCASE("sorted file order without an index") {
    TempDir dir("sorted");
    auto a = dog;
    a.name = "Zebu";
    auto b = dog;
    b.name = "Aardvark";
    dir.write("zebu__standing.json", serialize(a));
    dir.write("aardvark__standing.json", serialize(b));
    const auto lib = load_library(dir.path);
    REQUIRE(lib.size() == 2);
    CHECK(lib.entries()[0].animal_name == "Aardvark");
    CHECK(lib.entries()[1].animal_name == "Zebu");
  }
  SUBCASE("duplicate animal and pose") {
    TempDir dir("dup");
    dir.write("a__standing.json", serialize(dog));
    dir.write("b__standing.json", serialize(dog));
    CHECK_THROWS_AS(load_library(dir.path), Error);
  }
}
