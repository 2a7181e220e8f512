#include "oracles.hpp"

#include "zoopose/error.hpp"
#include "zoopose/json_io.hpp"

#include <doctest.h>

using namespace zptest;

namespace {

Camera random_camera(Rng& rng) {
  Camera c;
  c.radius = uniform(rng, 1.0, 3.0);
  c.azimuth_deg = uniform(rng, 0.0, 360.0);
  c.polar_deg = uniform(rng, 30.0, 150.0);
  c.fov_deg = uniform(rng, 30.0, 70.0);
  c.image = {uniform_int(rng, 32, 640), uniform_int(rng, 32, 640)};
  return c;
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

TEST_CASE("degenerate ranges give exactly that camera") {
  const CameraRanges r{{1.5, 1.5}, {90.0, 90.0}, {90.0, 90.0}};
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    const auto c = sample_camera(seed, r);
    CHECK(c.radius == 1.5);
    CHECK(c.azimuth_deg == 90.0);
    CHECK(c.polar_deg == 90.0);
  }
}

TEST_CASE("default sampling stays in range with uniform moments") {
  CameraSampler sampler(2024);
  const int n = 10000;
  double sum_r = 0.0, sum_az = 0.0, sum_pol = 0.0;
  double min_r = 1e9, max_r = -1e9, min_az = 1e9, max_az = -1e9, min_pol = 1e9, max_pol = -1e9;
  for (int i = 0; i < n; ++i) {
    const auto c = sampler.next();
    sum_r += c.radius;
    sum_az += c.azimuth_deg;
    sum_pol += c.polar_deg;
    min_r = std::min(min_r, c.radius);
    max_r = std::max(max_r, c.radius);
    min_az = std::min(min_az, c.azimuth_deg);
    max_az = std::max(max_az, c.azimuth_deg);
    min_pol = std::min(min_pol, c.polar_deg);
    max_pol = std::max(max_pol, c.polar_deg);
  }
  CHECK(min_r >= 1.0);
  CHECK(max_r <= 2.0);
  CHECK(min_az >= 0.0);
  CHECK(max_az < 360.0);
  CHECK(min_pol >= 60.0);
  CHECK(max_pol <= 120.0);
  CHECK(std::abs(sum_r / n - 1.5) < 0.02);
  // Standard error of a uniform mean: width / sqrt(12 n); allow about 5 of them.
  CHECK(std::abs(sum_az / n - 180.0) < 5 * 360.0 / std::sqrt(12.0 * n));
  CHECK(std::abs(sum_pol / n - 90.0) < 5 * 60.0 / std::sqrt(12.0 * n));
  // Near the ends of each interval.
  CHECK(max_r - min_r > 0.99);
  CHECK(max_az - min_az > 359.0);
}

TEST_CASE("sampling is deterministic per seed") {
  CHECK(sample_camera(5) == sample_camera(5));
  CHECK_FALSE(sample_camera(5) == sample_camera(6));
  CameraSampler a(9), b(9);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("invalid ranges") {
  CHECK(code_of([] { CameraSampler(0, CameraRanges{{1, 2}, {0, 360}, {0, 0}}); }) == Errc::invalid_range);
  CHECK(code_of([] { CameraSampler(0, CameraRanges{{2, 1}, {0, 360}, {60, 120}}); }) == Errc::invalid_range);
  CHECK(code_of([] { CameraSampler(0, CameraRanges{{0, 1}, {0, 360}, {60, 120}}); }) == Errc::invalid_range);
  CHECK(code_of([] { CameraSampler(0, CameraRanges{{1, 2}, {0, 360}, {60, 180}}); }) == Errc::invalid_range);
  Camera c;
  c.polar_deg = 0.0;
  CHECK(code_of([&] { validate_camera(c); }) == Errc::invalid_argument);
  c = {};
  c.fov_deg = 180.0;
  CHECK(code_of([&] { validate_camera(c); }) == Errc::invalid_argument);
  c = {};
  c.radius = 0.0;
  CHECK(code_of([&] { validate_camera(c); }) == Errc::invalid_argument);
}

TEST_CASE("look_at projects to the image center") {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    auto c = random_camera(rng);
    c.look_at = uniform_vec(rng, -0.5, 0.5);
    const Vec2 p = project_point(c, c.look_at);
    CHECK(std::abs(p.x() - c.image.width / 2.0) < 1e-9);
    CHECK(std::abs(p.y() - c.image.height / 2.0) < 1e-9);
  }
}

TEST_CASE("a point above look_at at polar 90 projects straight up") {
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    auto c = random_camera(rng);
    c.polar_deg = 90.0;
    const Vec2 p = project_point(c, c.look_at + Vec3(0, 0, uniform(rng, 0.05, 0.4)));
    CHECK(std::abs(p.x() - c.image.width / 2.0) < 1e-9);
    CHECK(p.y() < c.image.height / 2.0);
  }
}

TEST_CASE("opposite azimuths mirror x on the plane facing the camera") {
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    auto c = random_camera(rng);
    c.polar_deg = 90.0;
    auto opposite = c;
    opposite.azimuth_deg = c.azimuth_deg + 180.0;
    const auto oc = oracle_camera(c);
    const Vec3 q = c.look_at + uniform(rng, -0.5, 0.5) * oc.right + uniform(rng, -0.5, 0.5) * Vec3::UnitZ();
    const Vec2 a = project_point(c, q), b = project_point(opposite, q);
    CHECK(std::abs((a.x() - c.image.width / 2.0) + (b.x() - c.image.width / 2.0)) < 1e-9);
    CHECK(std::abs(a.y() - b.y()) < 1e-9);
  }
}

TEST_CASE("projection agrees with the independent pinhole oracle") {
  Rng rng(8);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    auto c = random_camera(rng);
    c.look_at = uniform_vec(rng, -0.3, 0.3);
    const auto oc = oracle_camera(c);
    const auto s = random_tree_skeleton(rng, 10);
    const auto proj = project_keypoints(s, c);
    REQUIRE(proj.points.size() == s.keypoints.size());
    for (std::size_t k = 0; k < s.keypoints.size(); ++k) {
      const auto& p = proj.points[k];
      CHECK(p.name == s.keypoints[k].name);
      CHECK(p.in_front == ((s.keypoints[k].position - oc.eye).dot(oc.forward) > kNearPlane));
      if (!p.in_front) continue;
      ++checked;
      const Vec2 want = oracle_project(oc, s.keypoints[k].position);
      CHECK((p.pixel - want).norm() < 1e-9);
      CHECK(std::abs(p.depth - (s.keypoints[k].position - oc.eye).dot(oc.forward)) < 1e-12);
      if (p.in_frustum) {
        CHECK(p.pixel.x() >= 0.0);
        CHECK(p.pixel.x() <= c.image.width);
        CHECK(p.pixel.y() >= 0.0);
        CHECK(p.pixel.y() <= c.image.height);
      }
    }
  }
  CHECK(checked > 1500);
}

TEST_CASE("points behind the camera are flagged") {
  Camera c;
  const auto oc = oracle_camera(c);
  Skeleton s;
  s.keypoints = {{"behind", oc.eye - 0.5 * oc.forward}, {"front", c.look_at}};
  s.bones = {{"behind", "front"}};
  const auto proj = project_keypoints(s, c);
  CHECK_FALSE(proj.points[0].in_front);
  CHECK_FALSE(proj.points[0].in_frustum);
  CHECK(proj.points[1].in_front);
  CHECK(proj.points[1].in_frustum);
  CHECK(proj.find("front") == &proj.points[1]);
  CHECK(proj.find("nothing") == nullptr);
}

TEST_CASE("projection invariances") {
  Rng rng(12);
  const auto lib = load_builtin_library();
  for (int i = 0; i < 50; ++i) {
    const auto& s = lib.entries()[static_cast<std::size_t>(uniform_int(rng, 0, 15))].skeleton;
    auto c = random_camera(rng);
    c.radius = uniform(rng, 1.0, 2.0);
    const auto base = project_keypoints(s, c);

    const double alpha = uniform(rng, -180.0, 180.0);
    auto turned = c;
    turned.azimuth_deg += alpha;
    const auto rotated = project_keypoints(rotate_z(s, alpha), turned);

    const double k = uniform(rng, 0.25, 4.0);
    auto far = c;
    far.radius *= k;
    const auto similar = project_keypoints(scaled(s, k), far);

    for (std::size_t j = 0; j < s.keypoints.size(); ++j) {
      CHECK((base.points[j].pixel - rotated.points[j].pixel).norm() < 1e-6);
      CHECK((base.points[j].pixel - similar.points[j].pixel).norm() < 1e-6);
    }
  }
}

TEST_CASE("directional prompts") {
  Camera c;
  auto at = [&](double az, double polar) {
    c.azimuth_deg = az;
    c.polar_deg = polar;
    return directional_prompt("a tiger", c);
  };
  CHECK(at(0, 90) == "a tiger, front view");
  CHECK(at(90, 90) == "a tiger, side view");
  CHECK(at(180, 20) == "a tiger, overhead view");
  CHECK(at(180, 90) == "a tiger, back view");
  CHECK(at(-45, 90) == "a tiger, front view");
  CHECK(at(44.999, 90) == "a tiger, front view");
  CHECK(at(45, 90) == "a tiger, side view");
  CHECK(at(135, 90) == "a tiger, back view");
  CHECK(at(225, 90) == "a tiger, side view");
  CHECK(at(315, 90) == "a tiger, front view");
  CHECK(at(405, 90) == "a tiger, side view");
  CHECK(at(0, 30) == "a tiger, front view");
  CHECK(at(0, 29.9) == "a tiger, overhead view");
}

TEST_CASE("camera JSON") {
  Camera c;
  c.radius = 1.25;
  c.azimuth_deg = 33.5;
  c.polar_deg = 80.0;
  c.fov_deg = 45.0;
  c.image = {64, 48};
  c.look_at = Vec3(0.1, -0.2, 0.05);
  CHECK(camera_from_json(camera_to_json(c)) == c);
  CHECK(camera_from_json(parse_json(R"({"radius": 2})")).radius == 2.0);
  CHECK(code_of([] { camera_from_json(parse_json(R"({"radius": 2, "zoom": 1})")); }) == Errc::schema_error);
  CHECK(code_of([] { camera_from_json(parse_json(R"({"image": [64]})")); }) == Errc::schema_error);
  CHECK(code_of([] { camera_from_json(parse_json(R"({"polar_deg": 0})")); }) == Errc::schema_error);
  CHECK(code_of([] { parse_json("{\n\"radius\": }"); }) == Errc::parse_error);
}
