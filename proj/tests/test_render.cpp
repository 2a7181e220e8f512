#include "oracles.hpp"

#include "zoopose/error.hpp"
#include "zoopose/png.hpp"
#include "zoopose/render.hpp"

#include <doctest.h>

#include <numbers>

using namespace zptest;

namespace {

ProjectedPoint at_pixel(const std::string& name, double x, double y, bool in_frustum = true) {
  ProjectedPoint p;
  p.name = name;
  p.pixel = Vec2(x, y);
  p.depth = 1.0;
  p.camera_space = Vec3(0, 0, 1);
  p.in_front = true;
  p.in_frustum = in_frustum;
  return p;
}

TriMesh uv_sphere(double radius, int rings, int segments) {
  TriMesh m;
  for (int r = 0; r <= rings; ++r) {
    const double th = std::numbers::pi * r / rings;
    for (int s = 0; s < segments; ++s) {
      const double ph = 2.0 * std::numbers::pi * s / segments;
      m.vertices.emplace_back(radius * std::sin(th) * std::cos(ph), radius * std::sin(th) * std::sin(ph),
                              radius * std::cos(th));
    }
  }
  auto id = [&](int r, int s) { return static_cast<std::uint32_t>(r * segments + (s % segments)); };
  for (int r = 0; r < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      if (r > 0) m.triangles.push_back({id(r, s), id(r + 1, s), id(r, s + 1)});
      if (r + 1 < rings) m.triangles.push_back({id(r, s + 1), id(r + 1, s), id(r + 1, s + 1)});
    }
  }
  m.part_labels.assign(m.triangles.size(), "sphere");
  return m;
}

Camera square_camera(int size) {
  Camera c;
  c.radius = 2.0;
  c.image = {size, size};
  return c;
}

}  // namespace

TEST_CASE("palette follows canonical keypoint names") {
  const auto& names = canonical_keypoint_names();
  const auto& palette = keypoint_palette();
  for (std::size_t i = 0; i < names.size(); ++i) CHECK(keypoint_color(names[i]) == palette[i]);
  CHECK(keypoint_color("nose_2") == keypoint_color("nose"));
  CHECK(keypoint_color("paw_front_3") == keypoint_color("paw_front_left"));
  CHECK(keypoint_color("horn") == keypoint_color("horn"));
}

TEST_CASE("nothing in frustum gives a black image") {
  PoseProjection p;
  p.image = {40, 30};
  p.points = {at_pixel("nose", -50, -50, false), at_pixel("neck_end", 500, 10, false)};
  const std::vector<Bone> bones = {{"nose", "neck_end"}};
  const auto img = rasterize_pose_image(p, bones);
  CHECK(img.width == 40);
  CHECK(img.height == 30);
  CHECK(std::all_of(img.rgb.begin(), img.rgb.end(), [](auto v) { return v == 0; }));
}

TEST_CASE("single bone matches a brute-force distance rasterizer") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    PoseProjection p;
    p.image = {uniform_int(rng, 40, 200), uniform_int(rng, 40, 200)};
    const Vec2 a(uniform(rng, 0, p.image.width), uniform(rng, 0, p.image.height));
    const Vec2 b(uniform(rng, 0, p.image.width), uniform(rng, 0, p.image.height));
    p.points = {at_pixel("knee_back_left", a.x(), a.y()), at_pixel("paw_back_left", b.x(), b.y())};
    const std::vector<Bone> bones = {{"knee_back_left", "paw_back_left"}};
    ControlStyle style;
    style.draw_keypoints = false;
    style.stroke_px = uniform(rng, 2.0, 30.0);
    const auto img = rasterize_pose_image(p, bones, style);
    const double half = 0.5 * style.stroke_px * std::min(p.image.width, p.image.height) / 512.0;
    const Rgb c = keypoint_color("paw_back_left");
    for (int y = 0; y < p.image.height; ++y) {
      for (int x = 0; x < p.image.width; ++x) {
        const double d = point_segment_distance(Vec2(x + 0.5, y + 0.5), a, b);
        const double alpha = std::clamp(half + 0.5 - d, 0.0, 1.0);
        const Rgb got = img.at(x, y);
        CHECK(std::abs(got.r - alpha * c.r) <= 0.5 + 1e-9);
        CHECK(std::abs(got.g - alpha * c.g) <= 0.5 + 1e-9);
        CHECK(std::abs(got.b - alpha * c.b) <= 0.5 + 1e-9);
        if (d >= half + 0.5 + 1e-9) CHECK(got == Rgb{});
      }
    }
  }
}

TEST_CASE("a bone with one end behind the camera is clipped, not dropped") {
  Camera c = square_camera(64);
  const auto oc = oracle_camera(c);
  Skeleton s;
  s.keypoints = {{"neck_end", c.look_at}, {"nose", oc.eye - 0.3 * oc.forward + 0.2 * oc.right}};
  s.bones = {{"neck_end", "nose"}};
  const auto img = rasterize_pose_image(project_keypoints(s, c), s.bones);
  int lit = 0;
  for (auto v : img.rgb) lit += v != 0;
  CHECK(lit > 0);
}

TEST_CASE("pose images are deterministic and encode to stable PNG bytes") {
  const auto s = library_skeleton("Giraffe");
  Camera c = square_camera(128);
  c.azimuth_deg = 70.0;
  const auto a = rasterize_pose_image(project_keypoints(s, c), s.bones);
  const auto b = rasterize_pose_image(project_keypoints(s, c), s.bones);
  CHECK(a == b);
  CHECK(encode_png(a) == encode_png(b));
  const auto png = encode_png(a);
  const auto back = decode_png(png);
  CHECK(back.width == 128);
  CHECK(back.height == 128);
  CHECK(back.channels == 3);
  CHECK(back.bit_depth == 8);
  REQUIRE(back.samples.size() == a.rgb.size());
  for (std::size_t i = 0; i < a.rgb.size(); ++i) CHECK(back.samples[i] == a.rgb[i]);
  CHECK_THROWS_AS(decode_png(std::vector<std::uint8_t>{1, 2, 3}), Error);
}

TEST_CASE("depth of an empty mesh is all zero") {
  const auto d = render_depth(TriMesh{}, square_camera(16));
  CHECK(d.depth.size() == 256);
  CHECK(std::all_of(d.depth.begin(), d.depth.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("single facing triangle and z-buffer occlusion") {
  Camera c = square_camera(32);
  const auto oc = oracle_camera(c);
  TriMesh m;
  auto tri = [&](double dist, double size) {
    const Vec3 center = oc.eye + dist * oc.forward;
    const auto base = static_cast<std::uint32_t>(m.vertices.size());
    m.vertices.push_back(center - size * oc.right - size * oc.up);
    m.vertices.push_back(center + size * oc.right - size * oc.up);
    m.vertices.push_back(center + size * oc.up);
    m.triangles.push_back({base, base + 1, base + 2});
    m.part_labels.push_back("t");
  };
  tri(2.0, 0.4);
  const auto single = render_depth(m, c);
  CHECK(single.at(16, 16) > 0.0);
  CHECK(single.at(0, 0) == 0.0);
  CHECK(single.at(31, 0) == 0.0);

  tri(1.5, 0.1);
  const auto both = render_depth(m, c);
  CHECK(both.near == doctest::Approx(1.5));
  CHECK(both.far == doctest::Approx(2.0));
  CHECK(both.at(16, 16) == doctest::Approx(1.0));
  // Covered only by the farther triangle.
  CHECK(both.at(16, 20) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(both.at(16, 20) >= 0.0);
  CHECK(single.at(16, 20) > 0.0);
}

TEST_CASE("sphere depth matches analytic ray-sphere depth") {
  const int n = 32;
  Camera c = square_camera(n);
  c.fov_deg = 80.0;
  const auto m = uv_sphere(1.0, 96, 192);
  const auto d = render_depth(m, c);
  const auto oc = oracle_camera(c);
  const double span = d.far - d.near;
  double worst = 0.0;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const Vec3 dir = oc.forward + ((x + 0.5 - n / 2.0) / oc.focal) * oc.right + ((n / 2.0 - y - 0.5) / oc.focal) * oc.up;
      // |eye + t dir|^2 = 1
      const double qa = dir.squaredNorm(), qb = 2.0 * oc.eye.dot(dir), qc = oc.eye.squaredNorm() - 1.0;
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc < 0.05 * qa) continue;  // skip the silhouette band
      const double t = (-qb - std::sqrt(disc)) / (2.0 * qa);
      const double want = (d.far - t) / span;
      worst = std::max(worst, std::abs(d.at(x, y) - want));
    }
  }
  CHECK(worst < 2.0 / n);
  const double center = d.at(n / 2, n / 2);
  for (int x = n / 2; x + 1 < n; ++x) CHECK(d.at(x + 1, n / 2) <= center + 1e-12);
  for (int x = n / 2; x + 1 < n; ++x) CHECK(d.at(x + 1, n / 2) <= d.at(x, n / 2) + 2.0 / n);
}

TEST_CASE("z-buffer agrees with a brute-force ray caster") {
  Rng rng(77);
  int compared = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = random_triangle_soup(rng, uniform_int(rng, 1, 100));
    Camera c = square_camera(64);
    c.azimuth_deg = uniform(rng, 0, 360);
    c.polar_deg = uniform(rng, 60, 120);
    c.radius = uniform(rng, 1.0, 2.0);
    const auto got = render_depth(m, c);
    const auto want = raycast_depth(m, c, kDepthNearClip);
    CHECK(got.near == doctest::Approx(want.near).epsilon(1e-12));
    CHECK(got.far == doctest::Approx(want.far).epsilon(1e-12));
    for (std::size_t i = 0; i < got.depth.size(); ++i) {
      if (want.silhouette[i]) continue;
      CHECK(std::abs(got.depth[i] - want.depth[i]) < 1e-6);
      ++compared;
    }
  }
  CHECK(compared > 20000);
}

TEST_CASE("depth PNG stores 16-bit samples") {
  const auto m = build_mesh(library_skeleton("Tortoise")).mesh;
  const auto d = render_depth(m, square_camera(48));
  const auto back = decode_png(encode_png(d));
  CHECK(back.bit_depth == 16);
  CHECK(back.channels == 1);
  REQUIRE(back.samples.size() == d.depth.size());
  for (std::size_t i = 0; i < d.depth.size(); ++i) {
    CHECK(back.samples[i] == static_cast<std::uint16_t>(std::lround(d.depth[i] * 65535.0)));
  }
}
