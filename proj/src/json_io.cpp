#include "zoopose/json_io.hpp"

#include "zoopose/error.hpp"

#include <algorithm>

namespace zoopose {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(Errc::schema_error, path + ": " + what);
}

double number_at(const ojson& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected number");
  return v.get<double>();
}

int integer_at(const ojson& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected integer");
  const auto n = v.get<long long>();
  if (n < 0 || n > 1'000'000) fail(path, "out of range");
  return static_cast<int>(n);
}

}  // namespace

ojson parse_json(std::string_view text) {
  try {
    return ojson::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n');
    throw Error(Errc::parse_error, "line " + std::to_string(line) + ": " + e.what());
  }
}

Camera camera_from_json(const ojson& doc, const std::string& path) {
  if (!doc.is_object()) fail(path, "expected object");
  Camera c;
  for (const auto& [key, value] : doc.items()) {
    const std::string at = path + "." + key;
    if (key == "radius") c.radius = number_at(value, at);
    else if (key == "azimuth_deg") c.azimuth_deg = number_at(value, at);
    else if (key == "polar_deg") c.polar_deg = number_at(value, at);
    else if (key == "fov_deg") c.fov_deg = number_at(value, at);
    else if (key == "image") {
      if (!value.is_array() || value.size() != 2) fail(at, "expected [width, height]");
      c.image.width = integer_at(value[0], at + "[0]");
      c.image.height = integer_at(value[1], at + "[1]");
    } else if (key == "look_at") {
      if (!value.is_array() || value.size() != 3) fail(at, "expected [x, y, z]");
      for (int i = 0; i < 3; ++i) c.look_at[i] = number_at(value[i], at + "[" + std::to_string(i) + "]");
    } else {
      fail(at, "unknown field");
    }
  }
  try {
    validate_camera(c);
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return c;
}

ojson camera_to_json(const Camera& c) {
  ojson doc;
  doc["radius"] = c.radius;
  doc["azimuth_deg"] = c.azimuth_deg;
  doc["polar_deg"] = c.polar_deg;
  doc["fov_deg"] = c.fov_deg;
  doc["image"] = {c.image.width, c.image.height};
  doc["look_at"] = {c.look_at.x(), c.look_at.y(), c.look_at.z()};
  return doc;
}

PrimitiveParams params_from_json(const ojson& doc, const std::string& path) {
  if (!doc.is_object()) fail(path, "expected object");
  PrimitiveParams p;
  for (const auto& [key, value] : doc.items()) {
    const std::string at = path + "." + key;
    if (key == "cylinder_radius_factor") p.cylinder_radius_factor = number_at(value, at);
    else if (key == "cylinder_radius_min") p.cylinder_radius_min = number_at(value, at);
    else if (key == "cylinder_radius_max") p.cylinder_radius_max = number_at(value, at);
    else if (key == "eye_radius") p.eye_radius = number_at(value, at);
    else if (key == "cone_length_fraction") p.cone_length_fraction = number_at(value, at);
    else if (key == "cone_length_max") p.cone_length_max = number_at(value, at);
    else if (key == "cone_radius_factor") p.cone_radius_factor = number_at(value, at);
    else if (key == "torso_length_factor") p.torso_length_factor = number_at(value, at);
    else if (key == "torso_width_factor") p.torso_width_factor = number_at(value, at);
    else if (key == "torso_height_factor") p.torso_height_factor = number_at(value, at);
    else if (key == "radial_segments") p.radial_segments = integer_at(value, at);
    else if (key == "ellipsoid_rings") p.ellipsoid_rings = integer_at(value, at);
    else if (key == "spine_blend") {
      if (!value.is_boolean()) fail(at, "expected boolean");
      p.spine_blend = value.get<bool>();
    } else {
      fail(at, "unknown field");
    }
  }
  return p;
}

ojson schedule_to_json(const std::vector<SchedulePoint>& points) {
  ojson list = ojson::array();
  for (const auto& p : points) {
    ojson row;
    row["step"] = p.step;
    row["control_scale"] = p.control_scale;
    row["guidance_scale"] = p.guidance_scale;
    row["t"] = p.t;
    list.push_back(std::move(row));
  }
  return list;
}

}  // namespace zoopose
