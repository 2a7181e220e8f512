#pragma once

#include "zoopose/camera.hpp"
#include "zoopose/guidance.hpp"
#include "zoopose/mesh.hpp"
#include "zoopose/skeleton.hpp"

#include <nlohmann/json.hpp>

namespace zoopose {

using ojson = nlohmann::ordered_json;

ojson skeleton_to_json(const Skeleton& s);
/// Throws Error{schema_error} naming the offending field path.
Skeleton skeleton_from_json(const ojson& doc);
ojson report_to_json(const ValidationReport& report);

/// {"radius", "azimuth_deg", "polar_deg", "fov_deg", "image": [w, h], "look_at"?: [x, y, z]}.
/// Omitted fields keep their defaults. Throws Error{schema_error}.
Camera camera_from_json(const ojson& doc, const std::string& path = "$");
ojson camera_to_json(const Camera& c);

/// Any subset of PrimitiveParams fields by name. Throws Error{schema_error}.
PrimitiveParams params_from_json(const ojson& doc, const std::string& path = "$");

ojson schedule_to_json(const std::vector<SchedulePoint>& points);

/// Parses text, mapping parse failures to Error{parse_error} with a line number.
ojson parse_json(std::string_view text);

}  // namespace zoopose
