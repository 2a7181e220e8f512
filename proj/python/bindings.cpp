#include "zoopose/agents.hpp"
#include "zoopose/camera.hpp"
#include "zoopose/guidance.hpp"
#include "zoopose/json_io.hpp"
#include "zoopose/library.hpp"
#include "zoopose/mesh.hpp"
#include "zoopose/png.hpp"
#include "zoopose/render.hpp"
#include "zoopose/service.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace zoopose;

namespace {

const PoseLibrary& builtin() {
  static const PoseLibrary lib = load_builtin_library();
  return lib;
}

Skeleton skeleton_arg(const std::string& json) { return deserialize(json); }

Camera camera_arg(const std::string& json) { return json.empty() ? Camera{} : camera_from_json(parse_json(json)); }

PrimitiveParams params_arg(const std::string& json) {
  return json.empty() ? PrimitiveParams{} : params_from_json(parse_json(json));
}

py::bytes as_bytes(const Bytes& b) { return py::bytes(reinterpret_cast<const char*>(b.data()), b.size()); }

py::array_t<std::uint8_t> image_array(const ControlImage& img) {
  py::array_t<std::uint8_t> out({img.height, img.width, 3});
  std::copy(img.rgb.begin(), img.rgb.end(), out.mutable_data());
  return out;
}

py::array_t<double> depth_array(const DepthMap& d) {
  py::array_t<double> out({d.height, d.width});
  std::copy(d.depth.begin(), d.depth.end(), out.mutable_data());
  return out;
}

TriMesh mesh_arg(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return build_mesh(skeleton_arg(text)).mesh;
  return import_obj(text);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Skeleton-guided animal asset toolkit";

  static const py::handle error_type = py::exception<Error>(m, "Error", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("library_names", [] { return builtin().display_names(); });
  m.def("library_skeleton", [](const std::string& name) {
    const auto entry = find_by_display_name(builtin(), name);
    if (!entry) throw Error(Errc::not_found, "no library entry named '" + name + "'");
    return serialize(entry->skeleton);
  }, py::arg("name"));
  m.def("validate_skeleton", [](const std::string& json) {
    return report_to_json(validate_skeleton(skeleton_arg(json))).dump();
  }, py::arg("skeleton"));
  m.def("add_appendage", [](const std::string& json, const std::string& kind, const std::string& anchor) {
    return serialize(add_appendage(skeleton_arg(json), appendage_kind_from_string(kind), anchor));
  }, py::arg("skeleton"), py::arg("kind"), py::arg("anchor"));

  m.def("mesh_obj", [](const std::string& json, const std::string& params) {
    return export_obj(build_mesh(skeleton_arg(json), params_arg(params)).mesh);
  }, py::arg("skeleton"), py::arg("params") = "");
  m.def("mesh_arrays", [](const std::string& json, const std::string& params) {
    const auto m = build_mesh(skeleton_arg(json), params_arg(params)).mesh;
    py::array_t<double> v({static_cast<py::ssize_t>(m.vertices.size()), py::ssize_t{3}});
    auto vv = v.mutable_unchecked<2>();
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
      for (int k = 0; k < 3; ++k) vv(static_cast<py::ssize_t>(i), k) = m.vertices[i][k];
    }
    py::array_t<std::uint32_t> f({static_cast<py::ssize_t>(m.triangles.size()), py::ssize_t{3}});
    auto ff = f.mutable_unchecked<2>();
    for (std::size_t i = 0; i < m.triangles.size(); ++i) {
      for (int k = 0; k < 3; ++k) ff(static_cast<py::ssize_t>(i), k) = m.triangles[i][static_cast<std::size_t>(k)];
    }
    return py::make_tuple(v, f, m.part_labels);
  }, py::arg("skeleton"), py::arg("params") = "");

  m.def("sample_camera", [](std::uint64_t seed) { return camera_to_json(sample_camera(seed)).dump(); },
        py::arg("seed"));
  m.def("project_keypoints", [](const std::string& json, const std::string& camera) {
    const auto proj = project_keypoints(skeleton_arg(json), camera_arg(camera));
    py::dict out;
    for (const auto& p : proj.points) out[py::str(p.name)] = py::make_tuple(p.pixel.x(), p.pixel.y(), p.depth, p.in_frustum);
    return out;
  }, py::arg("skeleton"), py::arg("camera") = "");
  m.def("pose_image", [](const std::string& json, const std::string& camera) {
    const auto s = skeleton_arg(json);
    return image_array(rasterize_pose_image(project_keypoints(s, camera_arg(camera)), s.bones));
  }, py::arg("skeleton"), py::arg("camera") = "");
  m.def("pose_png", [](const std::string& json, const std::string& camera) {
    const auto s = skeleton_arg(json);
    return as_bytes(encode_png(rasterize_pose_image(project_keypoints(s, camera_arg(camera)), s.bones)));
  }, py::arg("skeleton"), py::arg("camera") = "");
  m.def("depth_map", [](const std::string& mesh, const std::string& camera) {
    return depth_array(render_depth(mesh_arg(mesh), camera_arg(camera)));
  }, py::arg("mesh"), py::arg("camera") = "");
  m.def("depth_png", [](const std::string& mesh, const std::string& camera) {
    return as_bytes(encode_png(render_depth(mesh_arg(mesh), camera_arg(camera))));
  }, py::arg("mesh"), py::arg("camera") = "");

  m.def("control_scale", [](int step) { return control_scale(step); }, py::arg("step"));
  m.def("guidance_scale", [](int step) { return guidance_scale(step); }, py::arg("step"));
  m.def("anneal_timestep", [](int step) { return anneal_timestep(step); }, py::arg("step"));
  m.def("schedule_preview", [](int samples) { return schedule_to_json(schedule_preview(samples)).dump(); },
        py::arg("samples") = 11);
  m.def("sds_demo", [](int size, int iters, std::uint64_t seed, double step_size, double lambda_rgb) {
    const NoiseSchedule sched;
    const TargetPullingOracle oracle(sched, demo_target(size, seed));
    ToyRunOptions opt;
    opt.iters = iters;
    opt.seed = seed;
    opt.step_size = step_size;
    opt.lambda_rgb = lambda_rgb;
    const auto run = optimize_toy(oracle, ScheduleConfig{}, sched, opt);
    return py::make_tuple(Eigen::ArrayXXd(run.asset.eta), Eigen::ArrayXXd(oracle.target()), trace_csv(run.trace));
  }, py::arg("size") = 16, py::arg("iters") = 2000, py::arg("seed") = 0, py::arg("step_size") = 0.1,
     py::arg("lambda_rgb") = kDefaultLambdaRgb);

  m.def("adapt", [](const std::string& animal, const std::string& pose) {
    ApiConfig cfg;
    cfg.backend = BackendChoice::mock;
    const auto backend = make_backend(cfg);
    return record_to_json(adapt_pose(*backend, builtin(), animal, pose)).dump();
  }, py::arg("animal"), py::arg("pose"));
}
