#include "zoopose/agents.hpp"
#include "zoopose/camera.hpp"
#include "zoopose/error.hpp"
#include "zoopose/guidance.hpp"
#include "zoopose/json_io.hpp"
#include "zoopose/library.hpp"
#include "zoopose/mesh.hpp"
#include "zoopose/png.hpp"
#include "zoopose/render.hpp"
#include "zoopose/service.hpp"
#include "zoopose/text_util.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace zoopose;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "file not found: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, std::string_view data) {
  if (path.empty() || path == "-") {
    std::cout.write(data.data(), static_cast<std::streamsize>(data.size()));
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

PoseLibrary library_from(const std::string& dir) {
  if (!dir.empty()) return load_library(dir);
  const auto cfg = config_from_env();
  return cfg.library_dir ? load_library(*cfg.library_dir) : load_builtin_library();
}

Skeleton read_skeleton(const std::string& path) {
  auto s = deserialize(read_file(path));
  const auto report = validate_skeleton(s);
  if (!report.ok) {
    std::string msg = "invalid skeleton " + path + ":";
    for (const auto& v : report.violations) msg += "\n  " + v.kind + " " + v.subject + " " + v.detail;
    throw Error(Errc::invalid_skeleton, msg);
  }
  return s;
}

Camera read_camera(const std::string& path) { return camera_from_json(parse_json(read_file(path))); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skeleton-guided animal asset toolkit"};
  app.require_subcommand(1);
  std::string library_dir;
  app.add_option("--library-dir", library_dir, "Load library poses from this directory");

  auto* library = app.add_subcommand("library", "Inspect the pose library");
  library->require_subcommand(1);
  auto* library_list = library->add_subcommand("list", "List library entries in order");
  std::string show_name;
  auto* library_show = library->add_subcommand("show", "Print one entry's skeleton JSON");
  library_show->add_option("name", show_name, "Entry name, e.g. \"Eagle - flying\"")->required();

  std::string animal, pose, fixtures_dir;
  auto* adapt = app.add_subcommand("adapt", "Adapt a library pose to a new animal");
  adapt->add_option("animal", animal)->required();
  adapt->add_option("pose", pose)->required();
  adapt->add_option("--fixtures", fixtures_dir, "Mock transcripts directory");

  std::string skeleton_path, output, camera_path, params_path;
  auto* mesh = app.add_subcommand("mesh", "Build the balloon mesh as OBJ");
  mesh->add_option("skeleton", skeleton_path)->required();
  mesh->add_option("-o,--output", output, "OBJ path (stdout when omitted)");
  mesh->add_option("--params", params_path, "PrimitiveParams JSON");

  auto* project = app.add_subcommand("project", "Render the 2D pose control image");
  project->add_option("skeleton", skeleton_path)->required();
  project->add_option("--camera", camera_path)->required();
  project->add_option("-o,--output", output)->required();

  std::string mesh_path;
  auto* depth = app.add_subcommand("depth", "Render a 16-bit depth map of a mesh");
  depth->add_option("mesh", mesh_path, "OBJ file, or a skeleton JSON to mesh first")->required();
  depth->add_option("--camera", camera_path)->required();
  depth->add_option("-o,--output", output)->required();

  auto* schedule = app.add_subcommand("schedule", "Guidance schedules");
  schedule->require_subcommand(1);
  int steps = 11;
  auto* preview = schedule->add_subcommand("preview", "Print control/guidance/t at evenly spaced steps as CSV");
  preview->add_option("--steps", steps)->check(CLI::Range(1, 100001));

  auto* sds = app.add_subcommand("sds", "Toy score-distillation optimization");
  sds->require_subcommand(1);
  std::string config_path, trace_path;
  auto* demo = sds->add_subcommand("demo", "Optimize an image grid against a target-pulling denoiser");
  demo->add_option("--config", config_path, "TOML or JSON config")->required();
  demo->add_option("--trace", trace_path, "Write the per-iteration CSV trace here");

  ApiConfig serve_cfg;
  std::string cors;
  std::string backend = "auto";
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--host", serve_cfg.host);
  serve_cmd->add_option("--port", serve_cfg.port)->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--cors", cors, "Comma separated allowed origins");
  serve_cmd->add_option("--backend", backend)->check(CLI::IsMember({"auto", "mock", "external"}));
  serve_cmd->add_option("--fixtures", fixtures_dir, "Mock transcripts directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (library_list->parsed()) {
      const auto lib = library_from(library_dir);
      for (const auto& name : lib.display_names()) std::cout << name << '\n';
    } else if (library_show->parsed()) {
      const auto lib = library_from(library_dir);
      const auto entry = find_by_display_name(lib, show_name);
      if (!entry) throw Error(Errc::not_found, "no library entry named '" + show_name + "'");
      std::cout << serialize(entry->skeleton, 2) << '\n';
    } else if (adapt->parsed()) {
      ApiConfig cfg = config_from_env();
      if (!fixtures_dir.empty()) cfg.fixtures_dir = fixtures_dir;
      const auto lib = library_from(library_dir);
      auto backend_ptr = make_backend(cfg);
      const auto rec = adapt_pose(*backend_ptr, lib, animal, pose);
      std::cout << record_to_json(rec).dump(2) << '\n';
    } else if (mesh->parsed()) {
      const auto s = read_skeleton(skeleton_path);
      const auto params = params_path.empty() ? PrimitiveParams{} : params_from_json(parse_json(read_file(params_path)));
      const auto build = build_mesh(s, params);
      for (const auto& d : build.skipped) {
        std::cerr << "warning: skipped degenerate bone " << d.bone.parent << "-" << d.bone.child << '\n';
      }
      write_output(output, export_obj(build.mesh));
    } else if (project->parsed()) {
      const auto s = read_skeleton(skeleton_path);
      const auto png = encode_png(rasterize_pose_image(project_keypoints(s, read_camera(camera_path)), s.bones));
      write_output(output, std::string_view(reinterpret_cast<const char*>(png.data()), png.size()));
    } else if (depth->parsed()) {
      const auto cam = read_camera(camera_path);
      const TriMesh m = lower(fs::path(mesh_path).extension().string()) == ".json"
                            ? build_mesh(read_skeleton(mesh_path)).mesh
                            : import_obj(read_file(mesh_path));
      const auto png = encode_png(render_depth(m, cam));
      write_output(output, std::string_view(reinterpret_cast<const char*>(png.data()), png.size()));
    } else if (preview->parsed()) {
      std::cout << "step,control_scale,guidance_scale,t\n";
      for (const auto& p : schedule_preview(steps)) {
        std::cout << p.step << ',' << format_double(p.control_scale) << ',' << format_double(p.guidance_scale) << ','
                  << format_double(p.t) << '\n';
      }
    } else if (demo->parsed()) {
      const auto cfg = load_demo_config(config_path);
      const NoiseSchedule sched(cfg.noise_steps, cfg.beta_start, cfg.beta_end);
      const TargetPullingOracle oracle(sched, demo_target(cfg.size, cfg.run.seed));
      const auto run = optimize_toy(oracle, cfg.schedule, sched, cfg.run);
      if (!trace_path.empty()) write_output(trace_path, trace_csv(run.trace));
      const double err = (run.asset.eta - oracle.target()).abs().maxCoeff();
      std::cout << "iterations: " << run.trace.size() << '\n'
                << "final rgb_loss: " << format_double(run.trace.back().rgb_loss) << '\n'
                << "max |eta - target|: " << format_double(err) << '\n';
    } else if (serve_cmd->parsed()) {
      serve_cfg = config_from_env(serve_cfg);
      if (!library_dir.empty()) serve_cfg.library_dir = library_dir;
      if (!fixtures_dir.empty()) serve_cfg.fixtures_dir = fixtures_dir;
      if (!cors.empty()) {
        serve_cfg.cors_allowlist.clear();
        std::string_view rest = cors;
        while (!rest.empty()) {
          const auto comma = rest.find(',');
          if (auto item = trim(rest.substr(0, comma)); !item.empty()) serve_cfg.cors_allowlist.emplace_back(item);
          if (comma == std::string_view::npos) break;
          rest.remove_prefix(comma + 1);
        }
      }
      serve_cfg.backend = backend == "mock"       ? BackendChoice::mock
                          : backend == "external" ? BackendChoice::external
                                                  : BackendChoice::automatic;
      return serve(serve_cfg);
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    std::cerr << transcript_to_json(e.transcript()).dump(2) << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
