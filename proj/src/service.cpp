#include "zoopose/service.hpp"

#include "zoopose/camera.hpp"
#include "zoopose/guidance.hpp"
#include "zoopose/json_io.hpp"
#include "zoopose/mesh.hpp"
#include "zoopose/png.hpp"
#include "zoopose/render.hpp"
#include "zoopose/text_util.hpp"

#include <httplib.h>

#include <atomic>
#include <charconv>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

namespace zoopose {

namespace {

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

// Raised when a request skeleton fails validation; answered with the report.
struct InvalidSkeletonReport {
  ValidationReport report;
};

ojson error_json(Errc code, const std::string& message) {
  ojson err;
  err["code"] = std::string(to_string(code));
  err["message"] = message;
  ojson doc;
  doc["error"] = std::move(err);
  return doc;
}

ApiResponse json_response(int status, const ojson& doc) { return {status, "application/json", doc.dump()}; }

const ojson& member(const ojson& doc, const char* key) {
  if (!doc.is_object()) throw Error(Errc::schema_error, "$: expected object");
  const auto it = doc.find(key);
  if (it == doc.end()) throw Error(Errc::schema_error, std::string("$.") + key + ": missing field");
  return *it;
}

Skeleton skeleton_field(const ojson& doc, const char* key, bool validate) {
  Skeleton s;
  try {
    s = skeleton_from_json(member(doc, key));
  } catch (const Error& e) {
    std::string msg = e.what();
    if (msg.rfind("$", 0) == 0) msg = std::string("$.") + key + msg.substr(1);
    throw Error(e.code(), msg);
  }
  if (validate) {
    auto report = validate_skeleton(s);
    if (!report.ok) throw InvalidSkeletonReport{std::move(report)};
  }
  return s;
}

Camera camera_field(const ojson& doc) { return camera_from_json(member(doc, "camera"), "$.camera"); }

PrimitiveParams params_field(const ojson& doc) {
  const auto it = doc.find("params");
  if (it == doc.end() || it->is_null()) return {};
  return params_from_json(*it, "$.params");
}

}  // namespace

ApiConfig config_from_env(ApiConfig cfg) {
  if (auto v = env("LIBRARY_DIR")) cfg.library_dir = *v;
  if (auto v = env("CHAT_API_URL")) cfg.chat_url = *v;
  if (auto v = env("CHAT_API_KEY")) cfg.chat_key = *v;
  if (auto v = env("CHAT_MODEL")) cfg.chat_model = *v;
  if (auto v = env("CORS_ORIGINS")) {
    cfg.cors_allowlist.clear();
    std::string_view rest = *v;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      if (!item.empty()) cfg.cors_allowlist.emplace_back(item);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  }
  return cfg;
}

void validate(const ApiConfig& cfg) {
  if (cfg.port < 0 || cfg.port > 65535) throw Error(Errc::invalid_argument, "port must be within 0..65535");
  if (cfg.backend == BackendChoice::external && cfg.chat_key.empty()) {
    throw Error(Errc::invalid_argument, "external chat backend selected but CHAT_API_KEY is not set");
  }
}

std::shared_ptr<ChatBackend> make_backend(const ApiConfig& cfg) {
  const bool external =
      cfg.backend == BackendChoice::external || (cfg.backend == BackendChoice::automatic && !cfg.chat_key.empty());
  if (external) return std::make_shared<HttpChatBackend>(cfg.chat_url, cfg.chat_key, cfg.chat_model, 60);
  auto mock = std::make_shared<ScriptedBackend>();
  if (cfg.fixtures_dir) {
    mock->load_fixtures(*cfg.fixtures_dir);
  } else {
    mock->load_builtin_fixtures();
  }
  return mock;
}

int http_status(Errc code) {
  switch (code) {
    case Errc::parse_error:
    case Errc::schema_error:
    case Errc::invalid_argument:
    case Errc::invalid_range:
    case Errc::step_out_of_range:
    case Errc::shape_mismatch:
      return 400;
    case Errc::not_found:
      return 404;
    case Errc::invalid_skeleton:
    case Errc::unknown_anchor:
    case Errc::incompatible_anchor:
    case Errc::unknown_target:
    case Errc::non_finite_result:
    case Errc::divergence_detected:
      return 422;
    case Errc::unparseable_response:
    case Errc::backend_error:
    case Errc::empty_library:
      return 502;
    case Errc::io_error:
      return 500;
  }
  return 500;
}

Api::Api(PoseLibrary library, std::shared_ptr<ChatBackend> backend)
    : library_(std::move(library)), backend_(std::move(backend)) {}

template <typename F>
ApiResponse Api::guarded(F&& f) const {
  try {
    return f();
  } catch (const InvalidSkeletonReport& e) {
    return json_response(422, report_to_json(e.report));
  } catch (const StageError& e) {
    auto doc = error_json(e.code(), e.what());
    doc["error"]["stage"] = e.stage();
    doc["error"]["transcript"] = transcript_to_json(e.transcript());
    return json_response(http_status(e.code()), doc);
  } catch (const Error& e) {
    return json_response(http_status(e.code()), error_json(e.code(), e.what()));
  } catch (const nlohmann::json::exception& e) {
    return json_response(400, error_json(Errc::schema_error, e.what()));
  }
}

ApiResponse Api::list_animals() const {
  return guarded([&] {
    ojson list = ojson::array();
    for (const auto& e : library_.entries()) {
      ojson item;
      item["display_name"] = library_.display_name(e);
      item["animal_name"] = e.animal_name;
      item["pose_label"] = e.pose_label;
      item["keypoints"] = e.skeleton.keypoints.size();
      list.push_back(std::move(item));
    }
    return json_response(200, list);
  });
}

ApiResponse Api::get_animal(std::string_view name) const {
  return guarded([&] {
    auto entry = find_by_display_name(library_, name);
    if (!entry) throw Error(Errc::not_found, "no library entry named '" + std::string(name) + "'");
    return json_response(200, skeleton_to_json(entry->skeleton));
  });
}

ApiResponse Api::adapt(std::string_view body) const {
  return guarded([&] {
    const auto doc = parse_json(body);
    const auto& animal = member(doc, "animal");
    const auto& pose = member(doc, "pose");
    if (!animal.is_string() || animal.get<std::string>().empty()) {
      throw Error(Errc::schema_error, "$.animal: expected non-empty string");
    }
    if (!pose.is_string()) throw Error(Errc::schema_error, "$.pose: expected string");
    const auto rec = adapt_pose(*backend_, library_, animal.get<std::string>(), pose.get<std::string>());
    return json_response(200, record_to_json(rec));
  });
}

ApiResponse Api::validate_skeleton(std::string_view body) const {
  return guarded([&] {
    const auto s = skeleton_from_json(parse_json(body));
    return json_response(200, report_to_json(zoopose::validate_skeleton(s)));
  });
}

ApiResponse Api::appendage(std::string_view body) const {
  return guarded([&] {
    const auto doc = parse_json(body);
    const auto s = skeleton_field(doc, "skeleton", true);
    const auto& kind = member(doc, "kind");
    const auto& anchor = member(doc, "anchor");
    if (!kind.is_string()) throw Error(Errc::schema_error, "$.kind: expected string");
    if (!anchor.is_string()) throw Error(Errc::schema_error, "$.anchor: expected string");
    const auto out = add_appendage(s, appendage_kind_from_string(kind.get<std::string>()), anchor.get<std::string>());
    return json_response(200, skeleton_to_json(out));
  });
}

ApiResponse Api::mesh(std::string_view body) const {
  return guarded([&] {
    const auto doc = parse_json(body);
    const auto s = skeleton_field(doc, "skeleton", true);
    const auto build = build_mesh(s, params_field(doc));
    return ApiResponse{200, "text/plain", export_obj(build.mesh)};
  });
}

ApiResponse Api::project(std::string_view body) const {
  return guarded([&] {
    const auto doc = parse_json(body);
    const auto s = skeleton_field(doc, "skeleton", true);
    const auto cam = camera_field(doc);
    const auto img = rasterize_pose_image(project_keypoints(s, cam), s.bones);
    const auto png = encode_png(img);
    return ApiResponse{200, "image/png", std::string(png.begin(), png.end())};
  });
}

ApiResponse Api::depth(std::string_view body) const {
  return guarded([&] {
    const auto doc = parse_json(body);
    const auto cam = camera_field(doc);
    TriMesh m;
    if (doc.contains("mesh")) {
      const auto& text = doc["mesh"];
      if (!text.is_string()) throw Error(Errc::schema_error, "$.mesh: expected OBJ text");
      m = import_obj(text.get<std::string>());
    } else if (doc.contains("skeleton")) {
      m = build_mesh(skeleton_field(doc, "skeleton", true), params_field(doc)).mesh;
    } else {
      throw Error(Errc::schema_error, "$: need \"mesh\" or \"skeleton\"");
    }
    const auto png = encode_png(render_depth(m, cam));
    return ApiResponse{200, "image/png", std::string(png.begin(), png.end())};
  });
}

ApiResponse Api::schedule(std::optional<std::string_view> steps) const {
  return guarded([&] {
    int n = 11;
    if (steps) {
      const auto* end = steps->data() + steps->size();
      const auto [ptr, ec] = std::from_chars(steps->data(), end, n);
      if (ec != std::errc() || ptr != end) throw Error(Errc::invalid_argument, "steps must be an integer");
      if (n < 1 || n > 100001) throw Error(Errc::invalid_argument, "steps must be within 1..100001");
    }
    return json_response(200, schedule_to_json(schedule_preview(n)));
  });
}

// ---------------------------------------------------------------------------
// HTTP transport

struct Server::Impl {
  ApiConfig cfg;
  std::shared_ptr<const Api> api;
  httplib::Server svr;
  std::mutex log_mu;
  int port = -1;

  bool origin_allowed(const std::string& origin) const {
    for (const auto& o : cfg.cors_allowlist) {
      if (o == "*" || o == origin) return true;
    }
    return false;
  }

  void log(const httplib::Request& req, int status, std::size_t bytes, double ms) {
    if (!cfg.log_requests) return;
    ojson line;
    line["ts"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::system_clock::now().time_since_epoch())
                     .count();
    line["method"] = req.method;
    line["path"] = req.path;
    line["status"] = status;
    line["bytes"] = bytes;
    line["ms"] = ms;
    std::lock_guard lock(log_mu);
    std::cerr << line.dump() << '\n';
  }

  template <typename F>
  void route(const char* method, const std::string& pattern, F handler) {
    auto wrapped = [this, handler](const httplib::Request& req, httplib::Response& res) {
      const auto start = std::chrono::steady_clock::now();
      const ApiResponse out = handler(req);
      res.status = out.status;
      res.set_content(out.body, out.content_type.c_str());
      const std::chrono::duration<double, std::milli> took = std::chrono::steady_clock::now() - start;
      log(req, out.status, out.body.size(), took.count());
    };
    if (std::string_view(method) == "GET") {
      svr.Get(pattern, wrapped);
    } else {
      svr.Post(pattern, wrapped);
    }
  }
};

Server::Server(const ApiConfig& cfg, std::shared_ptr<const Api> api) : impl_(std::make_unique<Impl>()) {
  validate(cfg);
  impl_->cfg = cfg;
  impl_->api = std::move(api);
  auto& im = *impl_;
  const Api& a = *im.api;

  im.route("GET", "/v1/animals", [&a](const httplib::Request&) { return a.list_animals(); });
  im.route("GET", R"(/v1/animals/(.+))", [&a](const httplib::Request& r) { return a.get_animal(r.matches[1].str()); });
  im.route("POST", "/v1/adapt", [&a](const httplib::Request& r) { return a.adapt(r.body); });
  im.route("POST", "/v1/skeleton/validate", [&a](const httplib::Request& r) { return a.validate_skeleton(r.body); });
  im.route("POST", "/v1/skeleton/appendage", [&a](const httplib::Request& r) { return a.appendage(r.body); });
  im.route("POST", "/v1/mesh", [&a](const httplib::Request& r) { return a.mesh(r.body); });
  im.route("POST", "/v1/project", [&a](const httplib::Request& r) { return a.project(r.body); });
  im.route("POST", "/v1/depth", [&a](const httplib::Request& r) { return a.depth(r.body); });
  im.route("GET", "/v1/schedule", [&a](const httplib::Request& r) {
    std::optional<std::string> steps;
    if (r.has_param("steps")) steps = r.get_param_value("steps");
    return a.schedule(steps ? std::optional<std::string_view>(*steps) : std::nullopt);
  });

  im.svr.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  im.svr.set_post_routing_handler([&im](const httplib::Request& req, httplib::Response& res) {
    const auto origin = req.get_header_value("Origin");
    if (origin.empty() || !im.origin_allowed(origin)) return;
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Vary", "Origin");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
  im.svr.set_error_handler([&im](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    const auto code = res.status == 404 ? Errc::not_found : Errc::invalid_argument;
    res.set_content(error_json(code, "no route for " + req.method + " " + req.path).dump(), "application/json");
    im.log(req, res.status, res.body.size(), 0.0);
  });
}

Server::~Server() { stop(); }

int Server::bind() {
  auto& im = *impl_;
  im.port = im.cfg.port == 0 ? im.svr.bind_to_any_port(im.cfg.host) : (im.svr.bind_to_port(im.cfg.host, im.cfg.port)
                                                                           ? im.cfg.port
                                                                           : -1);
  if (im.port < 0) {
    throw Error(Errc::io_error, "cannot bind " + im.cfg.host + ":" + std::to_string(im.cfg.port));
  }
  return im.port;
}

void Server::listen() {
  if (impl_->port < 0) bind();
  impl_->svr.listen_after_bind();
}

void Server::stop() {
  if (impl_ && impl_->svr.is_running()) impl_->svr.stop();
}

bool Server::running() const { return impl_->svr.is_running(); }

namespace {

std::atomic<bool> g_stop_requested{false};

extern "C" void on_stop_signal(int) { g_stop_requested.store(true); }

}  // namespace

int serve(const ApiConfig& cfg) {
  std::shared_ptr<const Api> api;
  try {
    validate(cfg);
    auto lib = cfg.library_dir ? load_library(*cfg.library_dir) : load_builtin_library();
    api = std::make_shared<const Api>(std::move(lib), make_backend(cfg));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  Server server(cfg, api);
  int port = 0;
  try {
    port = server.bind();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::signal(SIGINT, on_stop_signal);
  std::signal(SIGTERM, on_stop_signal);
  std::cerr << ojson{{"event", "listening"}, {"host", cfg.host}, {"port", port},
                     {"entries", api->library().size()}}.dump()
            << '\n';
  std::thread watcher([&server] {
    while (!g_stop_requested.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
  });
  server.listen();
  g_stop_requested.store(true);
  watcher.join();
  std::cerr << ojson{{"event", "stopped"}}.dump() << '\n';
  return 0;
}

}  // namespace zoopose
