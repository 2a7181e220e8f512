#pragma once

#include "zoopose/agents.hpp"
#include "zoopose/library.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace zoopose {

enum class BackendChoice { automatic, mock, external };

struct ApiConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> library_dir;  // unset: compiled-in library
  BackendChoice backend = BackendChoice::automatic;  // automatic: external only when a key is set
  std::string chat_url = "https://api.openai.com/v1/chat/completions";
  std::string chat_key;
  std::string chat_model = "gpt-4o";
  std::optional<std::filesystem::path> fixtures_dir;  // mock transcripts; unset: compiled-in
  std::vector<std::string> cors_allowlist;            // "*" allows every origin
  bool log_requests = true;
};

/// Overlays LIBRARY_DIR, CHAT_API_URL, CHAT_API_KEY, CHAT_MODEL and
/// CORS_ORIGINS (comma separated) from the environment.
ApiConfig config_from_env(ApiConfig base = {});

/// Throws Error{invalid_argument} for a bad port.
void validate(const ApiConfig& cfg);

/// Mock (fixtures) or HTTP backend per the config.
std::shared_ptr<ChatBackend> make_backend(const ApiConfig& cfg);

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// HTTP status for an error code.
int http_status(Errc code);

/// Request handlers, independent of the transport. Stateless apart from the
/// library snapshot and the chat backend.
class Api {
 public:
  Api(PoseLibrary library, std::shared_ptr<ChatBackend> backend);

  ApiResponse list_animals() const;
  ApiResponse get_animal(std::string_view name) const;
  ApiResponse adapt(std::string_view body) const;
  ApiResponse validate_skeleton(std::string_view body) const;
  ApiResponse appendage(std::string_view body) const;
  ApiResponse mesh(std::string_view body) const;
  ApiResponse project(std::string_view body) const;
  ApiResponse depth(std::string_view body) const;
  ApiResponse schedule(std::optional<std::string_view> steps) const;

  const PoseLibrary& library() const { return library_; }

 private:
  template <typename F>
  ApiResponse guarded(F&& f) const;

  PoseLibrary library_;
  std::shared_ptr<ChatBackend> backend_;
};

class Server {
 public:
  Server(const ApiConfig& cfg, std::shared_ptr<const Api> api);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and returns the port. Throws Error{io_error} when binding fails.
  int bind();
  /// Serves until stop() is called.
  void listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Loads the library, binds and serves until SIGINT or SIGTERM. Returns the
/// process exit code.
int serve(const ApiConfig& cfg);

}  // namespace zoopose
