#include "zoopose/agents.hpp"

#include <httplib.h>

namespace zoopose {

HttpChatBackend::HttpChatBackend(std::string url, std::string api_key, std::string model, int timeout_s)
    : api_key_(std::move(api_key)), model_(std::move(model)), timeout_s_(timeout_s) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(Errc::invalid_argument, "chat URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  base_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/v1/chat/completions" : url.substr(path_start);
}

std::string HttpChatBackend::complete(const ChatRequest& request) {
  ojson body;
  body["model"] = model_;
  body["messages"] = ojson::array({{{"role", "system"}, {"content", request.system}},
                                   {{"role", "user"}, {"content", request.user}}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;

  httplib::Client client(base_);
  client.set_connection_timeout(timeout_s_, 0);
  client.set_read_timeout(timeout_s_, 0);
  client.set_write_timeout(timeout_s_, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw Error(Errc::backend_error, "chat request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw Error(Errc::backend_error, "chat backend returned HTTP " + std::to_string(res->status) + ": " +
                                         res->body.substr(0, 200));
  }
  try {
    const auto doc = ojson::parse(res->body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::backend_error, std::string("malformed chat response: ") + e.what());
  }
}

}  // namespace zoopose
