#pragma once

#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "lgr/rankers.hpp"

namespace lgr {

/// Chat-completions client over HTTP(S). Speaks the common
/// {"model", "messages": [{"role", "content"}]} request shape and reads
/// choices[0].message.content from the reply.
class HttpChatTransport final : public ChatTransport {
 public:
  explicit HttpChatTransport(LlmConfig cfg, int timeout_seconds = 60) : cfg_(std::move(cfg)), timeout_(timeout_seconds) {
    if (cfg_.endpoint.empty()) throw std::invalid_argument("HttpChatTransport: no endpoint configured (LGR_LLM_ENDPOINT)");
    const auto scheme_end = cfg_.endpoint.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("HttpChatTransport: endpoint needs a scheme");
    const auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
    base_ = cfg_.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);
  }

  std::string complete(const std::vector<ChatMessage>& messages) override {
    nlohmann::json body;
    if (!cfg_.model.empty()) body["model"] = cfg_.model;
    body["temperature"] = 0;
    body["messages"] = nlohmann::json::array();
    for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

    httplib::Client client(base_);
    client.set_connection_timeout(timeout_, 0);
    client.set_read_timeout(timeout_, 0);
    httplib::Headers headers;
    if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
    const auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw RankerError(RankerErrorKind::Transport, "request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw RankerError(RankerErrorKind::Transport, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    try {
      const auto reply = nlohmann::json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw RankerError(RankerErrorKind::Transport, std::string("malformed reply body: ") + e.what());
    }
  }

 private:
  LlmConfig cfg_;
  int timeout_;
  std::string base_;
  std::string path_;
};

}  // namespace lgr
