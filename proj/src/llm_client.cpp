#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "absforge/proposer.hpp"

namespace absforge::proposer {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw std::invalid_argument("endpoint must be an http:// or https:// URL");
  auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 300;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

}  // namespace

std::string llm_chat(const ProposerConfig& cfg, const Conversation& conv, const LogSink& log) {
  auto emit = [&](const std::string& line) {
    if (log) log(line);
  };
  const char* key = std::getenv(cfg.api_key_env.c_str());
  if (!key || !*key) throw MissingApiKey("environment variable " + cfg.api_key_env + " is not set");

  const Endpoint ep = split_endpoint(cfg.endpoint);
  httplib::Client client(ep.origin);
  client.set_connection_timeout(cfg.timeout);
  client.set_read_timeout(cfg.timeout);
  client.set_write_timeout(cfg.timeout);
  client.set_bearer_token_auth(key);

  nlohmann::json body;
  body["model"] = cfg.model;
  body["messages"] = conv.to_json();
  const std::string payload = body.dump();

  std::string last_failure = "no attempt made";
  bool last_was_timeout = false;
  int last_status = 0;
  for (std::size_t attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      auto wait = cfg.backoff * (1LL << (attempt - 1));
      emit("retrying in " + std::to_string(wait.count()) + " ms");
      std::this_thread::sleep_for(wait);
    }
    emit("POST " + cfg.endpoint + " model=" + cfg.model + " attempt " + std::to_string(attempt + 1) + " (" +
         std::to_string(conv.messages.size()) + " messages)");
    auto res = client.Post(ep.path, payload, "application/json");
    if (!res) {
      const auto err = res.error();
      last_was_timeout = err == httplib::Error::Read || err == httplib::Error::Write ||
                         err == httplib::Error::ConnectionTimeout;
      last_status = 0;
      last_failure = httplib::to_string(err);
      emit("transport failure: " + last_failure);
      continue;
    }
    emit("status " + std::to_string(res->status));
    if (res->status == 401 || res->status == 403) {
      throw AuthError("chat endpoint rejected the credentials (status " + std::to_string(res->status) + ")");
    }
    if (res->status == 429 || res->status >= 500) {
      last_was_timeout = false;
      last_status = res->status;
      last_failure = excerpt(res->body);
      continue;
    }
    if (res->status != 200) throw ProtocolError(res->status, excerpt(res->body));
    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) throw ProtocolError(res->status, "response is not JSON: " + excerpt(res->body));
    try {
      return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw ProtocolError(res->status, "response lacks choices[0].message.content: " + excerpt(res->body));
    }
  }
  if (last_was_timeout) throw TimeoutError("chat request timed out: " + last_failure);
  throw ProtocolError(last_status, last_failure);
}

}  // namespace absforge::proposer
