#include "gamelab/chat_client.hpp"

#include <algorithm>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "gamelab/errors.hpp"
#include "gamelab/rng.hpp"

namespace gamelab {
namespace {

using json = nlohmann::json;

bool retryable(int status) { return status == 429 || status >= 500; }

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
  ~SemaphoreGuard() { s_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  std::counting_semaphore<1024>& s_;
};

}  // namespace

std::string chat_request_body(const ChatRequest& request) {
  json body;
  body["model"] = request.model;
  body["temperature"] = request.temperature;
  body["messages"] = json::array();
  for (const auto& m : request.messages) {
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  }
  return body.dump();
}

std::string chat_response_content(const std::string& body) {
  const json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw TransportError("response body is not JSON", 200);
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw TransportError("choices[0].message.content is not text", 200);
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("unexpected response shape: ") + e.what(), 200);
  }
}

HttpChatClient::HttpChatClient(HttpChatConfig config)
    : config_(std::move(config)),
      in_flight_(std::clamp(config_.max_concurrent, 1, 1024)),
      jitter_state_(config_.jitter_seed) {
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + config_.endpoint);
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  scheme_host_port_ = config_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
}

HttpChatClient::~HttpChatClient() = default;

void HttpChatClient::wait_for_slot() {
  if (config_.min_interval.count() <= 0) return;
  std::chrono::steady_clock::time_point start;
  {
    std::lock_guard lock(pacing_mutex_);
    start = std::max(std::chrono::steady_clock::now(), next_start_);
    next_start_ = start + config_.min_interval;
  }
  std::this_thread::sleep_until(start);
}

std::chrono::milliseconds HttpChatClient::backoff(int attempt) {
  const auto base = config_.backoff_base.count() * (std::int64_t{1} << std::min(attempt, 20));
  const auto capped = std::min<std::int64_t>(base, config_.backoff_cap.count());
  double u;
  {
    std::lock_guard lock(pacing_mutex_);
    jitter_state_ = splitmix64(jitter_state_);
    u = static_cast<double>(jitter_state_ >> 11) * 0x1.0p-53;
  }
  // Equal jitter: half fixed, half random.
  return std::chrono::milliseconds(static_cast<std::int64_t>(capped * (0.5 + 0.5 * u)));
}

std::string HttpChatClient::complete(const ChatRequest& request) {
  const std::string body = chat_request_body(request);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  int last_status = 0;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(backoff(attempt - 1));
    wait_for_slot();
    httplib::Result res;
    {
      SemaphoreGuard guard(in_flight_);
      httplib::Client client(scheme_host_port_);
      client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(config_.timeout));
      client.set_read_timeout(config_.timeout);
      client.set_write_timeout(config_.timeout);
      res = client.Post(path_, headers, body, "application/json");
    }
    if (!res) {
      last_status = 0;
      last_error = "connection failed: " + httplib::to_string(res.error());
      continue;
    }
    last_status = res->status;
    if (res->status >= 200 && res->status < 300) return chat_response_content(res->body);
    last_error = "HTTP " + std::to_string(res->status);
    if (!retryable(res->status)) throw TransportError(last_error + " (not retried)", res->status);
  }
  throw TransportError(last_error + " after " + std::to_string(config_.max_retries) + " retries", last_status);
}

}  // namespace gamelab
