#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <vector>

namespace gamelab {

struct ChatMessage {
  std::string role;  // "system" | "user"
  std::string content;
};

struct ChatRequest {
  std::string model;
  double temperature = 1.0;
  std::vector<ChatMessage> messages;
};

// Raised once the transport gives up (retries exhausted or a non-retryable status).
class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, int status) : std::runtime_error(what), status_(status) {}
  // HTTP status, or 0 when no response was received.
  int status() const { return status_; }

 private:
  int status_;
};

// Returns the first choice's message content for a chat-completions request.
// Implementations must be safe to call from several sessions at once.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

inline constexpr const char* kDefaultApiKeyEnv = "OPENAI_API_KEY";
inline constexpr const char* kDefaultEndpoint = "https://api.openai.com/v1/chat/completions";

struct HttpChatConfig {
  std::string endpoint = kDefaultEndpoint;
  std::string api_key;
  int max_retries = 5;  // on 429 / 5xx / connection failure
  std::chrono::milliseconds backoff_base{1000};
  std::chrono::milliseconds backoff_cap{60000};
  std::chrono::seconds timeout{120};
  int max_concurrent = 8;
  std::chrono::milliseconds min_interval{0};  // spacing between request starts
  std::uint64_t jitter_seed = 0x5eed;
};

// Builds the JSON request body: model, temperature and the message array.
// Nothing else is sent, so provider defaults apply to every other parameter.
std::string chat_request_body(const ChatRequest& request);
// Extracts choices[0].message.content; throws TransportError on a bad body.
std::string chat_response_content(const std::string& body);

class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(HttpChatConfig config);
  ~HttpChatClient() override;

  std::string complete(const ChatRequest& request) override;

 private:
  void wait_for_slot();
  std::chrono::milliseconds backoff(int attempt);

  HttpChatConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::counting_semaphore<1024> in_flight_;
  std::mutex pacing_mutex_;
  std::chrono::steady_clock::time_point next_start_{};
  std::uint64_t jitter_state_;
};

}  // namespace gamelab
