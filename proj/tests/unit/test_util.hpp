#pragma once

#include <atomic>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gamelab/chat_client.hpp"

namespace testutil {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("gamelab-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

// Replays canned replies in order; records every request.
class FakeChat : public gamelab::ChatClient {
 public:
  using Handler = std::function<std::string(const gamelab::ChatRequest&)>;

  explicit FakeChat(std::vector<std::string> replies = {}) : replies_(replies.begin(), replies.end()) {}
  explicit FakeChat(Handler h) : handler_(std::move(h)) {}

  std::string complete(const gamelab::ChatRequest& request) override {
    std::lock_guard lock(mutex_);
    requests.push_back(request);
    if (handler_) return handler_(request);
    if (replies_.empty()) throw gamelab::TransportError("fake chat ran out of replies", 0);
    auto r = replies_.front();
    replies_.pop_front();
    return r;
  }

  std::vector<gamelab::ChatRequest> requests;

 private:
  std::mutex mutex_;
  std::deque<std::string> replies_;
  Handler handler_;
};

}  // namespace testutil
